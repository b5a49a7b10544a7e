"""
TrainingDiagnostics - Estatísticas e relatório de uma execução de treino
========================================================================
Responsável pelo acompanhamento de uma execução:
- Histórico de episódios (sucesso, fault, retorno, commits de auto-imitação)
- Contagem de atualizações e faults de divergência
- Checkpoints de Q acima do limite 1/(1 − γ)
- Relatório com recomendações e exportação em JSON
"""

import json
import logging
import os
from typing import Any, Dict, List, Optional

import numpy as np

from diagnostics.feature_diagnostics import QTrace, SimilarityReport


class TrainingDiagnostics:
    """
    Coleta e resume o que aconteceu durante o treino.

    Responsabilidades:
    - Registrar episódios online e avaliações
    - Contar faults, commits de auto-imitação e divergências
    - Acompanhar os diagnósticos periódicos (similaridade, Q)
    - Gerar o resumo exportado em diagnostics_summary.json
    """

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger("TrainingDiagnostics")

        self.episode_history: List[Dict[str, Any]] = []
        self.evaluation_history: List[Dict[str, Any]] = []
        self.q_history: List[Dict[str, Any]] = []
        self.similarity_history: List[Dict[str, Any]] = []
        self.update_stats: Dict[str, int] = {
            "critic_updates": 0,
            "actor_updates": 0,
            "bc_updates": 0,
            "divergence_faults": 0,
        }

    # ========== REGISTRO DE EVENTOS ==========

    def register_episode(self, episode_data: Dict[str, Any]):
        """
        Registra um episódio online.

        Args:
            episode_data: Dicionário com dados do episódio
                - episode: int
                - success: bool
                - fault: bool
                - return: float
                - sil_commit: bool
        """
        self.episode_history.append(dict(episode_data))
        if episode_data.get("fault"):
            self.logger.debug(f"[DIAG] Fault no episódio {episode_data.get('episode')}")

    def register_evaluation(self, evaluation_data: Dict[str, Any]):
        self.evaluation_history.append(dict(evaluation_data))

    def register_update(self, kind: str, diverged: bool = False):
        """kind: critic | actor | bc."""
        self.update_stats[f"{kind}_updates"] += 1
        if diverged:
            self.update_stats["divergence_faults"] += 1

    def register_q_trace(self, trace: QTrace):
        summary = trace.summary()
        self.q_history.append(summary)
        if trace.exceeds_bound:
            self.logger.warning(f"[DIAG] {trace.fraction_above_bound:.1%} dos valores Q acima de "
                                f"{trace.bound:.1f} (passo {trace.step})")

    def register_similarity(self, report: SimilarityReport, phase: str = "offline"):
        self.similarity_history.append({"phase": phase, **report.summary()})

    # ========== ESTATÍSTICAS ==========

    def get_episode_statistics(self) -> Dict[str, Any]:
        """
        Retorna estatísticas dos episódios online.

        Returns:
            Dicionário com contagens e taxas
        """
        total = len(self.episode_history)
        successes = sum(1 for e in self.episode_history if e.get("success"))
        faults = sum(1 for e in self.episode_history if e.get("fault"))
        commits = sum(1 for e in self.episode_history if e.get("sil_commit"))
        returns = [float(e.get("return", 0.0)) for e in self.episode_history]
        return {
            "total_episodes": total,
            "successful_episodes": successes,
            "fault_episodes": faults,
            "sil_commits": commits,
            "success_rate": successes / total if total else 0.0,
            "fault_rate": faults / total if total else 0.0,
            "mean_return": float(np.mean(returns)) if returns else 0.0,
        }

    def q_bound_violations(self) -> int:
        return sum(1 for q in self.q_history if q["frac_above_bound"] > 0.0)

    # ========== RELATÓRIO ==========

    def generate_report(self, config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        report = {
            "config": config or {},
            "episodes": self.get_episode_statistics(),
            "updates": dict(self.update_stats),
            "evaluations": list(self.evaluation_history),
            "q_bound_violations": self.q_bound_violations(),
            "q_checkpoints": list(self.q_history),
            "similarity_checkpoints": list(self.similarity_history),
        }
        report["recommendations"] = self._generate_recommendations(report)
        return report

    def _generate_recommendations(self, report: Dict[str, Any]) -> List[str]:
        recommendations = []
        episodes = report["episodes"]

        if report["updates"]["divergence_faults"] > 0:
            recommendations.append("Divergência registrada: reduza a taxa de aprendizado ou aumente alpha/beta")

        if report["q_bound_violations"] > 0:
            recommendations.append("Valores Q acima de 1/(1-gamma): crítico superestimando")

        if episodes["total_episodes"] and episodes["fault_rate"] > 0.5:
            recommendations.append("Mais da metade dos episódios terminou em fault")

        if episodes["total_episodes"] and episodes["sil_commits"] == 0:
            recommendations.append("Nenhum commit de auto-imitação: D_off não cresceu na fase online")

        if not recommendations:
            recommendations.append("Treino dentro dos parâmetros normais")
        return recommendations

    # ========== EXPORTAÇÃO ==========

    def export_summary(self, filename: str, config: Optional[Dict[str, Any]] = None) -> bool:
        """
        Exporta o relatório em JSON.

        Returns:
            True se exportado com sucesso
        """
        try:
            os.makedirs(os.path.dirname(os.path.abspath(filename)), exist_ok=True)
            with open(filename, "w", encoding="utf-8") as fh:
                json.dump(self.generate_report(config), fh, indent=2)
            self.logger.info(f"[DIAG] Resumo de diagnósticos exportado para {filename}")
            return True
        except OSError as e:
            self.logger.error(f"[DIAG] Erro ao exportar resumo: {e}")
            return False

    def reset_statistics(self):
        self.episode_history.clear()
        self.evaluation_history.clear()
        self.q_history.clear()
        self.similarity_history.clear()
        for key in self.update_stats:
            self.update_stats[key] = 0

    def get_summary(self) -> str:
        """Resumo textual para o console."""
        stats = self.get_episode_statistics()
        summary = f"""
+------------------------------------------+
|       RESUMO DE DIAGNÓSTICOS DO TREINO   |
+------------------------------------------+
| Episódios online:    {stats['total_episodes']:>19} |
| Taxa de sucesso:     {stats['success_rate'] * 100:>18.1f}% |
| Taxa de fault:       {stats['fault_rate'] * 100:>18.1f}% |
| Commits SIL:         {stats['sil_commits']:>19} |
| Divergências:        {self.update_stats['divergence_faults']:>19} |
+------------------------------------------+
        """
        return summary.strip()
