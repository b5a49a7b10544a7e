"""
Replay Package - Transições de N passos e buffers offline/online
"""

from .dual_buffer import DualBuffer, TrajectoryStore
from .transitions import Transition, TransitionBatch, assemble_nstep, assemble_nstep_batch

__all__ = ['DualBuffer', 'TrajectoryStore', 'Transition', 'TransitionBatch', 'assemble_nstep',
           'assemble_nstep_batch']
