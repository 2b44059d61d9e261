from .admm import AdmmCompletion, relative_change
from .config import AdmmConfig, SolverConfig, default_truncation
from .shrinkage import shrink, svt, truncated_nuclear_norm, truncated_svt
from .sth_lrtc import SolverState, SthLrtcSolver, sth_lrtc
from .trace import ConvergenceTrace, ImputationResult, TraceRecord
