from .mean_fill import mean_fill
from .mftv import MftvConfig, MftvSolver, mftv
from .snn import SnnConfig, SnnSolver, mode_fold, mode_unfold, sth_snn
from .tv import TvProx, tv_regularizer
