from .metrics import EvalReport, cep, score, write_cep_csv
from .methods import METHODS, run_method
from .synth import SyntheticSpec, Trajectories, UniformMissing, WholeColumns, synth
from .trials import MethodSummary, TrialReport, run_trials
