from .cli import main, parse_cli
from .grid import ExperimentSpec, ModelSpec, RunRecord, SummaryTable, emit_fit_plot, emit_trajectory_plot, run_grid
