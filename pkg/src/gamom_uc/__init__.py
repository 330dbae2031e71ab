"""Unit commitment solved with a two-population (mitosis/meiosis) genetic algorithm."""
from .baselines import GaParams, PsoParams, ga_run, pso_run
from .dispatch import HourBounds, dispatch_hour, dispatch_schedule, ramp_bounds
from .evolution import Chromosome, Evaluator, RunResult, fitness, select_survivors
from .gamom import Crossover, GamomParams, init_populations, run, subpopulation_sizes
from .model import (BalanceMode, CostBreakdown, DispatchMatrix, EvaluatedSchedule, InputError,
                    UCInstance, UnitSpec, ViolationReport, evaluate, load_instance, save_instance,
                    validate_instance)
from .oracle import dispatch_grid_oracle, enumerate_optimal
from .repair import repair

__all__ = [
    "BalanceMode", "Chromosome", "CostBreakdown", "Crossover", "DispatchMatrix",
    "EvaluatedSchedule", "Evaluator", "GaParams", "GamomParams", "HourBounds", "InputError",
    "PsoParams", "RunResult", "UCInstance", "UnitSpec", "ViolationReport", "dispatch_grid_oracle",
    "dispatch_hour", "dispatch_schedule", "enumerate_optimal", "evaluate", "fitness", "ga_run",
    "init_populations", "load_instance", "pso_run", "ramp_bounds", "repair", "run",
    "save_instance", "select_survivors", "subpopulation_sizes", "validate_instance",
]
