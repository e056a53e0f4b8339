"""Adaptive scaling Metropolis: a random-walk sampler that tunes its proposal
scale by stochastic approximation towards a target acceptance rate."""

from ._core import BACKEND
from .adapt import (AdaptConfig, AmAsmConfig, Fixed, PolyGrowth, RestrictionSchedule,
                    RunSummary, StepSchedule, TraceBlock, TraceRecorder, run_am_asm, run_asm,
                    run_asm_trace, run_coupled)
from .config import RunConfig, load_config, parse_config
from .errors import (ASMError, BracketError, ConfigError, CouplingError, InvalidStateError,
                     InvariantViolation, NumericalError, SinkError, UnsupportedDimensionError,
                     UnsupportedTargetError)
from .kernel import (acceptance_prob, expected_acc_at, expected_acc_quadrature, mean_acc,
                     metropolis_step, run_fixed_scale)
from .proposal import ProposalModel, RadialProfile, ScalingFunction, ShapeMatrix
from .report import BoundReport
from .rng import ChainStream
from .targets import (CustomTarget, ExponentialPower, Gaussian, SmoothBump, TargetDensity,
                      UniformBall, UniformBox)

__version__ = "0.1.0"

__all__ = [
    "ASMError", "AdaptConfig", "AmAsmConfig", "BACKEND", "BoundReport", "BracketError",
    "ChainStream", "ConfigError", "CouplingError", "CustomTarget", "ExponentialPower", "Fixed",
    "Gaussian", "InvalidStateError", "InvariantViolation", "NumericalError", "PolyGrowth",
    "ProposalModel", "RadialProfile", "RestrictionSchedule", "RunConfig", "RunSummary",
    "ScalingFunction", "ShapeMatrix", "SinkError", "SmoothBump", "StepSchedule", "TargetDensity",
    "TraceBlock", "TraceRecorder", "UniformBall", "UniformBox", "UnsupportedDimensionError",
    "UnsupportedTargetError", "acceptance_prob", "expected_acc_at", "expected_acc_quadrature",
    "load_config", "mean_acc", "metropolis_step", "parse_config", "run_am_asm", "run_asm",
    "run_asm_trace", "run_coupled", "run_fixed_scale",
]
