"""
Optimization blocks, the PDD driver and the throughput problem adapter
"""

from .closed_form import (
    project_independent,
    project_unit_modulus,
    update_amplitudes,
    update_phases,
)
from .pdd_engine import (
    PddResult,
    PddState,
    ProblemAdapter,
    RunTrace,
    TraceRecord,
    constraint_violation,
    inner_bcd,
    outer_step,
    solve,
)
from .throughput import ThroughputProblem, ThroughputSolution
from .wmmse import (
    EffectiveChannels,
    WmmseState,
    al_objective,
    mse,
    optimize_beamformer,
    sinr,
    sum_rate,
    update_beamformer,
    update_theta,
    update_weights_receivers,
    wmmse_objective,
)

__all__ = [
    "EffectiveChannels",
    "PddResult",
    "PddState",
    "ProblemAdapter",
    "RunTrace",
    "ThroughputProblem",
    "ThroughputSolution",
    "TraceRecord",
    "WmmseState",
    "al_objective",
    "constraint_violation",
    "inner_bcd",
    "mse",
    "optimize_beamformer",
    "outer_step",
    "project_independent",
    "project_unit_modulus",
    "sinr",
    "solve",
    "sum_rate",
    "update_amplitudes",
    "update_beamformer",
    "update_phases",
    "update_theta",
    "update_weights_receivers",
    "wmmse_objective",
]
