#!/usr/bin/env python3
"""
Penalty Dual Decomposition Engine
Problem-agnostic double loop: an inner block coordinate descent over the
augmented Lagrangian and an outer loop that either updates the duals or
shrinks the penalty factor, until the primal/auxiliary gap falls below the
configured threshold.

Problems plug in through `ProblemAdapter`, which exposes the ordered block
updates, the AL objective and the coupled primal/auxiliary vectors.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..config import PddConfig
from ..errors import InternalError, InvalidInputError
from ..models.star_model import canonical_phase

logger = logging.getLogger(__name__)

ThetaPair = Tuple[np.ndarray, np.ndarray]
BlockUpdate = Callable[["PddState"], None]

GUARD_RTOL = 1e-12


@dataclass(frozen=True)
class PddState:
    """Penalty factor, duals and violation bookkeeping of one PDD run"""

    rho: float
    lambda_t: np.ndarray
    lambda_r: np.ndarray
    eta: float
    c: float
    delta: float = np.inf

    def __post_init__(self):
        if not self.rho > 0:
            raise InvalidInputError(f"penalty factor must be > 0, got {self.rho}")
        if not 0 < self.c < 1:
            raise InvalidInputError(f"shrink factor must lie in (0, 1), got {self.c}")

    @classmethod
    def initial(cls, n_elements: int, config: PddConfig) -> "PddState":
        return cls(
            rho=config.rho0,
            lambda_t=np.zeros(n_elements, dtype=complex),
            lambda_r=np.zeros(n_elements, dtype=complex),
            eta=config.eta0,
            c=config.c,
        )

    @property
    def lambdas(self) -> ThetaPair:
        return self.lambda_t, self.lambda_r


@dataclass
class TraceRecord:
    outer_iter: int
    inner_iter: int
    throughput: float
    al_objective: float
    delta: float
    rho: float
    phase_gaps: np.ndarray = field(repr=False)
    final: bool = False

    @property
    def phase_residual_max(self) -> float:
        if self.phase_gaps.size == 0:
            return 0.0
        return float(np.max(np.abs(np.cos(self.phase_gaps))))


class RunTrace:
    """Append-only log of inner iterations plus the finalized point"""

    def __init__(self):
        self._records: List[TraceRecord] = []

    def append(self, record: TraceRecord) -> None:
        self._records.append(record)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(tuple(self._records))

    def __getitem__(self, index: int) -> TraceRecord:
        return self._records[index]

    @property
    def records(self) -> Tuple[TraceRecord, ...]:
        return tuple(self._records)

    def segment(self, outer_iter: int) -> List[TraceRecord]:
        return [r for r in self._records if r.outer_iter == outer_iter and not r.final]

    def to_frame(self) -> pd.DataFrame:
        """One row per record; phase gaps spread over dphi_1..dphi_N columns"""
        rows = []
        for record in self._records:
            row = asdict(record)
            gaps = row.pop("phase_gaps")
            row["phase_residual_max"] = record.phase_residual_max
            for n, gap in enumerate(np.atleast_1d(gaps), start=1):
                row[f"dphi_{n}"] = float(gap)
            rows.append(row)
        return pd.DataFrame(rows)


@dataclass
class PddResult:
    converged: bool
    outer_iterations: int
    inner_iterations: int
    delta: float
    rho: float
    objective: float
    al_objective: float
    state: PddState = field(repr=False)

    def summary(self) -> Dict[str, Any]:
        return {
            "converged": self.converged,
            "outer_iterations": self.outer_iterations,
            "inner_iterations": self.inner_iterations,
            "delta": self.delta,
            "rho": self.rho,
            "objective": self.objective,
        }


class ProblemAdapter(ABC):
    """Hooks the PDD engine needs from a concrete problem"""

    n_elements: int

    @abstractmethod
    def blocks(self) -> List[Tuple[str, BlockUpdate]]:
        """Ordered (name, update) pairs; each update is an exact block minimizer"""

    @abstractmethod
    def al_objective(self, state: PddState) -> float:
        ...

    @abstractmethod
    def objective(self) -> float:
        """True objective reported in the trace (e.g. throughput)"""

    @abstractmethod
    def primal(self) -> ThetaPair:
        ...

    @abstractmethod
    def auxiliary(self) -> ThetaPair:
        ...

    @abstractmethod
    def snapshot(self) -> Any:
        ...

    @abstractmethod
    def restore(self, snapshot: Any) -> None:
        ...

    def finalize(self, state: PddState) -> None:
        """Called once after the outer loop stops"""

    def phase_gaps(self) -> np.ndarray:
        theta_t, theta_r = self.primal()
        return np.abs(canonical_phase(np.angle(theta_t)) - canonical_phase(np.angle(theta_r)))


def constraint_violation(theta: ThetaPair, theta_tilde: ThetaPair) -> float:
    """max over sides of ||theta~_i - theta_i||_inf"""
    violation = 0.0
    for th, tt in zip(theta, theta_tilde):
        th = np.asarray(th)
        tt = np.asarray(tt)
        if th.shape != tt.shape:
            raise InvalidInputError(f"length mismatch: {th.shape} vs {tt.shape}")
        if th.size:
            violation = max(violation, float(np.max(np.abs(tt - th))))
    return violation


def inner_bcd(
    adapter: ProblemAdapter,
    state: PddState,
    tol: float,
    max_iter: int,
    guard_tol: float = 1e-9,
    outer_iter: int = 0,
    trace: Optional[RunTrace] = None,
) -> List[TraceRecord]:
    """Cycle the adapter's blocks until the relative AL decrease drops below tol.

    Raises InternalError naming the block if any step increases the AL
    objective by more than guard_tol.
    """
    segment: List[TraceRecord] = []
    previous = adapter.al_objective(state)

    for inner in range(1, max_iter + 1):
        start = previous
        for name, update in adapter.blocks():
            update(state)
            current = adapter.al_objective(state)
            if current > previous + guard_tol + GUARD_RTOL * abs(previous):
                raise InternalError(name, previous, current)
            previous = current

        record = TraceRecord(
            outer_iter=outer_iter,
            inner_iter=inner,
            throughput=adapter.objective(),
            al_objective=previous,
            delta=constraint_violation(adapter.primal(), adapter.auxiliary()),
            rho=state.rho,
            phase_gaps=adapter.phase_gaps(),
        )
        segment.append(record)
        if trace is not None:
            trace.append(record)

        if start - previous < tol * max(abs(start), 1.0):
            break

    logger.debug(
        f"Inner BCD (outer {outer_iter}): {len(segment)} iteration(s), AL = {previous:.10g}"
    )
    return segment


def outer_step(state: PddState, theta: ThetaPair, theta_tilde: ThetaPair) -> PddState:
    """Dual update when the violation is small enough, penalty shrink otherwise"""
    delta = constraint_violation(theta, theta_tilde)
    if delta <= state.eta:
        lambda_t = state.lambda_t + (theta_tilde[0] - theta[0]) / state.rho
        lambda_r = state.lambda_r + (theta_tilde[1] - theta[1]) / state.rho
        updated = replace(state, lambda_t=lambda_t, lambda_r=lambda_r)
        logger.debug(f"Outer step: dual update (delta={delta:.3e} <= eta={state.eta:.3e})")
    else:
        updated = replace(state, rho=state.c * state.rho)
        logger.debug(f"Outer step: rho {state.rho:.3e} -> {updated.rho:.3e} (delta={delta:.3e})")
    return replace(updated, eta=0.9 * delta, delta=delta)


def solve(
    adapter: ProblemAdapter, config: PddConfig, label: str = "pdd"
) -> Tuple[PddResult, RunTrace]:
    """Run the PDD double loop on `adapter`.

    Always performs at least one outer iteration. If the outer cap is hit the
    iterate with the smallest violation is restored and reported as not
    converged. The adapter's `finalize` runs in both cases.
    """
    state = PddState.initial(adapter.n_elements, config)
    trace = RunTrace()
    converged = False
    inner_total = 0
    best: Optional[Tuple[float, Any, PddState]] = None
    outer = 0

    for outer in range(1, config.outer_max_iter + 1):
        segment = inner_bcd(
            adapter,
            state,
            tol=config.inner_tol,
            max_iter=config.inner_max_iter,
            guard_tol=config.guard_tol,
            outer_iter=outer,
            trace=trace,
        )
        inner_total += len(segment)
        delta = constraint_violation(adapter.primal(), adapter.auxiliary())
        state = replace(state, delta=delta)

        if best is None or delta < best[0]:
            best = (delta, adapter.snapshot(), state)

        if delta < config.threshold:
            converged = True
            break

        state = outer_step(state, adapter.primal(), adapter.auxiliary())

    if not converged and best is not None:
        logger.warning(
            f"[{label}] outer cap {config.outer_max_iter} reached; "
            f"restoring best iterate with delta={best[0]:.3e}"
        )
        adapter.restore(best[1])
        state = best[2]

    adapter.finalize(state)
    final_al = adapter.al_objective(state)
    objective = adapter.objective()
    trace.append(
        TraceRecord(
            outer_iter=outer,
            inner_iter=0,
            throughput=objective,
            al_objective=final_al,
            delta=state.delta,
            rho=state.rho,
            phase_gaps=adapter.phase_gaps(),
            final=True,
        )
    )

    result = PddResult(
        converged=converged,
        outer_iterations=outer,
        inner_iterations=inner_total,
        delta=state.delta,
        rho=state.rho,
        objective=objective,
        al_objective=final_al,
        state=state,
    )
    logger.info(
        f"[{label}] {'converged' if converged else 'NOT converged'} after "
        f"{outer} outer / {inner_total} inner iterations, delta={state.delta:.3e}, "
        f"objective={objective:.6f}"
    )
    return result, trace
