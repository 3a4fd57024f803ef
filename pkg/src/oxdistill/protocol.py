"""Closed-form recurrences for the recurrence purification protocol (``OX1``)
and its ordered variant (``OX2``), plus the iteration driver and pair-cost
bookkeeping.

One round takes two pairs, applies a bilateral CNOT (first pair = sources),
measures both target qubits in the z basis and keeps the source pair when
the outcomes coincide.  For Bell-diagonal inputs ``a`` and ``b`` (internal
convention, see :mod:`oxdistill.bell`) and gate reliability ``g``:

    N   = (1 + g az bz) / 2
    ax' = g (ax bx + ay by) / (2N)
    ay' = g (ay bx + ax by) / (2N)
    az' = g (az + bz)       / (2N)

``OX1`` first applies the bilateral rotation ``U12x`` to both pairs; ``OX2``
skips it and instead relies on the input being canonical (see
:func:`oxdistill.bell.canonicalize`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Literal, Optional

import numpy as np

from .bell import (
    CorrelationTriple,
    LocalRotation,
    apply_local_rotation,
    canonicalize,
    degree_of_separability,
    fidelity,
    is_separable,
)

MIN_SUCCESS_PROBABILITY = 1e-14


class AlwaysDiscardedError(ArithmeticError):
    """The coincidence outcome has (numerically) zero probability."""


class Variant(str, enum.Enum):
    OX1 = "ox1"
    OX2 = "ox2"


NoiseChannel = Literal["transmission", "gate", "both"]


@dataclass(frozen=True)
class NoiseModel:
    """Imperfect local operations with reliability ``p``.

    ``transmission``: before each round every pair goes through
    ``rho -> p rho + (1 - p) I/2 (x) tr_A rho`` (all correlations scale by p).
    ``gate``: the bilateral CNOT becomes ``p^2 U rho U^dagger + (1 - p^2) I/16``.
    """

    p: float = 1.0
    channel: NoiseChannel = "transmission"

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"reliability p={self.p} outside (0, 1]")
        if self.channel not in ("transmission", "gate", "both"):
            raise ValueError(f"unknown noise channel {self.channel!r}")

    @property
    def input_factor(self) -> float:
        return self.p if self.channel in ("transmission", "both") else 1.0

    @property
    def gate_factor(self) -> float:
        return self.p * self.p if self.channel in ("gate", "both") else 1.0


NOISELESS = NoiseModel(1.0)


@dataclass(frozen=True)
class StepResult:
    output: CorrelationTriple
    success_probability: float
    variant: Variant
    noise: NoiseModel = NOISELESS


def analytic_step(
    s1: CorrelationTriple,
    s2: CorrelationTriple,
    variant: Variant = Variant.OX2,
    noise: NoiseModel = NOISELESS,
) -> StepResult:
    """One purification round with ``s1`` as source pair and ``s2`` as target pair."""
    variant = Variant(variant)
    if variant is Variant.OX1:
        s1 = apply_local_rotation(s1, LocalRotation.U12X)
        s2 = apply_local_rotation(s2, LocalRotation.U12X)
    q = noise.input_factor
    ax, ay, az = (q * v for v in s1.as_tuple())
    bx, by, bz = (q * v for v in s2.as_tuple())
    g = noise.gate_factor
    two_n = 1.0 + g * az * bz
    n = 0.5 * two_n
    if n < MIN_SUCCESS_PROBABILITY:
        raise AlwaysDiscardedError(f"success probability {n:.3g}")
    out = CorrelationTriple(
        g * (ax * bx + ay * by) / two_n,
        g * (ay * bx + ax * by) / two_n,
        g * (az + bz) / two_n,
    )
    return StepResult(out, n, variant, noise)


def binary_step(f: float) -> tuple[float, float]:
    """Noiseless round on two copies of the binary state with weight ``f``.

    Returns ``(f', N)`` with ``f' = f^2 / (f^2 + (1-f)^2)``, ``N = 2f^2 - 2f + 1``.
    """
    if not 0.0 < f <= 1.0:
        raise ValueError(f"f={f} outside (0, 1]")
    n = 2 * f * f - 2 * f + 1
    return f * f / n, n


def separability_step(s0: float) -> float:
    """Separability after one noiseless round on binary states."""
    if not 0.0 < s0 <= 1.0:
        raise ValueError(f"S0={s0} outside (0, 1]")
    return s0 * s0 / (1 + (1 - s0) ** 2)


def separability_closed_form(s0: float, iterations: int) -> float:
    """``2 / ((2/S0 - 1)^(2^n) + 1)``, evaluated in log space."""
    if not 0.0 < s0 <= 1.0:
        raise ValueError(f"S0={s0} outside (0, 1]")
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    if iterations == 0:
        return s0
    log_base = math.log1p(2 * (1 - s0) / s0)
    if log_base == 0.0:
        return 1.0
    if iterations > 1000:
        return 0.0
    exponent = 2.0**iterations * log_base
    if exponent > 700:
        return 0.0
    return 2.0 / (math.exp(exponent) + 1.0)


def noisy_binary_initial_separability(f: float, noise: NoiseModel) -> float:
    """Unclamped separability ``(3 - p(4f - 1)) / 2`` of a binary pair after one
    transmission channel use."""
    return 0.5 * (3 - noise.p * (4 * f - 1))


def check_purifiable(s: CorrelationTriple) -> bool:
    """Whether a round on two copies of ``s`` can raise the fidelity.

    Needs ``|cx| + |cy| + |cz| > 1`` (canonical fidelity above 1/2).
    """
    cx, cy, cz = (abs(v) for v in s.target)
    by_sum = cx + cy + cz > 1.0
    # same inequality in squared form; differs only by rounding at the boundary
    by_square = (cx + cy) ** 2 - (1 - cz) ** 2 > 0.0
    if by_sum != by_square and abs(cx + cy + cz - 1.0) > 1e-12:
        raise AssertionError(f"purifiability tests disagree for {s}")
    return by_sum


@dataclass(frozen=True)
class StopRule:
    max_iterations: int = 30
    state_tol: float = 1e-12
    fidelity_tol: float = 1e-12
    stop_when_unpurifiable: bool = True


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    state: CorrelationTriple
    fidelity: float
    separability: float
    step_probability: Optional[float]  # of the round that produced this row
    cumulative_cost: float

    @property
    def status(self) -> str:
        if is_separable(self.state):
            return "separable"
        if min(self.state.target) >= 0.0:
            return "nonseparable_canonical"
        return "nonseparable"


@dataclass(frozen=True)
class PurificationTrace:
    records: tuple[TraceRecord, ...]
    variant: Variant
    noise: NoiseModel
    initial: CorrelationTriple
    status: str
    ox1_rotation: str = "after"

    def __len__(self):
        return len(self.records)

    @property
    def fidelities(self) -> list[float]:
        return [r.fidelity for r in self.records]

    @property
    def separabilities(self) -> list[float]:
        return [r.separability for r in self.records]


Ox1Rotation = Literal["after", "before"]


def _round(state, variant, noise, ox1_rotation):
    if variant is Variant.OX2:
        state, _ = canonicalize(state)
        return analytic_step(state, state, Variant.OX2, noise)
    if ox1_rotation == "before":
        return analytic_step(state, state, Variant.OX1, noise)
    # BCNOT acts on the state as given; U12x is applied to the survivors
    pre = apply_local_rotation(state, LocalRotation.U12X)
    res = analytic_step(pre, pre, Variant.OX1, noise)
    return replace(res, output=apply_local_rotation(res.output, LocalRotation.U12X))


def _record(k, state, n, cost):
    return TraceRecord(k, state, fidelity(state), degree_of_separability(state), n, cost)


def iterate(
    initial: CorrelationTriple,
    variant: Variant = Variant.OX2,
    noise: NoiseModel = NOISELESS,
    stop: StopRule = StopRule(),
    ox1_rotation: Ox1Rotation = "after",
) -> PurificationTrace:
    """Purify a homogeneous ensemble: every round pairs the state with a copy.

    ``OX2`` canonicalises before each round.  For ``OX1``, ``ox1_rotation``
    places the ``U12x`` rotation either after each measurement ("after": the
    first BCNOT sees ``initial`` unchanged) or before each BCNOT ("before").
    """
    variant = Variant(variant)
    if ox1_rotation not in ("after", "before"):
        raise ValueError(f"ox1_rotation must be 'after' or 'before', not {ox1_rotation!r}")
    state = initial
    cost = 1.0
    records = [_record(0, state, None, cost)]
    status = "max_iterations"
    if not check_purifiable(state):
        return PurificationTrace(tuple(records), variant, noise, initial, "not_purifiable", ox1_rotation)
    for k in range(1, stop.max_iterations + 1):
        if stop.stop_when_unpurifiable and not check_purifiable(state):
            status = "not_purifiable"
            break
        res = _round(state, variant, noise, ox1_rotation)
        cost = cost * 2.0 / res.success_probability
        new = res.output
        records.append(_record(k, new, res.success_probability, cost))
        change = float(np.max(np.abs(new.as_array() - state.as_array())))
        state = new
        if change < stop.state_tol:
            status = "converged"
            break
        if 1.0 - fidelity(new) < stop.fidelity_tol:
            status = "target_reached"
            break
    return PurificationTrace(tuple(records), variant, noise, initial, status, ox1_rotation)


def pair_cost(trace: PurificationTrace) -> list[tuple[float, float]]:
    """``(F_k, cost_k)`` with ``cost_k = prod_{j<k} 2/N_j`` initial pairs per survivor."""
    out = []
    cost = 1.0
    for r in trace.records:
        if r.step_probability is not None:
            cost = cost * 2.0 / r.step_probability
        out.append((r.fidelity, cost))
    return out


LEVEL_TOL = 1e-12


def cost_to_reach(
    costs: list[tuple[float, float]], level: float, tol: float = LEVEL_TOL
) -> Optional[float]:
    """Smallest expected cost at which fidelity ``>= level - tol`` is first reached.

    The tolerance keeps rounding-level differences between two runs from
    counting as an extra round.
    """
    for f, c in costs:
        if f >= level - tol:
            return c
    return None


def compare_costs(
    costs_a: list[tuple[float, float]], costs_b: list[tuple[float, float]]
) -> list[tuple[float, float, float]]:
    """``(level, cost_a, cost_b)`` for every fidelity level reached by both runs."""
    top = min(max(f for f, _ in costs_a), max(f for f, _ in costs_b)) + LEVEL_TOL
    levels: list[float] = []
    for f in sorted(f for f, _ in costs_a + costs_b if f <= top):
        if not levels or f - levels[-1] > LEVEL_TOL:
            levels.append(f)
    return [(lv, cost_to_reach(costs_a, lv), cost_to_reach(costs_b, lv)) for lv in levels]


def monte_carlo_pair_cost(
    trace: PurificationTrace,
    trials: int = 100_000,
    seed: int = 0,
    level: Optional[int] = None,
) -> tuple[float, float]:
    """Sample the number of initial pairs consumed per surviving pair.

    Building one pair at level ``k+1`` needs repeated attempts, each eating two
    level-``k`` pairs, until one succeeds (probability ``N_k``).  Returns the
    sample mean and its standard error at ``level`` (default: last record).
    """
    rng = np.random.default_rng(seed)
    if level is None:
        level = len(trace.records) - 1
    probs = [r.step_probability for r in trace.records[1 : level + 1]]
    needed = np.ones(trials, dtype=np.int64)
    for n_k in reversed(probs):
        failures = rng.negative_binomial(needed, n_k) if n_k < 1.0 else 0
        needed = 2 * (needed + failures)
    samples = needed.astype(float)
    return float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(trials))


__all__ = [
    "AlwaysDiscardedError",
    "NoiseModel",
    "NOISELESS",
    "PurificationTrace",
    "StepResult",
    "StopRule",
    "TraceRecord",
    "Variant",
    "analytic_step",
    "binary_step",
    "check_purifiable",
    "compare_costs",
    "cost_to_reach",
    "iterate",
    "monte_carlo_pair_cost",
    "noisy_binary_initial_separability",
    "pair_cost",
    "separability_closed_form",
    "separability_step",
]
