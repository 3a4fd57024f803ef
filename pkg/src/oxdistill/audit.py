"""Cross-checks of closed forms against the dense simulation.

Two kinds of check live here.  ``analytic_vs_oracle`` compares
:func:`oxdistill.protocol.analytic_step` with the 16x16 simulation and must
always agree; a mismatch is a bug.  ``formula_audit`` evaluates closed forms
as they are commonly quoted for this protocol (kept verbatim below, typos
included) and records where they agree with the simulation.  Disagreements
there are findings, not failures.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .bell import (
    CorrelationTriple,
    from_density_matrix,
    make_binary,
    raw_separability,
    to_density_matrix,
)
from .oracle import depolarize_pair, oracle_step, pauli_conjugation_table
from .protocol import (
    AlwaysDiscardedError,
    NoiseModel,
    Variant,
    analytic_step,
    binary_step,
    separability_closed_form,
    separability_step,
)

ANALYTIC_TOL = 1e-10
FORMULA_TOL = 1e-10
CHANNELS = ("transmission", "gate", "both")


# --- quoted closed forms (target-frame coefficients) -------------------------

def quoted_step(c, d):
    """Step coefficients as quoted; the yy numerator reads ``cz cz' + cy cx'``."""
    cx, cy, cz = c
    dx, dy, dz = d
    den = 1 + cz * dz
    return ((cx * dx + cy * dy) / den, (cz * dz + cy * dx) / den, (cz + dz) / den)


def quoted_success_probability(c, d):
    return 0.5 * (1 + c[2] * d[2])


def quoted_target_population(c, d):
    cx, cy, cz = c
    dx, dy, dz = d
    n = quoted_success_probability(c, d)
    return ((1 + cz) * (1 + dz) + (cx + cy) * (dx + dy)) / (4 * n)


def quoted_general_separability(c, d):
    cx, cy, cz = (abs(v) for v in c)
    dx, dy, dz = (abs(v) for v in d)
    n = quoted_success_probability(c, d)
    return 1.5 - ((cx + cy) * (dx + dy) + cz + dz) / (2 * n)


def quoted_noisy_success_probability(c, d, p):
    return (1 + p * p * (1 + 2 * abs(c[2] * d[2]))) / (4 * p * p)


def quoted_binary_coefficient(f):
    return (2 * f - 1) / (2 * f * f - 2 * f + 1)


def quoted_binary_initial_separability(f):
    return 1.0 if f <= 0.5 else 2 * (1 - f)


def quoted_noisy_binary_initial_separability(f, p):
    return 0.5 * (3 - p * (4 * f - 1))


def quoted_noisy_binary_step(f, p):
    den = 1 - 2 * p * p * f * (1 - f)
    g = p * p * (2 * f - 1) / den
    return (p * p * (2 * f * f - 2 * f + 1) / den, g, g)


def quoted_noisy_binary_separability(f, p):
    den = 1 - 2 * p * p * f * (1 - f)
    return 0.5 * (3 - p * p * (2 * f * f + 2 * f - 1) / den)


# --- analytic vs oracle ----------------------------------------------------

def random_triple(rng: np.random.Generator) -> CorrelationTriple:
    """Uniform sample from the tetrahedron of Bell-diagonal states."""
    w = rng.dirichlet(np.ones(4))
    # populations (Phi+, Psi-, Psi+, Phi-) -> (ax, ay, az)
    ax = w[0] - w[1] + w[2] - w[3]
    ay = -w[0] - w[1] + w[2] + w[3]
    az = w[0] - w[1] - w[2] + w[3]
    return CorrelationTriple(ax, ay, az)


@dataclass(frozen=True)
class EquivalenceReport:
    cases: int
    discarded: int
    max_state_error: float
    max_probability_error: float

    @property
    def ok(self) -> bool:
        return max(self.max_state_error, self.max_probability_error) <= ANALYTIC_TOL


def analytic_vs_oracle(
    samples: int = 200,
    ps=(1.0, 0.994, 0.9),
    channels=CHANNELS,
    seed: int = 20010912,
) -> EquivalenceReport:
    rng = np.random.default_rng(seed)
    cases = discarded = 0
    worst_s = worst_n = 0.0
    for _ in range(samples):
        s1, s2 = random_triple(rng), random_triple(rng)
        for variant, p, ch in product(Variant, ps, channels):
            noise = NoiseModel(p, ch)
            try:
                a = analytic_step(s1, s2, variant, noise)
            except AlwaysDiscardedError:
                discarded += 1
                continue
            o = oracle_step(s1, s2, variant, noise)
            cases += 1
            worst_s = max(worst_s, float(np.max(np.abs(a.output.as_array() - o.output.as_array()))))
            worst_n = max(worst_n, abs(a.success_probability - o.success_probability))
    return EquivalenceReport(cases, discarded, worst_s, worst_n)


# --- quoted-formula audit --------------------------------------------------

@dataclass(frozen=True)
class FormulaCheck:
    formula: str
    channel: str
    f: float
    p: float
    quoted: float
    simulated: float

    @property
    def diff(self) -> float:
        return abs(self.quoted - self.simulated)

    @property
    def agrees(self) -> bool:
        return self.diff <= FORMULA_TOL


def _noisy_binary_input(f, p, channel):
    """Binary pair as it enters the BCNOT under ``channel``."""
    s = make_binary(f)
    if channel in ("transmission", "both"):
        return from_density_matrix(depolarize_pair(to_density_matrix(s), p))
    return s


def formula_audit(
    fs=(0.55, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99),
    ps=(1.0, 0.994, 0.95, 0.9, 0.8),
) -> list[FormulaCheck]:
    """Evaluate every quoted closed form against the simulation on an (f, p) grid."""
    checks: list[FormulaCheck] = []
    add = checks.append

    for f in fs:
        s = make_binary(f)
        res = oracle_step(s, s, Variant.OX2)
        fp, n = binary_step(f)
        add(FormulaCheck("binary_coefficient", "none", f, 1.0,
                         quoted_binary_coefficient(f), res.output.target[2]))
        add(FormulaCheck("binary_success_probability", "none", f, 1.0,
                         2 * f * f - 2 * f + 1, res.success_probability))
        add(FormulaCheck("binary_fidelity", "none", f, 1.0, fp,
                         0.25 * (1 + sum(res.output.target))))
        s0 = quoted_binary_initial_separability(f)
        add(FormulaCheck("binary_initial_separability", "none", f, 1.0, s0,
                         min(raw_separability(s), 1.0)))
        s1 = min(raw_separability(res.output), 1.0)
        add(FormulaCheck("binary_separability_step", "none", f, 1.0, separability_step(s0), s1))
        # n-fold closed form against repeated simulation
        cur = s
        for k in range(1, 4):
            cur = oracle_step(cur, cur, Variant.OX2).output
            add(FormulaCheck(f"binary_separability_closed_form_n{k}", "none", f, 1.0,
                             separability_closed_form(s0, k), min(raw_separability(cur), 1.0)))

        # general step with the quoted yy numerator (identical and mixed partners)
        partner = CorrelationTriple.from_target_frame(0.7, 0.2, 0.1)
        for tag, c, d in (("self", s, s), ("mixed", s, partner)):
            r = oracle_step(c, d, Variant.OX2)
            q = quoted_step(c.target, d.target)
            for axis, i in zip("xyz", range(3)):
                add(FormulaCheck(f"step_{axis}_coefficient_{tag}", "none", f, 1.0,
                                 q[i], r.output.target[i]))
            add(FormulaCheck(f"target_population_{tag}", "none", f, 1.0,
                             quoted_target_population(c.target, d.target),
                             0.25 * (1 + sum(r.output.target))))
            add(FormulaCheck(f"general_separability_{tag}", "none", f, 1.0,
                             quoted_general_separability(c.target, d.target),
                             raw_separability(r.output)))

        for p in ps:
            add(FormulaCheck("noisy_binary_initial_separability", "transmission", f, p,
                             quoted_noisy_binary_initial_separability(f, p),
                             raw_separability(_noisy_binary_input(f, p, "transmission"))))
            for ch in CHANNELS:
                noise = NoiseModel(p, ch)
                try:
                    r = oracle_step(s, s, Variant.OX2, noise)
                except AlwaysDiscardedError:
                    continue
                q = quoted_noisy_binary_step(f, p)
                for axis, i in zip("xyz", range(3)):
                    add(FormulaCheck(f"noisy_binary_{axis}_coefficient", ch, f, p,
                                     q[i], r.output.target[i]))
                add(FormulaCheck("noisy_binary_separability", ch, f, p,
                                 quoted_noisy_binary_separability(f, p),
                                 raw_separability(r.output)))
                add(FormulaCheck("noisy_success_probability", ch, f, p,
                                 quoted_noisy_success_probability(s.target, s.target, p),
                                 r.success_probability))
    return checks


def summarize(checks: list[FormulaCheck]) -> list[tuple[str, str, int, int, float]]:
    """Group by (formula, channel): ``(formula, channel, n, n_agree, max_diff)``."""
    groups: dict[tuple[str, str], list[FormulaCheck]] = {}
    for c in checks:
        groups.setdefault((c.formula, c.channel), []).append(c)
    return [
        (name, ch, len(g), sum(c.agrees for c in g), max(c.diff for c in g))
        for (name, ch), g in sorted(groups.items())
    ]


def conjugation_audit(control: int = 0):
    """Thin wrapper kept for the CLI: the single-CNOT conjugation table."""
    return pauli_conjugation_table(control)


__all__ = [
    "EquivalenceReport",
    "FormulaCheck",
    "analytic_vs_oracle",
    "conjugation_audit",
    "formula_audit",
    "random_triple",
    "summarize",
]
