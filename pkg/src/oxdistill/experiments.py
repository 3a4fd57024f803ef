"""Experiment drivers behind the ``distill`` command.

Each ``run_*`` function takes a :class:`RunConfig` and returns the full text
it would write, so output can be compared byte for byte.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

from . import __version__
from .audit import analytic_vs_oracle, conjugation_audit, formula_audit, summarize
from .bell import (
    IDEAL,
    CorrelationTriple,
    degree_of_separability,
    fidelity,
    make_binary,
    make_isotropic,
)
from .oracle import format_term, oracle_step
from .protocol import (
    NoiseModel,
    StopRule,
    Variant,
    analytic_step,
    iterate,
    pair_cost,
)

TRACE_COLUMNS = (
    "iteration", "variant", "p", "cx", "cy", "cz", "fidelity", "separability",
    "step_probability", "cumulative_cost", "status",
)
YIELD_COLUMNS = (
    "variant", "iteration", "fidelity", "pairs_needed", "log10_pairs", "log10_one_minus_F",
)
STEP_COLUMNS = (
    "variant", "p", "noise", "cx", "cy", "cz", "fidelity", "separability",
    "success_probability", "oracle_max_error",
)
AUDIT_TABLE_COLUMNS = ("source", "target", "computed", "quoted", "agrees")
AUDIT_FORMULA_COLUMNS = ("formula", "channel", "points", "agree", "max_abs_diff")


def fmt(x: Optional[float], digits: int = 12) -> str:
    """Fixed notation for 1e-4 <= |x| < 1e6 (and beyond, up to 1e12); ``g`` style
    exponent otherwise.  ``None`` renders as an empty field."""
    if x is None:
        return ""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0"
    return format(x, f".{digits}g")


@dataclass(frozen=True)
class StateSpec:
    kind: str  # "triple" | "binary" | "werner" | "ideal"
    value: tuple[float, ...] = ()

    def build(self) -> CorrelationTriple:
        if self.kind == "ideal":
            return IDEAL
        if self.kind == "triple":
            return CorrelationTriple.from_target_frame(*self.value)
        if self.kind == "binary":
            return make_binary(self.value[0])
        if self.kind == "werner":
            t = self.value[0]
            return make_isotropic((1 + 3 * t) / 4)
        raise ValueError(f"unknown state kind {self.kind!r}")

    def describe(self) -> str:
        if self.kind == "ideal":
            return "ideal"
        return f"{self.kind}:" + ",".join(repr(v) for v in self.value)


@dataclass(frozen=True)
class RunConfig:
    command: str
    initial: Optional[StateSpec] = None
    partner: Optional[StateSpec] = None
    variants: tuple[Variant, ...] = (Variant.OX1, Variant.OX2)
    p: float = 1.0
    noise: str = "transmission"
    ox1_rotation: str = "after"
    max_iter: int = 30
    precision: int = 12
    fidelity0: float = 0.62
    family: str = "werner"
    samples: int = 200

    def __post_init__(self):
        if self.precision < 6:
            raise ValueError("precision must be at least 6 significant digits")
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p={self.p} outside (0, 1]")
        if self.max_iter < 0:
            raise ValueError("max-iter must be >= 0")

    @property
    def noise_model(self) -> NoiseModel:
        return NoiseModel(self.p, self.noise)

    def header(self) -> list[str]:
        items = {
            "command": self.command,
            "variants": ",".join(v.value for v in self.variants),
            "p": repr(self.p),
            "noise": self.noise,
            "ox1_rotation": self.ox1_rotation,
            "max_iter": str(self.max_iter),
            "precision": str(self.precision),
        }
        if self.initial is not None:
            items["initial"] = self.initial.describe()
        if self.partner is not None:
            items["partner"] = self.partner.describe()
        if self.command == "yield" and self.initial is None:
            items["fidelity0"] = repr(self.fidelity0)
            items["family"] = self.family
        lines = [f"# distill {self.command}", f"# version {__version__}"]
        lines += [f"# {k}={v}" for k, v in sorted(items.items())]
        return lines


def _csv(header_lines: list[str], columns, rows) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def _traces(cfg: RunConfig, initial: CorrelationTriple):
    stop = StopRule(max_iterations=cfg.max_iter)
    return [
        iterate(initial, v, cfg.noise_model, stop, ox1_rotation=cfg.ox1_rotation)
        for v in cfg.variants
    ]


def run_trace(cfg: RunConfig) -> str:
    if cfg.initial is None:
        raise ValueError("trace needs an initial state (--initial, --binary or --werner)")
    d = cfg.precision
    rows = []
    header = cfg.header()
    for tr in _traces(cfg, cfg.initial.build()):
        header.append(f"# {tr.variant.value} status={tr.status}")
        for r in tr.records:
            cx, cy, cz = r.state.target
            status = "not_purifiable" if tr.status == "not_purifiable" else r.status
            rows.append([
                r.iteration, tr.variant.value, fmt(cfg.p, d), fmt(cx, d), fmt(cy, d), fmt(cz, d),
                fmt(r.fidelity, d), fmt(r.separability, d), fmt(r.step_probability, d),
                fmt(r.cumulative_cost, d), status,
            ])
    return _csv(header, TRACE_COLUMNS, rows)


def yield_initial(cfg: RunConfig) -> CorrelationTriple:
    if cfg.initial is not None:
        return cfg.initial.build()
    if cfg.family == "werner":
        return make_isotropic(cfg.fidelity0)
    if cfg.family == "binary":
        return make_binary(cfg.fidelity0)
    raise ValueError(f"unknown family {cfg.family!r}")


def run_yield(cfg: RunConfig) -> str:
    d = cfg.precision
    rows = []
    header = cfg.header()
    for tr in _traces(cfg, yield_initial(cfg)):
        header.append(f"# {tr.variant.value} status={tr.status}")
        for k, (f, cost) in enumerate(pair_cost(tr)):
            gap = max(1.0 - f, 0.0)
            rows.append([
                tr.variant.value, k, fmt(f, d), fmt(cost, d), fmt(math.log10(cost), d),
                fmt(math.log10(gap) if gap > 0 else -math.inf, d),
            ])
    return _csv(header, YIELD_COLUMNS, rows)


def run_step(cfg: RunConfig) -> str:
    if cfg.initial is None:
        raise ValueError("step needs an initial state (--initial, --binary or --werner)")
    d = cfg.precision
    s1 = cfg.initial.build()
    s2 = cfg.partner.build() if cfg.partner is not None else s1
    header = cfg.header()
    rows = []
    for v in cfg.variants:
        res = analytic_step(s1, s2, v, cfg.noise_model)
        ref = oracle_step(s1, s2, v, cfg.noise_model)
        err = max(
            max(abs(a - b) for a, b in zip(res.output.as_tuple(), ref.output.as_tuple())),
            abs(res.success_probability - ref.success_probability),
        )
        cx, cy, cz = res.output.target
        f = fidelity(res.output)
        s = degree_of_separability(res.output)
        header.append(
            f"# {v.value}: output (cx, cy, cz) = ({fmt(cx, d)}, {fmt(cy, d)}, {fmt(cz, d)}), "
            f"F = {fmt(f, d)}, S = {fmt(s, d)}, N = {fmt(res.success_probability, d)}"
        )
        rows.append([
            v.value, fmt(cfg.p, d), cfg.noise, fmt(cx, d), fmt(cy, d), fmt(cz, d),
            fmt(f, d), fmt(s, d), fmt(res.success_probability, d), fmt(err, 3),
        ])
    return _csv(header, STEP_COLUMNS, rows)


@dataclass(frozen=True)
class AuditResult:
    text: str
    csv: str
    exit_code: int


def run_audit(cfg: RunConfig) -> AuditResult:
    d = cfg.precision
    eq = analytic_vs_oracle(samples=cfg.samples)
    table = conjugation_audit()
    formulas = summarize(formula_audit())

    lines = [f"distill audit (version {__version__})", ""]
    lines.append("analytic == oracle")
    lines.append(
        f"  cases={eq.cases} discarded={eq.discarded} "
        f"max_state_error={fmt(eq.max_state_error, 3)} "
        f"max_probability_error={fmt(eq.max_probability_error, 3)} "
        f"-> {'PASS' if eq.ok else 'FAIL'}"
    )
    lines.append("")
    n_agree = sum(e.agrees for e in table)
    lines.append(f"single-side CNOT conjugation table: {n_agree}/{len(table)} cells agree with the quoted table")
    for e in table:
        mark = "agree" if e.agrees else "DIFFER"
        lines.append(
            f"  ({e.source}, {e.target}) -> {format_term(*e.computed):<14} quoted {format_term(*e.quoted):<14} {mark}"
        )
    lines.append("")
    lines.append("quoted closed forms vs simulation (findings, not failures)")
    for name, ch, n, ok, worst in formulas:
        lines.append(f"  {name:<42} {ch:<12} {ok:>3}/{n:<3} max|diff|={fmt(worst, 3)}")
    text = "\n".join(lines) + "\n"

    buf = io.StringIO()
    for line in cfg.header():
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    buf.write("# section=analytic_vs_oracle\n")
    w.writerow(("cases", "discarded", "max_state_error", "max_probability_error", "pass"))
    w.writerow((eq.cases, eq.discarded, fmt(eq.max_state_error, d),
                fmt(eq.max_probability_error, d), int(eq.ok)))
    buf.write("# section=conjugation_table\n")
    w.writerow(AUDIT_TABLE_COLUMNS)
    for e in table:
        w.writerow((e.source, e.target, format_term(*e.computed), format_term(*e.quoted), int(e.agrees)))
    buf.write("# section=formula_audit\n")
    w.writerow(AUDIT_FORMULA_COLUMNS)
    for name, ch, n, ok, worst in formulas:
        w.writerow((name, ch, n, ok, fmt(worst, d)))
    return AuditResult(text, buf.getvalue(), 0 if eq.ok else 2)
