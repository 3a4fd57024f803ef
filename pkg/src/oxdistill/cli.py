"""``distill`` command line.

    distill trace|yield|audit|step [--initial CX,CY,CZ | --binary F | --werner T]
                                   [--variants ox1,ox2] [--p P] [--max-iter N] [--out PATH]

Triples are target-frame coefficients: ``(1, 1, 1)`` is the ideal pair and the
fidelity is ``(1 + cx + cy + cz)/4``.  ``--werner T`` is the isotropic state
``(T, T, T)``.  A JSON config file (``--config``) may hold the same keys as the
long flags (dashes or underscores); flags on the command line win.

Exit codes: 0 success, 1 usage error, 2 internal consistency failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bell import DomainError
from .experiments import RunConfig, StateSpec, run_audit, run_step, run_trace, run_yield
from .protocol import AlwaysDiscardedError, Variant

EXIT_OK, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2
STATE_KEYS = ("initial", "binary", "werner")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _triple(text: str) -> StateSpec:
    if text.strip().lower() == "ideal":
        return StateSpec("ideal")
    parts = [p for p in text.split(",")]
    if len(parts) != 3:
        raise UsageError(f"expected three comma-separated numbers, got {text!r}")
    try:
        return StateSpec("triple", tuple(float(p) for p in parts))
    except ValueError:
        raise UsageError(f"not a number in {text!r}") from None


def _variants(text) -> tuple[Variant, ...]:
    items = text if isinstance(text, list) else str(text).split(",")
    try:
        return tuple(Variant(v.strip().lower()) for v in items if v.strip())
    except ValueError:
        raise UsageError(f"variants must be ox1 and/or ox2, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="distill", description="Bell-diagonal entanglement purification experiments.")
    parser.add_argument("command", choices=("trace", "yield", "audit", "step"))
    parser.add_argument("--config", help="JSON file with default option values")
    state = parser.add_argument_group("initial state (pick one)")
    state.add_argument("--initial", help="target-frame triple CX,CY,CZ or 'ideal'")
    state.add_argument("--binary", type=float, help="binary state weight f in (0, 1]")
    state.add_argument("--werner", type=float, help="isotropic state (T, T, T), -1/3 <= T <= 1")
    parser.add_argument("--partner", help="second pair for 'step' (target-frame triple); default: copy of the first")
    parser.add_argument("--variants", help="comma list of ox1, ox2 (default: ox1,ox2)")
    parser.add_argument("--p", type=float, help="reliability of local operations (default 1)")
    parser.add_argument("--noise", choices=("transmission", "gate", "both"),
                        help="where the noise acts (default transmission)")
    parser.add_argument("--ox1-rotation", choices=("after", "before"),
                        help="place U12x after each measurement (default) or before each BCNOT")
    parser.add_argument("--max-iter", type=int, help="maximum rounds (default 30)")
    parser.add_argument("--fidelity0", type=float, help="yield: starting fidelity when no state is given (default 0.62)")
    parser.add_argument("--family", choices=("werner", "binary"), help="yield: state family for --fidelity0 (default werner)")
    parser.add_argument("--samples", type=int, help="audit: random pairs for the analytic/oracle check (default 200)")
    parser.add_argument("--precision", type=int, help="significant digits in output (>= 6, default 12)")
    parser.add_argument("--out", help="write CSV here instead of stdout")
    return parser


_OPTION_KEYS = (
    "initial", "binary", "werner", "partner", "variants", "p", "noise", "ox1_rotation",
    "max_iter", "fidelity0", "family", "samples", "precision", "out",
)


def _load_config(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    out = {}
    for key, value in data.items():
        k = key.replace("-", "_")
        if k not in _OPTION_KEYS:
            raise UsageError(f"unknown config key {key!r}")
        out[k] = value
    return out


def resolve(args: argparse.Namespace) -> tuple[RunConfig, str | None]:
    opts = {k: getattr(args, k) for k in _OPTION_KEYS}
    file_opts = _load_config(args.config) if args.config else {}
    cli_state = any(opts[k] is not None for k in STATE_KEYS)
    for k, v in file_opts.items():
        if k in STATE_KEYS and cli_state:
            continue
        if opts[k] is None:
            opts[k] = v

    given = [k for k in STATE_KEYS if opts[k] is not None]
    if len(given) > 1:
        raise UsageError(f"give exactly one initial state, got {', '.join('--' + g for g in given)}")
    initial = None
    if given == ["initial"]:
        initial = _triple(str(opts["initial"]))
    elif given == ["binary"]:
        initial = StateSpec("binary", (float(opts["binary"]),))
    elif given == ["werner"]:
        initial = StateSpec("werner", (float(opts["werner"]),))

    kwargs = dict(command=args.command, initial=initial)
    if opts["partner"] is not None:
        kwargs["partner"] = _triple(str(opts["partner"]))
    if opts["variants"] is not None:
        kwargs["variants"] = _variants(opts["variants"])
        if not kwargs["variants"]:
            raise UsageError("no variants selected")
    for key in ("p", "fidelity0"):
        if opts[key] is not None:
            kwargs[key] = float(opts[key])
    for key in ("max_iter", "samples", "precision"):
        if opts[key] is not None:
            kwargs[key] = int(opts[key])
    for key in ("noise", "ox1_rotation", "family"):
        if opts[key] is not None:
            kwargs[key] = str(opts[key])
    try:
        cfg = RunConfig(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return cfg, opts["out"]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, out = resolve(args)
        if cfg.command == "audit":
            res = run_audit(cfg)
            sys.stdout.write(res.text)
            if out:
                Path(out).write_text(res.csv)
            if res.exit_code:
                sys.stderr.write("distill: analytic step disagrees with the oracle\n")
            return res.exit_code
        runner = {"trace": run_trace, "yield": run_yield, "step": run_step}[cfg.command]
        _emit(runner(cfg), out)
    except (UsageError, DomainError, ValueError, AlwaysDiscardedError) as exc:
        sys.stderr.write(f"distill: error: {exc}\n")
        return EXIT_USAGE
    return EXIT_OK


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
