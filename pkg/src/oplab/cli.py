"""Command-line interface.

Subcommands
-----------
moments      certified moment table mu_0..mu_J
recurrence   certified recurrence/auxiliary table rows
zeros        certified zeros of P_n
verify       identity suites, JSON reports, nonzero exit on failure
asymptotics  expansion term breakdowns and remainder-slope fits
scan         one exact quantity over a t-grid

Exit codes: 0 success, 1 verification failure / property violation /
cross-check mismatch, 2 usage error, 3 precision exhausted.  Output is
deterministic: fixed 30-significant-digit decimal formatting, sorted JSON
keys, LF line endings.  The OPLAB_MAX_BITS environment variable caps every
precision escalation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass

import mpmath
from mpmath import mpf

from . import __version__
from .asymptotics import (
    LARGE_N_QUANTITIES,
    LONG_TIME_QUANTITIES,
    exact_large_n_fn,
    exact_long_time_fn,
    exact_quantity,
    fit_constants,
    large_n,
    long_time,
    remainder_slope,
)
from .errors import (
    CrossCheckMismatch,
    DomainError,
    IoError,
    OplabError,
    PrecisionExhausted,
    PropertyViolation,
    RemainderBelowNoise,
    UsageError,
)
from .identities import run_suite
from .moments import WeightParams, moment_table
from .numerics import PrecisionPolicy
from .polynomials import zeros as poly_zeros
from .recurrence import cached_table

DIGITS = 30


@dataclass
class RunConfig:
    """Parsed invocation; exactly one command."""

    command: str
    t: str = "1"
    alpha: str = "0.5"
    n: int | None = None
    n_max: int | None = None
    grid: str | None = None
    suite: str = "all"
    precision_bits: int = 128
    target_rel_err: float = 1e-30
    fmt: str = "csv"
    out: str | None = None
    epsilon: float = 0.0
    quantity: str | None = None
    mode: str = "large-n"
    slope: bool = False
    c3: float | None = None
    c0: float | None = None

    def policy(self) -> PrecisionPolicy:
        return PrecisionPolicy(
            start_bits=self.precision_bits, target_rel_err=self.target_rel_err
        )

    def params(self) -> WeightParams:
        return WeightParams(self.t, self.alpha, self.policy())


def fmt_real(x) -> str:
    """Deterministic 30-significant-digit decimal rendering."""
    return mpmath.nstr(
        x if isinstance(x, mpmath.mpf) else mpf(repr(x) if isinstance(x, float) else x),
        DIGITS,
    )


def parse_grid(spec: str, integer: bool = False):
    """start:stop:lin|log[:count] -> list of grid values (count defaults 9)."""
    parts = spec.split(":")
    if len(parts) not in (3, 4):
        raise UsageError(f"bad grid spec: {spec!r} (want start:stop:lin|log[:count])")
    start, stop, kind = parts[0], parts[1], parts[2]
    count = int(parts[3]) if len(parts) == 4 else 9
    a, b = mpf(start), mpf(stop)
    if not (b > a > 0) or count < 2:
        raise UsageError(f"bad grid spec: {spec!r}")
    if kind == "lin":
        vals = [a + (b - a) * k / (count - 1) for k in range(count)]
    elif kind == "log":
        la, lb = mpmath.ln(a), mpmath.ln(b)
        vals = [mpmath.exp(la + (lb - la) * k / (count - 1)) for k in range(count)]
    else:
        raise UsageError(f"grid spacing must be lin or log, got {kind!r}")
    if integer:
        ints = sorted({max(1, int(mpmath.nint(v))) for v in vals})
        return ints
    return vals


def emit(rows, fieldnames, cfg: RunConfig, meta: dict | None = None) -> None:
    """Write rows as CSV (header mandatory) or JSON (sorted keys, provenance
    metadata included); UTF-8, comma delimiter, LF line endings."""
    try:
        if cfg.fmt == "csv":
            buf = io.StringIO()
            writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
            text = buf.getvalue()
        else:
            payload = {"meta": meta or {}, "rows": rows}
            text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        raise IoError(f"cannot write output: {exc}") from exc


def _meta(cfg: RunConfig, **extra) -> dict:
    base = {
        "command": cfg.command,
        "t": fmt_real(mpf(cfg.t)),
        "alpha": fmt_real(mpf(cfg.alpha)),
        "precision_bits": cfg.precision_bits,
        "target_rel_err": cfg.target_rel_err,
        "version": __version__,
    }
    base.update(extra)
    return base


# ---------------------------------------------------------------------------
# Command handlers
# ---------------------------------------------------------------------------

def cmd_moments(cfg: RunConfig) -> int:
    if cfg.n_max is None:
        raise UsageError("moments needs --n-max")
    table = moment_table(cfg.n_max, cfg.params())
    rows = [
        {
            "j": j,
            "mu": fmt_real(c.value),
            "rel_err_bound": repr(c.rel_err_bound),
            "bits_used": c.bits_used,
        }
        for j, c in enumerate(table.mu)
    ]
    emit(rows, ["j", "mu", "rel_err_bound", "bits_used"], cfg, _meta(cfg))
    return 0


def cmd_recurrence(cfg: RunConfig) -> int:
    n_hi = cfg.n_max if cfg.n_max is not None else cfg.n
    if n_hi is None:
        raise UsageError("recurrence needs --n or --n-max")
    n_lo = 0 if cfg.n_max is not None else cfg.n
    table = cached_table(n_hi, cfg.params())
    rows = []
    for n in range(n_lo, n_hi + 1):
        rows.append(
            {
                "n": n,
                "alpha_n": fmt_real(table.alpha(n)),
                "beta_n": fmt_real(table.beta(n)),
                "h_n": fmt_real(table.h(n)),
                "R_n": fmt_real(table.R(n)),
                "r_n": fmt_real(table.r(n)),
                "p_n": fmt_real(table.p(n)),
                "H_n": fmt_real(table.H(n)),
            }
        )
    meta = _meta(
        cfg,
        rel_err_bound=repr(table.rel_err_bound),
        bits_used=table.bits_used,
        provenance=table.provenance,
        cross_residuals={k: repr(v) for k, v in table.cross_residuals.items()},
        low_alpha_regime=table.low_alpha,
    )
    emit(
        rows,
        ["n", "alpha_n", "beta_n", "h_n", "R_n", "r_n", "p_n", "H_n"],
        cfg,
        meta,
    )
    return 0


def cmd_zeros(cfg: RunConfig) -> int:
    if cfg.n is None:
        raise UsageError("zeros needs --n")
    zs = poly_zeros(cfg.n, cfg.params())
    rows = [
        {"k": k + 1, "x": fmt_real(z)} for k, z in enumerate(zs.zeros)
    ]
    emit(
        rows,
        ["k", "x"],
        cfg,
        _meta(cfg, n=cfg.n, rel_err_bound=repr(zs.rel_err_bound), bits_used=zs.bits_used),
    )
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    n_max = cfg.n_max if cfg.n_max is not None else 10
    t_grid = parse_grid(cfg.grid) if cfg.grid else None
    reports = run_suite(cfg.suite, n_max, cfg.params(), t_grid=t_grid, eps=cfg.epsilon)
    rows = [r.to_dict() for r in reports]
    cfg.fmt = "json"  # verification reports are structured
    emit(rows, [], cfg, _meta(cfg, suite=cfg.suite, n_max=n_max))
    return 0 if all(r.passed for r in reports) else 1


def cmd_asymptotics(cfg: RunConfig) -> int:
    if cfg.quantity is None:
        raise UsageError("asymptotics needs --quantity")
    q = cfg.quantity
    policy = cfg.policy()
    constants = (cfg.c3, cfg.c0) if (cfg.c3 is not None and cfg.c0 is not None) else None
    if cfg.slope:
        if cfg.grid is None:
            raise UsageError("--slope needs --grid")
        if cfg.mode == "large-n":
            grid = parse_grid(cfg.grid, integer=True)
            exact_fn = exact_large_n_fn(q, cfg.t, cfg.alpha, policy)
            series_kw = dict(mode="large-n", t=cfg.t, alpha=cfg.alpha, constants=constants)
            expected = {"alpha_n": -7 / 3, "Y": -7 / 3, "X": -7 / 3,
                        "quarter_sq": -7 / 3, "A": -7 / 3, "lnh": -5 / 3}.get(q, -4 / 3)
        else:
            if cfg.n is None:
                raise UsageError("long-time slope needs --n")
            grid = parse_grid(cfg.grid)
            exact_fn = exact_long_time_fn(q, cfg.n, cfg.alpha, policy)
            series_kw = dict(mode="long-time", n=cfg.n, alpha=cfg.alpha)
            expected = -3 / 2 if q in ("alpha_n", "beta_n") else -1
        try:
            fit = remainder_slope(q, exact_fn, grid, expected, **series_kw)
        except RemainderBelowNoise as exc:
            emit(
                [{"status": "pass-by-saturation", "detail": str(exc)}],
                ["status", "detail"],
                cfg,
                _meta(cfg, quantity=q, mode=cfg.mode),
            )
            return 0
        rows = [
            {
                "x": repr(v),
                "abs_diff": repr(d),
                "noise_floor": repr(f),
            }
            for v, d, f in fit.points
        ]
        emit(
            rows,
            ["x", "abs_diff", "noise_floor"],
            cfg,
            _meta(
                cfg,
                quantity=q,
                mode=cfg.mode,
                fitted_slope=fit.slope,
                expected_exponent=fit.expected_exponent,
                deviation=fit.deviation,
            ),
        )
        return 0
    if cfg.n is None:
        raise UsageError("asymptotics needs --n (or --slope with --grid)")
    if cfg.mode == "large-n":
        if q not in LARGE_N_QUANTITIES:
            raise UsageError(f"unknown large-n quantity {q!r}")
        res = large_n(q, cfg.n, cfg.t, cfg.alpha, constants)
    else:
        if q not in LONG_TIME_QUANTITIES:
            raise UsageError(f"unknown long-time quantity {q!r}")
        res = long_time(q, cfg.n, cfg.t, cfg.alpha)
    rows = res.term_rows()
    emit(
        rows,
        ["label", "coefficient", "contribution"],
        cfg,
        _meta(
            cfg,
            quantity=q,
            mode=cfg.mode,
            n=cfg.n,
            value=fmt_real(res.value),
            remainder_order=str(res.remainder_order),
            up_to_constant=res.up_to_constant,
        ),
    )
    return 0


def cmd_scan(cfg: RunConfig) -> int:
    if cfg.quantity is None or cfg.n is None or cfg.grid is None:
        raise UsageError("scan needs --quantity, --n and --grid")
    policy = cfg.policy()
    rows = []
    for tv in parse_grid(cfg.grid):
        c = exact_quantity(cfg.quantity, cfg.n, WeightParams(tv, cfg.alpha, policy))
        rows.append(
            {
                "t": fmt_real(tv),
                "value": fmt_real(c.value),
                "rel_err_bound": repr(c.rel_err_bound),
                "bits_used": c.bits_used,
            }
        )
    emit(
        rows,
        ["t", "value", "rel_err_bound", "bits_used"],
        cfg,
        _meta(cfg, quantity=cfg.quantity, n=cfg.n),
    )
    return 0


def cmd_constants(cfg: RunConfig) -> int:
    t_grid = parse_grid(cfg.grid) if cfg.grid else [mpf("0.5"), mpf(1), mpf(2)]
    fit = fit_constants(cfg.alpha, t_grid, policy=cfg.policy())
    rows = [
        {
            "t": k,
            "c3_hat": repr(float(v[0])),
            "c0_hat": repr(float(v[1])),
        }
        for k, v in fit.per_t.items()
    ]
    emit(
        rows,
        ["t", "c3_hat", "c0_hat"],
        cfg,
        _meta(
            cfg,
            c3_hat=fit.c3_hat,
            c0_hat=fit.c0_hat,
            c3_spread=fit.c3_spread,
            c0_spread=fit.c0_spread,
            c3_tilde_shift=fit.c3_tilde_diff,
            c0_tilde_shift=fit.c0_tilde_diff,
        ),
    )
    return 0


HANDLERS = {
    "moments": cmd_moments,
    "recurrence": cmd_recurrence,
    "zeros": cmd_zeros,
    "verify": cmd_verify,
    "asymptotics": cmd_asymptotics,
    "scan": cmd_scan,
    "constants": cmd_constants,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oplab",
        description="High-precision computations and identity verification for "
        "orthogonal polynomials with the weight x^alpha exp(-x - t/x).",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--t", default="1", help="perturbation strength t >= 0")
        p.add_argument("--alpha", default="0.5", help="Laguerre exponent alpha > -1")
        p.add_argument("--precision-bits", type=int, default=128)
        p.add_argument("--target-rel-err", type=float, default=1e-30)
        p.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")
        p.add_argument("--out", default=None, help="output path (default stdout)")

    p = sub.add_parser("moments", help="certified moment table")
    common(p)
    p.add_argument("--n-max", type=int, required=True, help="highest moment index J")

    p = sub.add_parser("recurrence", help="recurrence and auxiliary table")
    common(p)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--n-max", type=int, default=None)

    p = sub.add_parser("zeros", help="zeros of P_n")
    common(p)
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("verify", help="identity verification suites")
    common(p)
    p.add_argument(
        "--suite",
        choices=["s-relations", "discrete", "toda", "painleve", "sigma",
                 "zeros", "structural", "all"],
        default="all",
    )
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--grid", default=None, help="t-grid start:stop:lin|log[:count]")
    p.add_argument("--epsilon", type=float, default=0.0, help="zero-bound epsilon")

    p = sub.add_parser("asymptotics", help="expansions and remainder slopes")
    common(p)
    p.add_argument("--quantity", required=True)
    p.add_argument("--mode", choices=["large-n", "long-time"], default="large-n")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--grid", default=None)
    p.add_argument("--slope", action="store_true")
    p.add_argument("--c3", type=float, default=None, help="fitted c3_hat constant")
    p.add_argument("--c0", type=float, default=None, help="fitted c0_hat constant")

    p = sub.add_parser("scan", help="exact quantity over a t-grid")
    common(p)
    p.add_argument("--quantity", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grid", required=True)

    p = sub.add_parser("constants", help="fit the period-1 Hankel constants")
    common(p)
    p.add_argument("--grid", default=None, help="t-grid (default 0.5,1,2)")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    cfg = RunConfig(
        command=ns.command,
        t=ns.t,
        alpha=ns.alpha,
        n=getattr(ns, "n", None),
        n_max=getattr(ns, "n_max", None),
        grid=getattr(ns, "grid", None),
        suite=getattr(ns, "suite", "all"),
        precision_bits=ns.precision_bits,
        target_rel_err=ns.target_rel_err,
        fmt=ns.fmt,
        out=ns.out,
        epsilon=getattr(ns, "epsilon", 0.0),
        quantity=getattr(ns, "quantity", None),
        mode=getattr(ns, "mode", "large-n"),
        slope=getattr(ns, "slope", False),
        c3=getattr(ns, "c3", None),
        c0=getattr(ns, "c0", None),
    )
    try:
        return HANDLERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (PropertyViolation, CrossCheckMismatch) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 1
    except PrecisionExhausted as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return 3
    except (DomainError, IoError, OplabError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
