"""Residual verification of the scalar identities and differential equations
linking the recurrence coefficients, the auxiliary quantities, the sub-leading
coefficient and H_n = t d/dt ln D_n: the ladder-compatibility relations, the
first-order discrete system, the Toda-type differential-difference system,
the Painleve III' equation for R_n and the second-order equation for H_n with
its sigma-form.

Residuals are always reported relative to the largest monomial magnitude in
the identity being checked: the terms grow like n^2 t, so absolute residuals
are meaningless across scales.  Algebraic identities are expected to pass at
100x the certification target; derivative-based ones at a looser documented
tolerance reflecting the difference stencils.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath
from mpmath import mp, mpf

from .errors import DivisionHazard, DomainError
from .hankel import get_engine
from .moments import WeightParams
from .numerics import PrecisionPolicy, rel_diff, t_derivative
from .polynomials import structural_residuals, zero_properties
from .recurrence import RecurrenceTable, cached_table

DERIVATIVE_START_BITS = 256  # stencil evaluations then run at 512-bit inner precision


@dataclass
class VerificationReport:
    """Outcome of one identity suite at one parameter set."""

    identity_name: str
    meta: dict = field(default_factory=dict)
    max_rel_residual: float = 0.0
    tolerance: float = 0.0
    passed: bool = False
    details: list = field(default_factory=list)
    flags: dict = field(default_factory=dict)

    def finalize(self):
        self.passed = self.max_rel_residual <= self.tolerance
        return self

    def to_dict(self) -> dict:
        return {
            "identity_name": self.identity_name,
            "meta": self.meta,
            "max_rel_residual": self.max_rel_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "details": self.details,
            "flags": self.flags,
        }


def _meta(params: WeightParams, **extra) -> dict:
    out = {
        "t": mpmath.nstr(params.t, 17),
        "alpha": mpmath.nstr(params.alpha, 17),
        "low_alpha_regime": params.low_alpha,
    }
    out.update(extra)
    return out


def _scaled(residual_terms) -> mpmath.mpf:
    """|sum of terms| / max |term|, zero when every term vanishes."""
    scale = max(abs(u) for u in residual_terms)
    if scale == 0:
        return mp.zero
    return abs(sum(residual_terms)) / scale


def painleve3_parameters(n: int, alpha):
    """(alpha~, beta~, gamma~, delta~) of the Painleve III' equation for R_n."""
    return (4 * (2 * n + 1 + alpha), 4 * alpha, mpf(4), mpf(-4))


def sigma_parameters(n: int, alpha):
    """(theta_0, theta_inf) of the sigma-form; the choice is not unique (the
    equation is symmetric) and only this stated pair is verified."""
    return (alpha, -2 * n - alpha)


# ---------------------------------------------------------------------------
# Algebraic suites
# ---------------------------------------------------------------------------

def verify_s_relations(
    n_max: int, params: WeightParams, tolerance: float | None = None
) -> VerificationReport:
    """The seven ladder-compatibility relations for 1 <= n <= n_max:

        R_n - alpha_n + 2n + 1 + alpha = 0
        r_n + r_{n+1} = t - alpha_n R_n
        r_n^2 - t r_n = beta_n R_n R_{n-1}
        n t - (2n+alpha) r_n = beta_n (R_n + R_{n-1})
        n(n+alpha) + r_n + sum_{j<n} R_j = beta_n
        r_{n+1} - r_n + alpha_n = beta_{n+1} - beta_n
        p(n, t) = r_n - beta_n
    """
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    table = cached_table(n_max + 1, params)
    tol = tolerance if tolerance is not None else 100 * params.policy.target_rel_err
    tol = max(tol, 10 * table.rel_err_bound)
    rep = VerificationReport(
        "s-relations", _meta(params, n_range=[1, n_max]), tolerance=tol
    )
    worst = mp.zero
    t, alpha = params.t, params.alpha
    with mp.workprec(table.bits_used):
        Rsum = table.R(0)
        for n in range(1, n_max + 1):
            a_n, b_n, b_n1 = table.alpha(n), table.beta(n), table.beta(n + 1)
            R_n, R_nm1 = table.R(n), table.R(n - 1)
            r_n, r_n1 = table.r(n), table.r(n + 1) if n + 1 <= table.N else None
            res = {
                "ladder_R": _scaled([R_n, -a_n, mpf(2 * n + 1) + alpha]),
                "ladder_rr": _scaled([r_n, r_n1, -t, a_n * R_n]),
                "ladder_quadratic": _scaled(
                    [r_n * r_n, -t * r_n, -b_n * R_n * R_nm1]
                ),
                "ladder_linear": _scaled(
                    [n * t, -(2 * n + alpha) * r_n, -b_n * R_n, -b_n * R_nm1]
                ),
                "sum_rule": _scaled([n * (n + alpha), r_n, Rsum, -b_n]),
                "difference": _scaled([r_n1, -r_n, a_n, -b_n1, b_n]),
                "p_equals_r_minus_beta": _scaled([table.p(n), -r_n, b_n]),
            }
            Rsum += R_n
            worst_n = max(res.values())
            rep.details.append(
                {"n": n, **{k: float(v) for k, v in res.items()}}
            )
            if worst_n > worst:
                worst = worst_n
    rep.max_rel_residual = float(worst)
    rep.flags["painleve3_parameter_audit"] = [
        mpmath.nstr(v, 17) for v in painleve3_parameters(n_max, params.alpha)
    ]
    return rep.finalize()


def verify_discrete_system(
    n_max: int, params: WeightParams, tolerance: float | None = None
) -> VerificationReport:
    """The first-order discrete system for the recurrence coefficients:

        alpha t + 2 beta_n (alpha_n + alpha_{n-1})
            + (2n+alpha)[alpha_n(2n+2+alpha-alpha_n) - 3 beta_n - beta_{n+1}] = 0

        [nt - beta_n s_n][(n+alpha) t + beta_n s_n]
            + (2n+alpha)^2 beta_n (alpha_n - 2n-1-alpha)(alpha_{n-1} - 2n+1-alpha) = 0

    with s_n = alpha_n + alpha_{n-1} - 4n - 2 alpha.  Residuals are scaled by
    the largest monomial after expanding the bracket product.
    """
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    table = cached_table(n_max + 1, params)
    tol = tolerance if tolerance is not None else 100 * params.policy.target_rel_err
    tol = max(tol, 10 * table.rel_err_bound)
    rep = VerificationReport(
        "discrete-system", _meta(params, n_range=[1, n_max]), tolerance=tol
    )
    worst = mp.zero
    t, alpha = params.t, params.alpha
    with mp.workprec(table.bits_used):
        for n in range(1, n_max + 1):
            a_n, a_m = table.alpha(n), table.alpha(n - 1)
            b_n, b_p = table.beta(n), table.beta(n + 1)
            m = 2 * n + alpha
            eq1 = _scaled(
                [
                    alpha * t,
                    2 * b_n * a_n,
                    2 * b_n * a_m,
                    m * a_n * (2 * n + 2 + alpha),
                    -m * a_n * a_n,
                    -3 * m * b_n,
                    -m * b_p,
                ]
            )
            s = a_n + a_m - 4 * n - 2 * alpha
            eq2 = _scaled(
                [
                    n * t * (n + alpha) * t,
                    n * t * b_n * s,
                    -b_n * s * (n + alpha) * t,
                    -(b_n * s) ** 2,
                    m * m * b_n * (a_n - 2 * n - 1 - alpha) * (a_m - 2 * n + 1 - alpha),
                ]
            )
            rep.details.append({"n": n, "eq1": float(eq1), "eq2": float(eq2)})
            worst = max(worst, eq1, eq2)
    rep.max_rel_residual = float(worst)
    return rep.finalize()


# ---------------------------------------------------------------------------
# Derivative machinery shared by the differential suites
# ---------------------------------------------------------------------------

def _deriv_policy(params: WeightParams) -> PrecisionPolicy:
    pol = params.policy
    return PrecisionPolicy(
        max(DERIVATIVE_START_BITS, pol.start_bits), pol.max_bits, pol.target_rel_err
    )


def _alpha_beta_at(params: WeightParams, N: int):
    """Raw (alpha, beta) lists at the ambient precision for the given t."""
    eng = get_engine(params)
    return eng.chebyshev(N, mp.prec)[:2]


def _tables_fn(params: WeightParams, N: int):
    """tv -> raw (alpha list, beta list) honouring the ambient precision."""

    def build(tv):
        p = WeightParams(tv, params.alpha, params.policy)
        return _alpha_beta_at(p, N)

    return build


def verify_toda(
    n_max: int, params: WeightParams, tolerance: float = 1e-12
) -> VerificationReport:
    """The Toda-type system and its auxiliary-variable variants:

        t alpha_n' = alpha_n + beta_n - beta_{n+1}     (= r_n - r_{n+1})
        t beta_n'  = beta_n (alpha_{n-1} - alpha_n + 2)  (= beta_n (R_{n-1}-R_n))

    Left sides use Richardson-extrapolated central stencils with inner
    evaluations at twice the working precision; right sides are algebraic
    values from the certified table.
    """
    if not params.t > 0:
        raise DomainError("the Toda system needs t > 0")
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    table = cached_table(n_max + 1, params)
    t, alpha = params.t, params.alpha
    N = n_max + 1
    pol = _deriv_policy(params)
    build = _tables_fn(params, N)

    worst = mp.zero
    rep = VerificationReport(
        "toda", _meta(params, n_range=[1, n_max]), tolerance=tolerance
    )
    propagated = table.rel_err_bound
    for n in range(1, n_max + 1):
        da = t_derivative(lambda tv, k=n: build(tv)[0][k], t, 1, pol)
        db = t_derivative(lambda tv, k=n: build(tv)[1][k], t, 1, pol)
        propagated = max(propagated, da.rel_err_bound, db.rel_err_bound)
        with mp.workprec(table.bits_used):
            a_n, a_m = table.alpha(n), table.alpha(n - 1)
            b_n, b_p = table.beta(n), table.beta(n + 1)
            lhs_a, lhs_b = t * da.value, t * db.value
            res = {
                "alpha_toda": _scaled([lhs_a, -a_n, -b_n, b_p]),
                "alpha_variant": _scaled([lhs_a, -table.r(n), table.r(n + 1)]),
                "beta_toda": _scaled(
                    [lhs_b, -b_n * a_m, b_n * a_n, -2 * b_n]
                ),
                "beta_variant": _scaled(
                    [lhs_b, -b_n * table.R(n - 1), b_n * table.R(n)]
                ),
            }
        rep.details.append({"n": n, **{k: float(v) for k, v in res.items()}})
        worst = max(worst, *res.values())
    rep.max_rel_residual = float(worst)
    rep.tolerance = max(tolerance, 10 * propagated)
    return rep.finalize()


def verify_painleve3(
    n: int, t_grid, params: WeightParams, tolerance: float = 1e-8
) -> VerificationReport:
    """The Painleve III' equation satisfied by R_n(t) = alpha_n - (2n+1+alpha):

        R'' = R'^2/R - R'/t + (at R^2 + gt R^3)/(4 t^2) + bt/(4t) + dt/(4R)

    with (at, bt, gt, dt) = (4(2n+1+alpha), 4 alpha, 4, -4).  Grid points where
    R_n is below the precision-dependent floor are skipped and recorded.
    """
    pol = _deriv_policy(params)
    at, bt, gt, dt = painleve3_parameters(n, params.alpha)
    rep = VerificationReport(
        "painleve3",
        _meta(params, n=n, t_grid=[mpmath.nstr(mpf(tv), 12) for tv in t_grid]),
        tolerance=tolerance,
    )
    rep.flags["parameters"] = {
        "alpha~": mpmath.nstr(at, 17),
        "beta~": mpmath.nstr(bt, 17),
        "gamma~": mpmath.nstr(gt, 17),
        "delta~": mpmath.nstr(dt, 17),
    }
    worst = mp.zero
    skipped = []
    propagated = 0.0
    for tv in t_grid:
        tv = mpf(tv) if not isinstance(tv, mpmath.mpf) else tv
        pt = WeightParams(tv, params.alpha, params.policy)
        table = cached_table(n + 1, pt)
        R = table.R(n)
        with mp.workprec(table.bits_used):
            if abs(R) < mpf(2) ** (-(table.bits_used // 2)):
                skipped.append(
                    {"t": mpmath.nstr(tv, 12), "reason": "R_n below division floor"}
                )
                continue
        build = _tables_fn(pt, n + 1)

        def R_of(tv2, k=n):
            al, _ = build(tv2)
            return al[k] - (2 * k + 1 + params.alpha)

        d1 = t_derivative(R_of, tv, 1, pol)
        d2 = t_derivative(R_of, tv, 2, pol)
        propagated = max(
            propagated, d1.rel_err_bound, d2.rel_err_bound, table.rel_err_bound
        )
        with mp.workprec(table.bits_used):
            res = _scaled(
                [
                    d2.value,
                    -d1.value ** 2 / R,
                    d1.value / tv,
                    -(at * R ** 2 + gt * R ** 3) / (4 * tv ** 2),
                    -bt / (4 * tv),
                    -dt / (4 * R),
                ]
            )
        rep.details.append({"t": mpmath.nstr(tv, 12), "residual": float(res)})
        worst = max(worst, res)
    rep.max_rel_residual = float(worst)
    if skipped:
        rep.flags["skipped"] = skipped
        if not rep.details:
            rep.flags["all_points_skipped"] = True
    rep.tolerance = max(tolerance, 10 * propagated)
    return rep.finalize()


def verify_sigma_form(
    n: int, t_grid, params: WeightParams, tolerance: float = 1e-8
) -> VerificationReport:
    """The second-order equation for H_n and its sigma-form.

    On the t-grid:  (t H'')^2 = [n - (2n+alpha) H']^2
                                - 4 [n(n+alpha) + t H' - H] H' (H' - 1).

    On s = sqrt(t):  H_n = (sigma_n(s) + s^2 + n(n+alpha))/2 turns the same
    equation into the sigma-form of Painleve III with
    (theta_0, theta_inf) = (alpha, -2n-alpha); sigma derivatives follow from
    the chain rule sigma' = 2s(2H'-1), sigma'' = 2(2H'-1) + 8 t H''.
    """
    pol = _deriv_policy(params)
    th0, thi = sigma_parameters(n, params.alpha)
    rep = VerificationReport(
        "sigma-form",
        _meta(params, n=n, t_grid=[mpmath.nstr(mpf(tv), 12) for tv in t_grid]),
        tolerance=tolerance,
    )
    rep.flags["parameters"] = {
        "theta_0": mpmath.nstr(th0, 17),
        "theta_inf": mpmath.nstr(thi, 17),
        "note": "parameter choice is not unique (symmetric form); only the stated pair is tested",
    }
    alpha = params.alpha
    worst = mp.zero
    propagated = 0.0
    for tv in t_grid:
        tv = mpf(tv) if not isinstance(tv, mpmath.mpf) else tv
        pt = WeightParams(tv, alpha, params.policy)
        table = cached_table(n, pt)
        H = table.H(n)

        def H_of(tv2, k=n):
            p2 = WeightParams(tv2, alpha, params.policy)
            eng = get_engine(p2)
            return k * (k + alpha) + eng.subleading_sequence(k, mp.prec)[k]

        d1 = t_derivative(H_of, tv, 1, pol)
        d2 = t_derivative(H_of, tv, 2, pol)
        propagated = max(
            propagated, d1.rel_err_bound, d2.rel_err_bound, table.rel_err_bound
        )
        with mp.workprec(table.bits_used):
            H1, H2 = d1.value, d2.value
            lhs = (tv * H2) ** 2
            rhs1 = (n - (2 * n + alpha) * H1) ** 2
            rhs2 = -4 * (n * (n + alpha) + tv * H1 - H) * H1 * (H1 - 1)
            res_t = _scaled([lhs, -rhs1, -rhs2])

            s = mpmath.sqrt(tv)
            sig = 2 * H - tv - n * (n + alpha)
            dsig = 2 * s * (2 * H1 - 1)
            d2sig = 2 * (2 * H1 - 1) + 8 * tv * H2
            lhs_s = (s * d2sig - dsig) ** 2
            r1 = 4 * (2 * sig - s * dsig) * (dsig ** 2 - 4 * s * s)
            r2 = 2 * (th0 ** 2 + thi ** 2) * (dsig ** 2 + 4 * s * s)
            r3 = -16 * th0 * thi * s * dsig
            res_s = _scaled([lhs_s, -r1, -r2, -r3])
        rep.details.append(
            {
                "t": mpmath.nstr(tv, 12),
                "tH''_eq_residual": float(res_t),
                "sigma_form_residual": float(res_s),
            }
        )
        worst = max(worst, res_t, res_s)
    rep.max_rel_residual = float(worst)
    rep.tolerance = max(tolerance, 10 * propagated)
    return rep.finalize()


# ---------------------------------------------------------------------------
# Suite registry (shared by the CLI and the acceptance tests)
# ---------------------------------------------------------------------------

def verify_zero_theorems(
    n_max: int, params: WeightParams, eps=0
) -> VerificationReport:
    """zero_properties for every 2 <= n <= n_max; worst margin reported.

    The residual convention is -min(margin): nonpositive iff every check holds
    with a strictly positive margin.  At n = 2 with eps = 0 the chain-sequence
    outer bounds are algebraically sharp (a_2 and b_2 coincide with the two
    zeros of P_2), so those two margins are excluded there and reported
    separately as sharp equalities.
    """
    if n_max < 2:
        raise DomainError("zero theorem suite needs n_max >= 2")
    rep = VerificationReport(
        "zero-theorems", _meta(params, n_range=[2, n_max], eps=float(eps))
    )
    worst_margin = None
    for n in range(2, n_max + 1):
        r = zero_properties(n, params, eps=eps, raise_on_violation=False)
        if r.sharp:
            rep.flags[f"n{n}_sharp_outer_bounds"] = {
                k: float(v) for k, v in r.sharp.items()
            }
        m = min(r.items.values())
        rep.details.append(r.to_dict())
        worst_margin = m if worst_margin is None else min(worst_margin, m)
    rep.max_rel_residual = float(-worst_margin)
    rep.tolerance = 0.0
    return rep.finalize()


def verify_structural(
    n_max: int, params: WeightParams, tolerance: float | None = None
) -> VerificationReport:
    """Mixed three-term recurrence and both Christoffel-Darboux forms at a
    fixed point pair for every 2 <= n <= n_max."""
    if n_max < 2:
        raise DomainError("structural suite needs n_max >= 2")
    tol = tolerance if tolerance is not None else 100 * params.policy.target_rel_err
    rep = VerificationReport(
        "structural", _meta(params, n_range=[2, n_max]), tolerance=tol
    )
    worst = mp.zero
    x, y = mpf("1.3"), mpf("2.6")
    for n in range(2, n_max + 1):
        mixed, cd, cdc = structural_residuals(n, x, y, params)
        rep.details.append(
            {
                "n": n,
                "mixed_recurrence": float(mixed.value),
                "christoffel_darboux": float(cd.value),
                "christoffel_darboux_confluent": float(cdc.value),
            }
        )
        worst = max(worst, mixed.value, cd.value, cdc.value)
    rep.max_rel_residual = float(worst)
    return rep.finalize()


def run_suite(name: str, n_max: int, params: WeightParams, t_grid=None, eps=0):
    """Dispatch one named suite; returns a list of VerificationReports."""
    t_grid = t_grid if t_grid else [params.t]
    small_n = sorted({1, 2, min(5, max(n_max, 1))})
    if name == "s-relations":
        return [verify_s_relations(n_max, params)]
    if name == "discrete":
        return [verify_discrete_system(n_max, params)]
    if name == "toda":
        return [verify_toda(min(n_max, 10), params)]
    if name == "painleve":
        return [verify_painleve3(n, t_grid, params) for n in small_n]
    if name == "sigma":
        return [verify_sigma_form(n, t_grid, params) for n in small_n]
    if name == "zeros":
        return [verify_zero_theorems(min(n_max, 12), params, eps=eps)]
    if name == "structural":
        return [verify_structural(min(n_max, 12), params)]
    if name == "all":
        out = []
        for suite in ("s-relations", "discrete", "structural", "toda", "painleve", "sigma", "zeros"):
            out.extend(run_suite(suite, n_max, params, t_grid, eps))
        return out
    raise DomainError(f"unknown suite: {name}")
