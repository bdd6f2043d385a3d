"""Utility functions, convex conjugates, and asymptotic classification.

A utility function here is strictly increasing and strictly concave on an
open half-line (critical_wealth, +oo), where critical_wealth may be -oo.
The catalog ships one representative per behaviour class:

  exponential       u(x) = 1 - exp(-x)           on R, bounded above
  log               u(x) = ln(x)                 on (0, oo)
  power             u(x) = x**p / p, 0 < p < 1   on (0, oo)
  glued_unbounded   sqrt-type gains glued C1 to exp-type losses; unbounded
                    above, so the conjugate blows up like 1/y near zero
  slow_loss         u(x) = x*ln(-x) for x <= -e, glued C1 to a bounded
                    branch; its loss elasticity tends to exactly 1

The conjugate is v(y) = sup_x { u(x) - x*y }.  Catalog conjugates are closed
form; tabulated utilities get a numeric conjugate via bracketed root finding
on u'.  v(0) is understood as the limit y -> 0+, which equals sup u.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq
from scipy.special import xlogy

from .errors import (
    DomainError,
    NonInada,
    NoPositiveRegion,
    PreconditionError,
    ValidationError,
)

_E = float(np.e)

# glue constants for slow_loss: value -e and slope 2 at x = -e
_SL_TOP = 2.0 - _E          # sup of the glued branch
_RAE_GRID_EXPONENTS = np.arange(1, 41)


def _vectorized(fn):
    """Wrap an array function so scalars in give scalars out."""

    def wrapped(x):
        arr = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore",
                         under="ignore"):
            out = np.asarray(fn(arr), dtype=float)
        if arr.ndim == 0:
            return float(out)
        return out

    return wrapped


@dataclass(frozen=True)
class UtilityFunction:
    """A marginal-utility pair with its domain edge.

    critical_wealth is the left edge of the domain, -inf for whole-line
    utilities.  u and u_prime accept floats or numpy arrays.
    """

    kind: str
    critical_wealth: float
    u: Callable
    u_prime: Callable
    params: dict = field(default_factory=dict)

    def validate(self, n_points: int = 201) -> None:
        """Sample the domain and check strict monotonicity and concavity.

        Raises ValidationError on the first violated invariant.  This is a
        spot check on a fixed grid, not a proof.
        """
        a = self.critical_wealth
        x_max = self.params.get("x_max")
        if x_max is not None:
            xs = np.linspace(self.params.get("x_min", a), x_max, n_points)
        elif np.isfinite(a):
            xs = a + np.geomspace(1e-6, 1e3, n_points)
        else:
            xs = np.sinh(np.linspace(-7.0, 7.0, n_points))
        u = self.u(xs)
        up = self.u_prime(xs)
        if not np.all(np.isfinite(u)) or not np.all(np.isfinite(up)):
            raise ValidationError("utility not finite on sampled domain grid",
                                  kind=self.kind)
        # bounded utilities saturate in float64 near their sup, so demand a
        # strict step only where the marginal predicts a representable one
        du = np.diff(u)
        predicted = np.minimum(up[:-1], up[1:]) * np.diff(xs)
        visible = predicted > 64 * np.finfo(float).eps * np.maximum(
            1.0, np.abs(u[:-1]))
        if np.any(du < 0) or np.any(du[visible] <= 0):
            raise ValidationError("utility not strictly increasing on sample",
                                  kind=self.kind)
        if np.any(up <= 0):
            raise ValidationError("marginal utility not strictly positive",
                                  kind=self.kind)
        if not np.all(np.diff(up) < 0):
            raise ValidationError("marginal utility not strictly decreasing "
                                  "(concavity fails)", kind=self.kind)
        mid = 0.5 * (xs[:-1] + xs[1:])
        if not np.all(self.u(mid) > 0.5 * (u[:-1] + u[1:]) - 1e-12):
            raise ValidationError("midpoint concavity violated on sample",
                                  kind=self.kind)


@dataclass(frozen=True)
class ConjugatePair:
    """Conjugate v and derivative v_prime of a utility function.

    v is convex and decreasing-then-possibly-increasing; v_prime is the
    (negative of the) inverse marginal utility.
    """

    source: UtilityFunction
    v: Callable
    v_prime: Callable
    closed_form: bool


@dataclass(frozen=True)
class InadaReport:
    lower_limit_ok: bool
    upper_limit_ok: bool
    lower_max: float
    upper_min: float


@dataclass(frozen=True)
class RaeResult:
    """Outcome of the loss-side elasticity classifier.

    status is one of "not_required", "holds", "fails".  estimate is the
    numeric liminf estimate, None when not_required.
    """

    status: str
    estimate: float | None


@dataclass(frozen=True)
class GrowthCertificate:
    """Certified constants for v(alpha*y) <= d_const * v(y) on (b, oo)."""

    alpha: float
    b: float
    d_const: float
    verification_grid_size: int


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def exponential_utility() -> UtilityFunction:
    """u(x) = 1 - exp(-x) on the whole line."""
    return UtilityFunction(
        kind="exponential",
        critical_wealth=-np.inf,
        u=_vectorized(lambda x: 1.0 - np.exp(-x)),
        u_prime=_vectorized(lambda x: np.exp(-x)),
    )


def log_utility() -> UtilityFunction:
    return UtilityFunction(
        kind="log",
        critical_wealth=0.0,
        u=_vectorized(np.log),
        u_prime=_vectorized(lambda x: 1.0 / x),
    )


def power_utility(p: float = 0.5) -> UtilityFunction:
    """u(x) = x**p / p with 0 < p < 1."""
    if not 0.0 < p < 1.0:
        raise ValidationError("power exponent must lie in (0, 1)", p=p)
    return UtilityFunction(
        kind="power",
        critical_wealth=0.0,
        u=_vectorized(lambda x: x ** p / p),
        u_prime=_vectorized(lambda x: x ** (p - 1.0)),
        params={"p": p},
    )


def glued_unbounded_utility() -> UtilityFunction:
    """2*sqrt(x) for x >= 1, glued C1 at x = 1 to 3 - exp(-(x-1)) below.

    Whole-line domain, unbounded above; the conjugate is exactly 1/y on
    (0, 1] and 3 - 2y + y*ln(y) beyond.
    """

    def u(x):
        lo = 3.0 - np.exp(-(x - 1.0))
        hi = 2.0 * np.sqrt(np.maximum(x, 1.0))
        return np.where(x < 1.0, lo, hi)

    def up(x):
        lo = np.exp(-(x - 1.0))
        hi = np.maximum(x, 1.0) ** -0.5
        return np.where(x < 1.0, lo, hi)

    return UtilityFunction(
        kind="glued_unbounded",
        critical_wealth=-np.inf,
        u=_vectorized(u),
        u_prime=_vectorized(up),
    )


def slow_loss_utility() -> UtilityFunction:
    """x*ln(-x) on (-oo, -e], glued C1 to (2-e) - 2*exp(-(x+e)) above.

    Loss-side elasticity is 1 + 1/ln(-x) -> 1, the canonical failure case
    for the elasticity requirement.
    """

    def u(x):
        neg = np.maximum(-x, 1e-300)
        lo = x * np.log(neg)
        hi = _SL_TOP - 2.0 * np.exp(-(x + _E))
        return np.where(x <= -_E, lo, hi)

    def up(x):
        neg = np.maximum(-x, 1e-300)
        lo = np.log(neg) + 1.0
        hi = 2.0 * np.exp(-(x + _E))
        return np.where(x <= -_E, lo, hi)

    return UtilityFunction(
        kind="slow_loss",
        critical_wealth=-np.inf,
        u=_vectorized(u),
        u_prime=_vectorized(up),
    )


def custom_utility(u: Callable, u_prime: Callable, critical_wealth: float,
                   params: dict | None = None) -> UtilityFunction:
    """Wrap caller-supplied callables. No invariant check is run here."""
    return UtilityFunction(
        kind="custom",
        critical_wealth=float(critical_wealth),
        u=_vectorized(u),
        u_prime=_vectorized(u_prime),
        params=dict(params or {}),
    )


def utility_from_table(x, u_vals, uprime_vals,
                       critical_wealth: float | None = None) -> UtilityFunction:
    """Build a utility from tabulated (x, u, u') triples.

    Monotone shape-preserving interpolation; evaluation outside the table
    range returns nan.  The domain edge defaults to the leftmost table x.
    """
    x = np.asarray(x, dtype=float)
    u_vals = np.asarray(u_vals, dtype=float)
    uprime_vals = np.asarray(uprime_vals, dtype=float)
    if x.ndim != 1 or x.shape != u_vals.shape or x.shape != uprime_vals.shape:
        raise ValidationError("table columns must be equal-length 1-d arrays")
    if x.size < 4:
        raise ValidationError("need at least 4 table rows")
    if not np.all(np.diff(x) > 0):
        raise ValidationError("table x column must be strictly increasing")
    if not np.all(np.diff(u_vals) > 0):
        raise ValidationError("table u column must be strictly increasing")
    if np.any(uprime_vals <= 0) or not np.all(np.diff(uprime_vals) < 0):
        raise ValidationError("table uprime column must be positive and "
                              "strictly decreasing")
    u_itp = PchipInterpolator(x, u_vals, extrapolate=False)
    up_itp = PchipInterpolator(x, uprime_vals, extrapolate=False)
    a = float(x[0]) if critical_wealth is None else float(critical_wealth)
    return UtilityFunction(
        kind="custom",
        critical_wealth=a,
        u=_vectorized(u_itp),
        u_prime=_vectorized(up_itp),
        params={"x_min": float(x[0]), "x_max": float(x[-1])},
    )


_CATALOG = {
    "exponential": exponential_utility,
    "log": log_utility,
    "power": power_utility,
    "glued_unbounded": glued_unbounded_utility,
    "slow_loss": slow_loss_utility,
}


def build_utility(config: dict) -> UtilityFunction:
    """Construct a utility from a config mapping and validate it."""
    if not isinstance(config, dict) or "kind" not in config:
        raise ValidationError("utility config needs a 'kind' field")
    kind = config["kind"]
    params = config.get("params", {})
    if kind in _CATALOG:
        u = _CATALOG[kind](**params)
    else:
        raise ValidationError(f"unknown utility kind '{kind}'", kind=kind)
    u.validate()
    return u


# ---------------------------------------------------------------------------
# conjugation
# ---------------------------------------------------------------------------

def conjugate(u: UtilityFunction) -> ConjugatePair:
    """Convex conjugate of u. Closed form for the catalog, numeric otherwise."""
    kind = u.kind
    if kind == "exponential":
        v = _vectorized(lambda y: 1.0 - y + xlogy(y, y))
        vp = _vectorized(np.log)
    elif kind == "log":
        v = _vectorized(lambda y: -np.log(y) - 1.0)
        vp = _vectorized(lambda y: -1.0 / y)
    elif kind == "power":
        p = u.params["p"]
        coef = (1.0 - p) / p
        expo = p / (p - 1.0)
        v = _vectorized(lambda y: coef * y ** expo)
        vp = _vectorized(lambda y: -(y ** (1.0 / (p - 1.0))))
    elif kind == "glued_unbounded":
        def v_fn(y):
            lo = 1.0 / np.where(y > 0, y, np.nan)
            lo = np.where(y > 0, lo, np.inf)
            hi = 3.0 - 2.0 * y + xlogy(y, y)
            return np.where(y <= 1.0, lo, hi)

        def vp_fn(y):
            lo = -1.0 / y ** 2
            hi = np.log(np.maximum(y, 1e-300)) - 1.0
            return np.where(y <= 1.0, lo, hi)

        v, vp = _vectorized(v_fn), _vectorized(vp_fn)
    elif kind == "slow_loss":
        # exp overflows to inf on its own past y - 1 ~ 709.78; the minimum
        # only stops the dead branch of the where from tripping on huge y
        def v_fn(y):
            lo = 2.0 - _E - y + _E * y + xlogy(y, y / 2.0)
            hi = np.exp(np.minimum(y, 1e9) - 1.0)
            return np.where(y < 2.0, lo, hi)

        def vp_fn(y):
            lo = _E + np.log(np.maximum(y, 1e-300) / 2.0)
            hi = np.exp(np.minimum(y, 1e9) - 1.0)
            return np.where(y < 2.0, lo, hi)

        v, vp = _vectorized(v_fn), _vectorized(vp_fn)
    else:
        return _numeric_conjugate(u)
    return ConjugatePair(source=u, v=v, v_prime=vp, closed_form=True)


def marginal_inverse(u: UtilityFunction, y: float,
                     residual_tol: float = 1e-12) -> float:
    """Solve u'(x) = y by bracketed root finding.

    Raises NonInada when no bracket exists inside the working range, which
    is how bounded marginal utilities (tables, linear pieces) surface.
    """
    y = float(y)
    if not y > 0:
        raise NonInada("marginal inverse needs y > 0", y=y)
    a = u.critical_wealth
    x_min = u.params.get("x_min")
    x_max = u.params.get("x_max")

    if x_min is not None:
        lo, hi = float(x_min), float(x_max)
        if not (u.u_prime(lo) >= y >= u.u_prime(hi)):
            raise NonInada("y outside the marginal range of the table", y=y)
    else:
        # expand the bracket; u' is decreasing so move lo toward the domain
        # edge until u'(lo) >= y and hi upward until u'(hi) <= y
        lo = a + 1.0 if np.isfinite(a) else 0.0
        step = 1.0
        for _ in range(200):
            val = u.u_prime(lo)
            if np.isfinite(val) and val >= y:
                break
            if np.isfinite(a):
                step *= 0.5
                lo = a + step
            else:
                lo = lo * 2.0 if lo < 0 else -1.0
            if np.isfinite(a) and step < 1e-300:
                raise NonInada("no lower bracket for marginal inverse", y=y)
            if not np.isfinite(a) and lo < -1e12:
                raise NonInada("no lower bracket for marginal inverse", y=y)
        else:
            raise NonInada("no lower bracket for marginal inverse", y=y)
        hi = max(lo + 1.0, 1.0)
        for _ in range(200):
            if u.u_prime(hi) <= y:
                break
            hi *= 2.0
            if hi > 1e12:
                raise NonInada("no upper bracket for marginal inverse", y=y)
        else:
            raise NonInada("no upper bracket for marginal inverse", y=y)

    eps4 = 4 * np.finfo(float).eps
    if np.isfinite(a) and x_min is None:
        # solve in t = ln(x - a) so precision stays relative to the offset
        t_star = brentq(lambda t: u.u_prime(a + np.exp(t)) - y,
                        np.log(lo - a), np.log(hi - a),
                        xtol=1e-13, rtol=eps4, maxiter=200)
        x_star = a + float(np.exp(t_star))
    else:
        x_star = brentq(lambda x: u.u_prime(x) - y, lo, hi,
                        xtol=1e-13, rtol=eps4, maxiter=200)
    resid = abs(u.u_prime(x_star) - y)
    if resid > residual_tol * max(1.0, abs(y)):
        raise NonInada("marginal inverse residual above tolerance",
                       y=y, residual=resid)
    return float(x_star)


def _numeric_conjugate(u: UtilityFunction) -> ConjugatePair:
    def v_scalar(y):
        x_star = marginal_inverse(u, y)
        return float(u.u(x_star) - x_star * y)

    def vp_scalar(y):
        return -marginal_inverse(u, y)

    def lift(fn):
        def wrapped(y):
            arr = np.asarray(y, dtype=float)
            if arr.ndim == 0:
                return fn(float(arr))
            return np.array([fn(float(t)) for t in arr.ravel()]).reshape(arr.shape)
        return wrapped

    return ConjugatePair(source=u, v=lift(v_scalar), v_prime=lift(vp_scalar),
                         closed_form=False)


def v_plus(pair: ConjugatePair, y):
    """Positive part of the conjugate, max(v(y), 0)."""
    val = pair.v(y)
    return np.maximum(val, 0.0) if isinstance(val, np.ndarray) else max(val, 0.0)


# ---------------------------------------------------------------------------
# asymptotic classification
# ---------------------------------------------------------------------------

def check_inada(u: UtilityFunction) -> InadaReport:
    """Grid check of the marginal-utility limits at both domain ends.

    Lower end: u' must exceed 1e6 somewhere on a geometric approach to the
    domain edge (x = a + 2^-j for finite a, x = -2^j otherwise).  Upper end:
    u' must fall below 1e-6 somewhere on x = 2^j, j <= 40.  Utilities whose
    marginal diverges slower than the grid reaches (log-type losses) will
    honestly report False here.
    """
    js = _RAE_GRID_EXPONENTS.astype(float)
    a = u.critical_wealth
    if np.isfinite(a):
        xs_lo = a + 2.0 ** (-js)
    else:
        xs_lo = -(2.0 ** js)
    with np.errstate(over="ignore", invalid="ignore"):
        lo_vals = np.asarray(u.u_prime(xs_lo), dtype=float)
        hi_vals = np.asarray(u.u_prime(2.0 ** js), dtype=float)
    lo_vals = lo_vals[~np.isnan(lo_vals)]
    hi_vals = hi_vals[~np.isnan(hi_vals)]
    lower_max = float(np.max(lo_vals)) if lo_vals.size else np.nan
    upper_min = float(np.min(hi_vals)) if hi_vals.size else np.nan
    return InadaReport(
        lower_limit_ok=bool(lo_vals.size and lower_max > 1e6),
        upper_limit_ok=bool(hi_vals.size and upper_min < 1e-6),
        lower_max=lower_max,
        upper_min=upper_min,
    )


def _elasticity_ratios(u: UtilityFunction, js: np.ndarray):
    xs = -(2.0 ** js)
    with np.errstate(over="ignore", invalid="ignore"):
        num = xs * np.asarray(u.u_prime(xs), dtype=float)
        den = np.asarray(u.u(xs), dtype=float)
        zero_den = np.isfinite(den) & (den == 0.0)
        ratio = num / den
    return ratio, zero_den


def asymptotic_elasticity_minus(u: UtilityFunction) -> RaeResult:
    """Classify the loss-side asymptotic elasticity liminf x*u'(x)/u(x).

    Only meaningful for whole-line utilities; the requirement is the liminf
    being strictly above 1.  The liminf is estimated on x = -2^j, j <= 40,
    restricted to the points where the ratio is float-computable, as the
    minimum over the tail half.  When the tail is still strictly decreasing
    the limit is extrapolated by a least-squares fit of ratio = L + beta/j,
    which is exact for log-type losses on this grid; the running minimum
    alone would overstate a liminf that is approached from above.
    """
    if u.critical_wealth > -np.inf:
        return RaeResult("not_required", None)
    js = _RAE_GRID_EXPONENTS.astype(float)
    ratio, zero_den = _elasticity_ratios(u, js)
    if np.any(zero_den):
        # one regrid: perturb the exponents and retry
        js = js + 0.5
        ratio, zero_den = _elasticity_ratios(u, js)
        if np.any(zero_den):
            raise DomainError("utility vanishes on the elasticity grid")
    ok = np.isfinite(ratio)
    ratio, js = ratio[ok], js[ok]
    if ratio.size < 4:
        raise DomainError("elasticity ratio not computable on enough grid "
                          "points", computable=int(ratio.size))
    tail = ratio[ratio.size // 2:]
    jtail = js[ratio.size // 2:]
    estimate = float(np.min(tail))
    if np.all(np.diff(tail) < 0):
        design = np.column_stack([np.ones_like(jtail), 1.0 / jtail])
        coef, *_ = np.linalg.lstsq(design, tail, rcond=None)
        estimate = min(estimate, float(coef[0]))
    status = "holds" if estimate > 1.0 + 1e-6 else "fails"
    return RaeResult(status, estimate)


def growth_constants(u: UtilityFunction, alpha: float,
                     b: float | None = None) -> GrowthCertificate:
    """Constants (b, D) with v(alpha*y) <= D*v(y) for y > b.

    Requires the loss-side elasticity classifier to report "holds".  b is
    auto-selected as twice the first grid point where v is positive and
    increasing, unless given.  D is 1.05 times the grid supremum of the
    ratio v(alpha*y)/v(y), and the certificate is re-verified on a shifted
    grid before being returned.
    """
    if not alpha > 1.0:
        raise ValidationError("growth factor alpha must exceed 1", alpha=alpha)
    rae = asymptotic_elasticity_minus(u)
    if rae.status != "holds":
        raise PreconditionError(
            "growth constants need the elasticity condition to hold",
            status=rae.status, estimate=rae.estimate)
    pair = conjugate(u)
    if b is None:
        search = np.geomspace(1e-4, 1e8, 10_000)
        vv = pair.v(search)
        vp = pair.v_prime(search)
        good = np.isfinite(vv) & np.isfinite(vp) & (vv > 0) & (vp > 0)
        if not np.any(good):
            raise NoPositiveRegion("conjugate never positive and increasing "
                                   "on the search range")
        b = 2.0 * float(search[np.argmax(good)])
    else:
        b = float(b)
        if not (pair.v(b) > 0 and pair.v_prime(b) > 0):
            raise NoPositiveRegion("conjugate not positive and increasing at "
                                   "the supplied b", b=b)

    grid = np.geomspace(b, 1e8, 10_000)
    vg = pair.v(grid)
    if np.any(vg <= 0):
        raise NoPositiveRegion("conjugate not positive beyond b", b=b)
    d_const = 1.05 * float(np.max(pair.v(alpha * grid) / vg))

    # independent verification pass on a shifted grid
    fresh = np.geomspace(b * 1.0007, 1e8 * 0.9993, 9_973)
    vf = pair.v(fresh)
    if not (pair.v(b) > 0 and np.all(vf > 0) and np.all(np.diff(vf) > 0)):
        raise NoPositiveRegion("verification grid found v non-positive or "
                               "non-increasing beyond b", b=b)
    if np.any(pair.v(alpha * fresh) > d_const * vf):
        raise ValidationError("growth certificate failed on the verification "
                              "grid", alpha=alpha, b=b, d_const=d_const)
    return GrowthCertificate(alpha=float(alpha), b=b, d_const=d_const,
                             verification_grid_size=fresh.size)
