"""Polyhedral cone engine over a weighted state space.

Cones live in R^d with the bilinear pairing <x, h> = sum_i w_i x_i h_i,
where w is a strictly positive reference weight vector.  With that pairing
the outward normals of the claims cone are exactly measure densities, so
polarity statements about prices become statements about separating
measures without any change of coordinates.

Both representations are supported: generators (conic rays plus two sided
linear directions) and homogeneous halfspaces <x, h> <= 0.  Conversion in
either direction runs a double description pass with explicit lineality
handling and combinatorial adjacency, capped at 12 dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (DimensionError, EmptyMeasureSet, NoMeasure,
                     ValidationError)
from .market import Claim, MarketModel, gains_space
from .measures import (MeasureDensity, classify_measure, separating_polytope)
from .simplex import l1_residual, linprog_min
from .utility import ConjugatePair, conjugate, exponential_utility

_DIM_CAP = 12
_ROW_TOL = 1e-12
_SIGN_TOL = 1e-9
_DEDUPE_TOL = 1e-8
_MEMBER_TOL = 1e-8


@dataclass(frozen=True)
class PolyCone:
    """A closed polyhedral cone with an attached weighted pairing.

    generators rows span the cone: row i is a two sided line when
    linear_flags[i] is true, otherwise a one sided ray.  halfspaces rows h
    cut the cone as <x, h> <= 0 in the weighted pairing.  Either side may
    be None until a conversion is requested.
    """

    dim: int
    weights: np.ndarray
    generators: np.ndarray | None = None
    linear_flags: np.ndarray | None = None
    halfspaces: np.ndarray | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.dim,) or np.any(w <= 0) or not np.all(
                np.isfinite(w)):
            raise ValidationError("weights must be a strictly positive "
                                  "vector of length dim")
        object.__setattr__(self, "weights", w)
        for name in ("generators", "halfspaces"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.atleast_2d(np.asarray(arr, dtype=float))
            if arr.size == 0:
                arr = np.zeros((0, self.dim))
            if arr.shape[1] != self.dim:
                raise DimensionError(f"{name} rows must have length "
                                     f"{self.dim}", got=arr.shape[1])
            object.__setattr__(self, name, arr)
        if self.generators is not None:
            flags = self.linear_flags
            if flags is None:
                flags = np.zeros(self.generators.shape[0], dtype=bool)
            flags = np.asarray(flags, dtype=bool).reshape(-1)
            if flags.shape[0] != self.generators.shape[0]:
                raise DimensionError("linear_flags must match generators")
            object.__setattr__(self, "linear_flags", flags)
        if self.generators is None and self.halfspaces is None:
            raise ValidationError("cone needs generators or halfspaces")


def pairing(weights: np.ndarray, x: np.ndarray, h: np.ndarray) -> float:
    """Weighted bilinear form <x, h> = sum_i w_i x_i h_i."""
    return float(np.sum(np.asarray(weights, float) * np.asarray(x, float)
                        * np.asarray(h, float)))


def _unit(rows: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    norms[norms < _ROW_TOL] = 1.0
    return rows / norms


def _dedupe_rows(rows: np.ndarray, tol: float = _DEDUPE_TOL) -> np.ndarray:
    if rows.shape[0] == 0:
        return rows
    keep = []
    for r in rows:
        if any(np.max(np.abs(r - k)) <= tol for k in keep):
            continue
        keep.append(r)
    return np.array(keep)


def _shrink_basis(basis: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Orthonormal basis of span(basis) intersected with direction-perp."""
    d = direction / np.linalg.norm(direction)
    reduced = basis - np.outer(basis @ d, d)
    if reduced.size == 0:
        return np.zeros((0, basis.shape[1]))
    _, s, vt = np.linalg.svd(reduced, full_matrices=False)
    rows = vt[s > 1e-10]
    return rows if rows.size else np.zeros((0, basis.shape[1]))


def _active_masks(rows: list[np.ndarray], rays: np.ndarray) -> list[int]:
    if not rows or rays.shape[0] == 0:
        return [0] * rays.shape[0]
    prods = np.abs(np.array(rows) @ rays.T) <= 10 * _SIGN_TOL
    masks = []
    for j in range(rays.shape[0]):
        bits = 0
        for i in range(len(rows)):
            if prods[i, j]:
                bits |= 1 << i
        masks.append(bits)
    return masks


def _double_description(a_rows: np.ndarray, dim: int
                        ) -> tuple[np.ndarray, np.ndarray]:
    """Generators of {x : a_rows @ x <= 0} as (rays, lineality_basis).

    Incremental construction: the lineality space starts as all of R^d and
    each constraint either slices it (spawning one ray) or refines the ray
    set through adjacent positive/negative pairs.  Adjacency is the usual
    combinatorial test on active constraint sets, kept as bitmasks.
    """
    if dim > _DIM_CAP:
        raise DimensionError("cone engine is capped at 12 dimensions",
                             dim=dim)
    lineality = np.eye(dim)
    rays = np.zeros((0, dim))
    processed: list[np.ndarray] = []
    for raw in np.atleast_2d(a_rows):
        nrm = np.linalg.norm(raw)
        if nrm < _ROW_TOL:
            continue
        a = raw / nrm
        if lineality.shape[0]:
            a_par = lineality.T @ (lineality @ a)
        else:
            a_par = np.zeros(dim)
        if np.linalg.norm(a_par) > _SIGN_TOL:
            l0 = -a_par / np.linalg.norm(a_par)
            denom = float(a @ l0)
            if rays.shape[0]:
                shift = (rays @ a) / denom
                rays = rays - np.outer(shift, l0)
                rays = _unit(rays)
            rays = np.vstack([rays, l0]) if rays.size else l0[None, :]
            lineality = _shrink_basis(lineality, a_par)
        else:
            if rays.shape[0] == 0:
                processed.append(a)
                continue
            s = rays @ a
            pos = np.where(s > _SIGN_TOL)[0]
            neg = np.where(s < -_SIGN_TOL)[0]
            zero = np.where(np.abs(s) <= _SIGN_TOL)[0]
            if pos.size == 0:
                processed.append(a)
                continue
            masks = _active_masks(processed, rays)
            new_rays = [rays[i] for i in np.concatenate([neg, zero])]
            for i in pos:
                for j in neg:
                    common = masks[i] & masks[j]
                    blocked = False
                    for k in range(rays.shape[0]):
                        if k in (i, j):
                            continue
                        if (masks[k] & common) == common:
                            blocked = True
                            break
                    if blocked:
                        continue
                    w = s[i] * rays[j] - s[j] * rays[i]
                    nw = np.linalg.norm(w)
                    if nw > _ROW_TOL:
                        new_rays.append(w / nw)
            rays = (np.array(new_rays) if new_rays
                    else np.zeros((0, dim)))
            rays = _dedupe_rows(_unit(rays)) if rays.size else rays
        processed.append(a)
    # push rays out of the lineality span and clean up
    if rays.shape[0] and lineality.shape[0]:
        rays = rays - rays @ lineality.T @ lineality
        norms = np.linalg.norm(rays, axis=1)
        rays = rays[norms > 1e-9]
        if rays.shape[0]:
            rays = _dedupe_rows(_unit(rays))
    return (rays if rays.size else np.zeros((0, dim)),
            lineality if lineality.size else np.zeros((0, dim)))


def _expanded_generators(c: PolyCone) -> np.ndarray:
    """Generator rows with every linear direction split into a +/- pair."""
    gens = c.generators
    flags = c.linear_flags
    rows = [gens[~flags]]
    if np.any(flags):
        rows += [gens[flags], -gens[flags]]
    out = np.vstack([r for r in rows if r.size]) if gens.size else gens
    return out if out.size else np.zeros((0, c.dim))


def ensure_generators(c: PolyCone) -> PolyCone:
    """Attach a generator representation, via double description if needed."""
    if c.generators is not None:
        return c
    a = c.halfspaces * c.weights[None, :]
    rays, lin = _double_description(a, c.dim)
    gens = np.vstack([lin, rays]) if (lin.size or rays.size) else \
        np.zeros((0, c.dim))
    flags = np.concatenate([np.ones(lin.shape[0], dtype=bool),
                            np.zeros(rays.shape[0], dtype=bool)])
    return replace(c, generators=gens, linear_flags=flags)


def ensure_halfspaces(c: PolyCone) -> PolyCone:
    """Attach a halfspace representation by passing through the polar."""
    if c.halfspaces is not None:
        return c
    rows = _expanded_generators(c)
    a = rows * c.weights[None, :]
    rays, lin = _double_description(a, c.dim)
    hs = [rays] if rays.size else []
    if lin.size:
        hs += [lin, -lin]
    half = np.vstack(hs) if hs else np.zeros((0, c.dim))
    return replace(c, halfspaces=half)


def polar(c: PolyCone) -> PolyCone:
    """Polar cone {h : <x, h> <= 0 for all x in c} in the same pairing.

    Representations swap roles: halfspace normals of c generate the polar,
    and generators of c cut it.  No conversion happens here, so taking the
    polar is exact and cheap; call ensure_* on the result when the other
    description is wanted.
    """
    gens = None
    flags = None
    half = None
    if c.halfspaces is not None:
        gens = np.array(c.halfspaces, copy=True)
        flags = np.zeros(gens.shape[0], dtype=bool)
    if c.generators is not None:
        half = _expanded_generators(c)
    if gens is None and half is None:
        raise ValidationError("cone has no representation to polarize")
    return PolyCone(dim=c.dim, weights=c.weights, generators=gens,
                    linear_flags=flags, halfspaces=half)


def member(c: PolyCone, x: np.ndarray, tol: float | None = None
           ) -> tuple[bool, float]:
    """Halfspace membership test; returns (inside, worst_violation)."""
    c = ensure_halfspaces(c)
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != c.dim:
        raise DimensionError("point dimension mismatch", got=x.shape[0])
    if tol is None:
        tol = _MEMBER_TOL * max(1.0, float(np.max(np.abs(x), initial=0.0)))
    if c.halfspaces.shape[0] == 0:
        return True, 0.0
    scaled = c.halfspaces * c.weights[None, :]
    norms = np.linalg.norm(scaled, axis=1)
    norms[norms < _ROW_TOL] = 1.0
    slack = (scaled @ x) / norms
    worst = float(np.max(slack))
    return worst <= tol, worst


def member_lp(c: PolyCone, x: np.ndarray, tol: float | None = None
              ) -> tuple[bool, float]:
    """Generator membership test through an L1 residual program.

    Independent of the halfspace route: it asks the simplex solver for the
    best conic combination of the stored generators and reports the
    leftover.  Useful as a cross check that never touches the pairing.
    """
    c = ensure_generators(c)
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != c.dim:
        raise DimensionError("point dimension mismatch", got=x.shape[0])
    if tol is None:
        tol = _MEMBER_TOL * max(1.0, float(np.sum(np.abs(x))))
    if c.generators.shape[0] == 0:
        resid = float(np.sum(np.abs(x)))
        return resid <= tol, resid
    resid, _ = l1_residual(c.generators.T, x, free=c.linear_flags)
    return resid <= tol, resid


def _sample_cone_points(c: PolyCone, rng: np.random.Generator,
                        n: int) -> np.ndarray:
    """Random conic combinations of the generators of c."""
    c = ensure_generators(c)
    g = c.generators
    if g.shape[0] == 0:
        return np.zeros((n, c.dim))
    lam = rng.exponential(1.0, size=(n, g.shape[0]))
    signs = np.where(rng.random((n, g.shape[0])) < 0.5, -1.0, 1.0)
    lam = np.where(c.linear_flags[None, :], lam * signs, lam)
    return lam @ g


@dataclass(frozen=True)
class BipolarReport:
    max_violation_forward: float
    max_violation_reverse: float
    n_checks: int
    ok: bool


def bipolar_check(c: PolyCone, rng: np.random.Generator | None = None,
                  n_samples: int = 24, tol: float = 1e-7) -> BipolarReport:
    """Certify that the polar of the polar recovers the closed cone.

    Forward: every generator of c must satisfy the halfspaces of the
    double polar.  Reverse: random points of the double polar must come
    back as conic combinations of the original generators, tested through
    the LP route so the two directions use unrelated machinery.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    c = ensure_generators(c)
    dp = ensure_generators(polar(ensure_generators(polar(c))))
    fwd = 0.0
    n_checks = 0
    dp_h = ensure_halfspaces(dp)
    for g, lin in zip(c.generators, c.linear_flags):
        for signed in ([g, -g] if lin else [g]):
            _, viol = member(dp_h, signed)
            fwd = max(fwd, viol)
            n_checks += 1
    rev = 0.0
    for pt in _sample_cone_points(dp, rng, n_samples):
        scale = max(1.0, float(np.sum(np.abs(pt))))
        _, resid = member_lp(c, pt)
        rev = max(rev, resid / scale)
        n_checks += 1
    return BipolarReport(max_violation_forward=fwd,
                         max_violation_reverse=rev,
                         n_checks=n_checks,
                         ok=bool(fwd <= tol and rev <= tol))


def build_KU(m: MarketModel) -> PolyCone:
    """Cone of terminal claims dominated by some attainable trading gain.

    Generators: the one step gains of every tradeable asset as two sided
    directions, plus the negative coordinate rays that absorb free
    disposal.  The weights are the reference path probabilities, so polars
    of this cone are spanned by measure densities.
    """
    g = gains_space(m)
    n = m.n_states
    gens = [g.generators] if g.generators.size else []
    gens.append(-np.eye(n))
    stacked = np.vstack(gens)
    flags = np.concatenate([
        np.ones(g.generators.shape[0] if g.generators.size else 0,
                dtype=bool),
        np.zeros(n, dtype=bool)])
    return PolyCone(dim=n, weights=m.reference_probabilities,
                    generators=stacked, linear_flags=flags)


@dataclass(frozen=True)
class CUReport:
    max_generator_slack: float
    max_halfspace_residual: float
    n_checks: int
    n_vertex_densities: int
    ok: bool


def build_CU(m: MarketModel, tol: float = 1e-7
             ) -> tuple[PolyCone, CUReport]:
    """Claims with nonpositive expectation under every separating measure.

    Built twice on purpose.  Route one keeps the generator description of
    the dominated claims cone.  Route two enumerates the vertex densities
    of the separating polytope and uses them as halfspace normals.  The
    report records how far each route is from containing the other; on an
    arbitrage free market both numbers are zero up to roundoff.
    """
    ku = build_KU(m)
    try:
        poly = separating_polytope(m)
    except NoMeasure as exc:
        raise EmptyMeasureSet(
            "no separating measure: the dual side is empty and prices "
            "are unbounded below", **exc.details) from exc
    if poly.vertices is None:
        raise DimensionError("dual cone construction needs enumerated "
                             "polytope vertices", n_states=m.n_states)
    dens = poly.vertex_densities()
    if dens.shape[0] == 0:
        raise EmptyMeasureSet("separating polytope has no vertices")
    cu = PolyCone(dim=ku.dim, weights=ku.weights, generators=ku.generators,
                  linear_flags=ku.linear_flags, halfspaces=dens)
    slack = 0.0
    n_checks = 0
    for g, lin in zip(ku.generators, ku.linear_flags):
        _, viol = member(cu, g)
        slack = max(slack, viol)
        n_checks += 1
        if lin:
            _, viol = member(cu, -g)
            slack = max(slack, viol)
            n_checks += 1
    hrep_only = PolyCone(dim=ku.dim, weights=ku.weights, halfspaces=dens)
    hrep_gen = ensure_generators(hrep_only)
    resid = 0.0
    for g, lin in zip(hrep_gen.generators, hrep_gen.linear_flags):
        _, r = member_lp(ku, g)
        resid = max(resid, r)
        n_checks += 1
        if lin:
            _, r = member_lp(ku, -g)
            resid = max(resid, r)
            n_checks += 1
    report = CUReport(max_generator_slack=slack,
                      max_halfspace_residual=resid,
                      n_checks=n_checks,
                      n_vertex_densities=dens.shape[0],
                      ok=bool(slack <= tol and resid <= tol))
    return cu, report


def _normalize_density(weights: np.ndarray, h: np.ndarray) -> np.ndarray:
    mass = float(np.sum(weights * h))
    if abs(mass) < _ROW_TOL:
        return h
    return h / mass


@dataclass(frozen=True)
class ChainEntry:
    name: str
    description: str
    max_violation: float
    n_checks: int
    ok: bool


@dataclass(frozen=True)
class DualityChainReport:
    entries: tuple[ChainEntry, ...]
    claims_checked: int
    all_ok: bool


def verify_duality_chain(m: MarketModel, pair: ConjugatePair | None = None,
                         b: float = 1.0,
                         rng: np.random.Generator | None = None,
                         tol: float = 1e-7) -> DualityChainReport:
    """Numerically certify the polar identities behind superhedging duality.

    The chain: the polar of the dominated claims cone is spanned by the
    separating vertex densities, the double polar recovers the claims
    cone, polarizing once more collapses back, the density cone sits in
    the nonnegative orthant orthogonal to all gains, and cutting the
    separating family by the loss entropy condition keeps every vertex.
    Membership always runs through two unrelated routes (halfspace slack
    versus simplex residual), so a bug in one representation cannot
    silently confirm itself.
    """
    if rng is None:
        rng = np.random.default_rng(20240)
    if pair is None:
        pair = conjugate(exponential_utility())
    ku = build_KU(m)
    try:
        poly = separating_polytope(m)
    except NoMeasure as exc:
        raise EmptyMeasureSet(
            "no separating measure: duality chain is vacuous",
            **exc.details) from exc
    if poly.vertices is None:
        raise DimensionError("duality chain needs enumerated polytope "
                             "vertices", n_states=m.n_states)
    dens = poly.vertex_densities()
    gains = gains_space(m).generators
    w = ku.weights
    entries = []
    claims_checked = 0

    # polar of the claims cone equals the cone of vertex densities
    ku_polar = ensure_generators(polar(ku))
    dens_cone = PolyCone(dim=ku.dim, weights=w, generators=dens)
    viol = 0.0
    n = 0
    for h, lin in zip(ku_polar.generators, ku_polar.linear_flags):
        for signed in ([h, -h] if lin else [h]):
            _, r = member_lp(dens_cone, signed)
            viol = max(viol, r)
            n += 1
    ku_polar_h = ensure_halfspaces(
        PolyCone(dim=ku.dim, weights=w,
                 generators=ku_polar.generators,
                 linear_flags=ku_polar.linear_flags))
    for z in dens:
        _, s = member(ku_polar_h, z)
        viol = max(viol, s)
        n += 1
    entries.append(ChainEntry(
        name="claims_polar_is_density_cone",
        description="polar of the dominated claims cone coincides with "
                    "the conic hull of the separating vertex densities",
        max_violation=viol, n_checks=n, ok=bool(viol <= tol)))
    claims_checked += n

    # double polar gives back the claims cone
    bip = bipolar_check(ku, rng=rng, tol=tol)
    entries.append(ChainEntry(
        name="bipolar_recovers_claims_cone",
        description="the polar of the polar is the original closed cone",
        max_violation=max(bip.max_violation_forward,
                          bip.max_violation_reverse),
        n_checks=bip.n_checks, ok=bip.ok))
    claims_checked += bip.n_checks

    # polarizing the bipolar collapses to the first polar
    cu = ensure_generators(polar(ensure_generators(polar(ku))))
    cu_polar = ensure_generators(polar(cu))
    viol = 0.0
    n = 0
    kup_cone = PolyCone(dim=ku.dim, weights=w,
                        generators=ku_polar.generators,
                        linear_flags=ku_polar.linear_flags)
    cup_cone = PolyCone(dim=ku.dim, weights=w,
                        generators=cu_polar.generators,
                        linear_flags=cu_polar.linear_flags)
    for h, lin in zip(cu_polar.generators, cu_polar.linear_flags):
        for signed in ([h, -h] if lin else [h]):
            _, r = member_lp(kup_cone, signed)
            viol = max(viol, r)
            n += 1
    for h, lin in zip(ku_polar.generators, ku_polar.linear_flags):
        for signed in ([h, -h] if lin else [h]):
            _, r = member_lp(cup_cone, signed)
            viol = max(viol, r)
            n += 1
    entries.append(ChainEntry(
        name="polar_chain_collapses",
        description="the polar of the double polar equals the single "
                    "polar, so the chain stabilizes after one step",
        max_violation=viol, n_checks=n, ok=bool(viol <= tol)))
    claims_checked += n

    # the density cone lives in the separating family
    viol = 0.0
    n = 0
    for h, lin in zip(ku_polar.generators, ku_polar.linear_flags):
        if lin:
            viol = max(viol, 1.0)
            n += 1
            continue
        q = _normalize_density(w, h)
        viol = max(viol, float(np.max(-q, initial=0.0)))
        if gains.size:
            viol = max(viol, float(np.max(np.abs(gains @ (w * q)))))
        n += 1
    entries.append(ChainEntry(
        name="density_cone_in_separating_family",
        description="each polar ray normalizes to a nonnegative density "
                    "with zero expectation against every gains generator",
        max_violation=viol, n_checks=n, ok=bool(viol <= tol)))
    claims_checked += n

    # the loss entropy cut keeps every vertex of the separating polytope
    bad = 0.0
    n = 0
    for z in dens:
        q = MeasureDensity.finite(z, w)
        rep = classify_measure(q, pair, m=m, b=b)
        if not rep.in_hatMV:
            bad += 1.0
        n += 1
    entries.append(ChainEntry(
        name="entropy_cut_keeps_every_vertex",
        description="every vertex density has finite loss entropy, so the "
                    "entropy restricted family spans the same cone as the "
                    "full separating family",
        max_violation=bad, n_checks=n, ok=bool(bad == 0.0)))
    claims_checked += n

    return DualityChainReport(entries=tuple(entries),
                              claims_checked=claims_checked,
                              all_ok=bool(all(e.ok for e in entries)))


def _conic_price(ku: PolyCone, x: np.ndarray) -> tuple[float, np.ndarray]:
    """min { t : x - t * ones is dominated }, solved on the generators.

    Returns the optimal shift together with the generator coefficients
    that witness the dominated remainder.
    """
    g = ku.generators
    n_g = g.shape[0]
    a_eq = np.hstack([g.T, np.ones((ku.dim, 1))])
    c = np.zeros(n_g + 1)
    c[-1] = 1.0
    free = np.concatenate([ku.linear_flags, [True]])
    res = linprog_min(c, A_eq=a_eq, b_eq=np.asarray(x, dtype=float),
                      free=free)
    if res.status == "unbounded":
        raise EmptyMeasureSet("price program unbounded below: no "
                              "separating measure")
    if res.status != "optimal":
        raise ValidationError("conic price program failed",
                              status=res.status)
    return float(res.objective), res.x[:n_g]


@dataclass(frozen=True)
class ClaimCheck:
    label: str
    projection_price: float
    dual_maximum: float
    in_cone: bool
    dual_nonpositive: bool
    consistent: bool
    separating_density: np.ndarray | None


@dataclass(frozen=True)
class RepresentationReport:
    claims: tuple[ClaimCheck, ...]
    n_measures: int
    sampled_measures_only: bool
    max_gap: float
    all_consistent: bool


def verify_representation(m: MarketModel,
                          claims: list | None = None,
                          measures: list[np.ndarray] | None = None,
                          rng: np.random.Generator | None = None,
                          tol: float = 1e-7) -> RepresentationReport:
    """Check the dual description of the claims cone on test claims.

    For each claim the projection program computes the least cash shift
    that pushes it into the dominated cone, and the dual side evaluates
    expectations under separating measures.  Membership of the claim is
    equivalent to a nonpositive shift, and the shift must match the
    largest expectation.  When the measure list is supplied by the caller
    the dual maximum is only a lower bound, so the comparison becomes one
    sided and the report says so.
    """
    if rng is None:
        rng = np.random.default_rng(7)
    ku = build_KU(m)
    try:
        poly = separating_polytope(m)
    except NoMeasure as exc:
        raise EmptyMeasureSet(
            "no separating measure: the dual representation is empty",
            **exc.details) from exc
    if measures is not None:
        probs = [np.asarray(q, dtype=float).reshape(-1) for q in measures]
        sampled_only = True
    elif poly.vertices is None:
        raise DimensionError("representation check needs enumerated "
                             "polytope vertices or an explicit measure "
                             "list", n_states=m.n_states)
    else:
        verts = poly.vertices
        probs = [v for v in verts]
        if len(probs) > 1:
            probs.append(np.mean(verts, axis=0))
        sampled_only = False
    for q in probs:
        if q.shape[0] != m.n_states:
            raise DimensionError("measure dimension mismatch",
                                 got=q.shape[0])
    if claims is None:
        base = [Claim(payoff=-np.ones(m.n_states), label="minus_cash"),
                Claim(payoff=np.ones(m.n_states), label="plus_cash")]
        for i in range(min(m.n_states, 3)):
            e = np.zeros(m.n_states)
            e[i] = -1.0
            base.append(Claim(payoff=e, label=f"minus_e{i}"))
        for j in range(6):
            base.append(Claim(payoff=rng.normal(size=m.n_states),
                              label=f"random_{j}"))
        claims = base
    checks = []
    max_gap = 0.0
    for cl in claims:
        if isinstance(cl, Claim):
            x, label = cl.payoff, cl.label
        else:
            x = np.asarray(cl, dtype=float).reshape(-1)
            label = "claim"
        scale = max(1.0, float(np.max(np.abs(x), initial=0.0)))
        t_star, _ = _conic_price(ku, x)
        evals = np.array([float(q @ x) for q in probs])
        dual_max = float(np.max(evals))
        in_cone = t_star <= tol * scale
        dual_ok = dual_max <= tol * scale
        if sampled_only:
            gap = max(0.0, dual_max - t_star)
            consistent = dual_max <= t_star + tol * scale
        else:
            gap = abs(t_star - dual_max)
            consistent = gap <= tol * scale
        sep = None
        if not in_cone and dual_max > 0:
            sep = np.array(probs[int(np.argmax(evals))]
                           / m.reference_probabilities)
        checks.append(ClaimCheck(label=label, projection_price=t_star,
                                 dual_maximum=dual_max, in_cone=in_cone,
                                 dual_nonpositive=dual_ok,
                                 consistent=bool(consistent),
                                 separating_density=sep))
        max_gap = max(max_gap, gap)
    return RepresentationReport(claims=tuple(checks),
                                n_measures=len(probs),
                                sampled_measures_only=sampled_only,
                                max_gap=max_gap,
                                all_consistent=bool(
                                    all(c.consistent for c in checks)))


def cone_from_config(config: dict) -> PolyCone:
    """Build a cone from {"dim", "generators", "linear"?, "halfspaces"?}.

    The linear list marks two sided generator rows and defaults to all
    one sided.  Weights default to the uniform reference measure.
    """
    if not isinstance(config, dict):
        raise ValidationError("cone config must be an object")
    dim = config.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ValidationError("cone config needs a positive integer dim")
    w = config.get("weights")
    weights = (np.full(dim, 1.0 / dim) if w is None
               else np.asarray(w, dtype=float))
    gens = None
    flags = None
    if "generators" in config:
        gens = np.atleast_2d(np.asarray(config["generators"], dtype=float))
        if gens.size == 0:
            gens = np.zeros((0, dim))
        linear = config.get("linear")
        if linear is None:
            flags = np.zeros(gens.shape[0], dtype=bool)
        else:
            flags = np.asarray(linear, dtype=bool).reshape(-1)
            if flags.shape[0] != gens.shape[0]:
                raise DimensionError("linear flag list must match the "
                                     "generator count",
                                     got=int(flags.shape[0]),
                                     expected=int(gens.shape[0]))
    elif "linear" in config:
        raise ValidationError("linear flags given without generators")
    half = None
    if "halfspaces" in config:
        half = np.atleast_2d(np.asarray(config["halfspaces"], dtype=float))
        if half.size == 0:
            half = np.zeros((0, dim))
    try:
        return PolyCone(dim=dim, weights=weights, generators=gens,
                        linear_flags=flags, halfspaces=half)
    except (ValidationError, DimensionError):
        raise
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad cone config: {exc}") from exc


def cone_summary(c: PolyCone) -> dict:
    """Plain dict view of both representations, for serialization."""
    c = ensure_halfspaces(ensure_generators(c))
    rays = c.generators[~c.linear_flags]
    lines = c.generators[c.linear_flags]
    return {
        "dim": int(c.dim),
        "weights": [float(v) for v in c.weights],
        "rays": [[float(v) for v in r] for r in rays],
        "lines": [[float(v) for v in r] for r in lines],
        "halfspaces": [[float(v) for v in h] for h in c.halfspaces],
    }
