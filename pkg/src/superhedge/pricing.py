"""Super-replication prices through both sides of the duality.

The primal side searches for the cheapest initial capital whose attainable
terminal wealth dominates the claim.  The dual side maximizes the claim's
expectation over separating measures.  On an arbitrage free finite market
the two values agree; the report constructor enforces that agreement and
refuses to return when the gap exceeds tolerance.

Admissibility (a floor on the wealth path) breaks the equality for claims
that are very negative in unlikely states.  The truncation study at the
bottom builds a family of growing single period markets where that gap is
known in closed form and walks it toward its limit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cones import _conic_price, ensure_generators, PolyCone
from .errors import (DimensionError, DualityGapError, EmptyMeasureSet,
                     NoMeasure, UnboundedPrice, ValidationError)
from .market import (build_market, Claim, gains_space, MarketModel)
from .measures import (classify_measure, MeasureDensity, MeasurePolytope,
                       separating_polytope)
from .simplex import linprog_min
from .utility import ConjugatePair

_GAP_TOL = 1e-7
_CONE_CHOICES = ("KU", "CU", "Kadm")


def _payoff(m: MarketModel, claim) -> tuple[np.ndarray, str]:
    if isinstance(claim, Claim):
        x, label = claim.payoff, claim.label
    else:
        x = np.asarray(claim, dtype=float).reshape(-1)
        label = "claim"
    if x.shape[0] != m.n_states:
        raise DimensionError("claim dimension does not match market",
                             got=x.shape[0], expected=m.n_states)
    if not np.all(np.isfinite(x)):
        raise ValidationError("claim payoff must be finite")
    return x, label


@dataclass(frozen=True)
class PrimalCertificate:
    """Optimal capital with whatever hedge evidence the route produces.

    The strategy route stores holdings per gains generator together with
    the hedged terminal wealth and its slack over the claim.  The conic
    route certifies membership through generator coefficients instead and
    leaves the strategy fields empty.
    """

    price: float
    cone_choice: str
    wealth_floor: float | None
    strategy: np.ndarray | None
    hedge: np.ndarray | None
    slack: np.ndarray | None
    generator_coefficients: np.ndarray | None
    status: str


@dataclass(frozen=True)
class DualCertificate:
    price: float
    probabilities: np.ndarray
    density: np.ndarray
    method: str
    in_loss_family: bool | None


def suprep_primal(m: MarketModel, claim, cone_choice: str = "KU",
                  wealth_floor: float | None = None) -> PrimalCertificate:
    """Least initial capital whose terminal wealth dominates the claim.

    cone_choice picks the machinery.  "KU" prices over free strategies in
    the dominated claims cone.  "Kadm" adds a wealth floor: capital plus
    gains must stay above -wealth_floor in every state, which models an
    admissibility constraint and can push the price above the dual value.
    "CU" re-derives the cone from separating vertex densities by double
    description and solves a projection program on those generators, so it
    shares no representation with the strategy route.
    """
    if cone_choice not in _CONE_CHOICES:
        raise ValidationError("unknown cone choice", got=cone_choice)
    x, label = _payoff(m, claim)
    if cone_choice == "Kadm":
        if wealth_floor is None or wealth_floor < 0:
            raise ValidationError("Kadm pricing needs a nonnegative "
                                  "wealth_floor")
    elif wealth_floor is not None:
        raise ValidationError("wealth_floor only applies to the Kadm "
                              "cone choice")

    if cone_choice == "CU":
        try:
            poly = separating_polytope(m)
        except NoMeasure as exc:
            raise EmptyMeasureSet("no separating measure: conic route "
                                  "has an empty dual cone",
                                  **exc.details) from exc
        if poly.vertices is None:
            raise DimensionError("conic route needs enumerated polytope "
                                 "vertices", n_states=m.n_states)
        dens = poly.vertex_densities()
        cone = ensure_generators(
            PolyCone(dim=m.n_states, weights=m.reference_probabilities,
                     halfspaces=dens))
        price, lam = _conic_price(cone, x)
        return PrimalCertificate(price=price, cone_choice="CU",
                                 wealth_floor=None, strategy=None,
                                 hedge=None, slack=None,
                                 generator_coefficients=lam,
                                 status="optimal")

    g = gains_space(m).generators
    n_g = g.shape[0]
    n = m.n_states
    # variables: initial capital, then one holding per gains generator
    cols = np.hstack([np.ones((n, 1)), g.T]) if n_g else np.ones((n, 1))
    a_ub = [-cols]
    b_ub = [-x]
    if cone_choice == "Kadm":
        a_ub.append(-cols)
        b_ub.append(np.full(n, float(wealth_floor)))
    c = np.zeros(1 + n_g)
    c[0] = 1.0
    res = linprog_min(c, A_ub=np.vstack(a_ub), b_ub=np.concatenate(b_ub),
                      free=np.ones(1 + n_g, dtype=bool))
    if res.status == "unbounded":
        raise UnboundedPrice("price unbounded below: the market admits "
                             "arbitrage and no separating measure exists",
                             claim=label)
    if res.status != "optimal":
        raise ValidationError("primal price program failed",
                              status=res.status)
    capital = float(res.x[0])
    theta = res.x[1:] if n_g else np.zeros(0)
    hedge = capital * np.ones(n) + (g.T @ theta if n_g else np.zeros(n))
    slack = hedge - x
    if float(np.min(slack)) < -1e-7 * max(1.0, float(np.max(np.abs(x)))):
        raise ValidationError("primal hedge fails to dominate the claim",
                              worst=float(np.min(slack)))
    return PrimalCertificate(price=capital, cone_choice=cone_choice,
                             wealth_floor=wealth_floor, strategy=theta,
                             hedge=hedge, slack=slack,
                             generator_coefficients=None,
                             status="optimal")


def _lex_min_pick(candidates: np.ndarray) -> int:
    keys = [tuple(np.round(row, 10)) for row in candidates]
    return int(min(range(len(keys)), key=keys.__getitem__))


def suprep_dual(m: MarketModel, claim,
                polytope: MeasurePolytope | None = None,
                pair: ConjugatePair | None = None,
                b: float = 1.0) -> DualCertificate:
    """Largest expectation of the claim over separating measures.

    Small markets scan the polytope vertices, ties resolved toward the
    lexicographically smallest maximizer so the certificate is stable.
    Larger markets hand the maximization to the simplex solver.  When a
    conjugate pair is supplied the maximizing measure is classified
    against the loss entropy family and the verdict is attached.
    """
    x, _ = _payoff(m, claim)
    if polytope is None:
        try:
            polytope = separating_polytope(m)
        except NoMeasure as exc:
            raise EmptyMeasureSet("no separating measure: dual price "
                                  "undefined", **exc.details) from exc
    if polytope.vertices is not None and polytope.vertices.shape[0]:
        verts = polytope.vertices
        vals = verts @ x
        best = float(np.max(vals))
        near = np.where(vals >= best - 1e-10)[0]
        idx = near[_lex_min_pick(verts[near])]
        q = verts[idx]
        method = "vertex_scan"
    else:
        gens = gains_space(m).generators
        rows = [gens] if gens.size else []
        rows.append(np.ones((1, m.n_states)))
        a_eq = np.vstack(rows)
        b_eq = np.zeros(a_eq.shape[0])
        b_eq[-1] = 1.0
        res = linprog_min(-x, A_eq=a_eq, b_eq=b_eq)
        if res.status == "infeasible":
            raise EmptyMeasureSet("no separating measure: dual price "
                                  "undefined")
        if res.status != "optimal":
            raise ValidationError("dual price program failed",
                                  status=res.status)
        q = np.maximum(res.x, 0.0)
        q = q / q.sum()
        best = float(q @ x)
        method = "simplex"
    density = q / m.reference_probabilities
    verdict = None
    if pair is not None:
        rep = classify_measure(
            MeasureDensity.finite(density, m.reference_probabilities),
            pair, m=m, b=b)
        verdict = bool(rep.in_hatMV)
    return DualCertificate(price=best, probabilities=q, density=density,
                           method=method, in_loss_family=verdict)


@dataclass(frozen=True)
class PriceReport:
    claim_label: str
    n_states: int
    cone_choice: str
    wealth_floor: float | None
    primal: PrimalCertificate
    dual: DualCertificate
    gap: float
    tolerance: float
    duality_ok: bool


def price_report(m: MarketModel, claim, cone_choice: str = "KU",
                 wealth_floor: float | None = None,
                 pair: ConjugatePair | None = None,
                 polytope: MeasurePolytope | None = None,
                 tol: float = _GAP_TOL) -> PriceReport:
    """Price a claim both ways and insist the answers agree.

    Without a wealth floor the primal and dual values must match within
    tol (scaled by the price magnitude) or a duality gap error is raised:
    a silent disagreement would mean one of the solvers is wrong.  With a
    floor only weak duality is enforced and the positive gap is reported
    as a finding, not a failure.
    """
    x, label = _payoff(m, claim)
    primal = suprep_primal(m, claim, cone_choice=cone_choice,
                           wealth_floor=wealth_floor)
    dual = suprep_dual(m, claim, polytope=polytope, pair=pair)
    gap = primal.price - dual.price
    scale = max(1.0, abs(primal.price), abs(dual.price))
    if cone_choice == "Kadm":
        ok = gap >= -tol * scale
        if not ok:
            raise DualityGapError(
                "admissible primal fell below the dual value, violating "
                "weak duality", gap=gap, tolerance=tol)
    else:
        ok = abs(gap) <= tol * scale
        if not ok:
            raise DualityGapError(
                "primal and dual prices disagree beyond tolerance",
                primal=primal.price, dual=dual.price, gap=gap,
                tolerance=tol)
    return PriceReport(claim_label=label, n_states=m.n_states,
                       cone_choice=cone_choice, wealth_floor=wealth_floor,
                       primal=primal, dual=dual, gap=gap, tolerance=tol,
                       duality_ok=ok)


def _one_period_config(s0: float, terminal: np.ndarray,
                       probs: np.ndarray) -> dict:
    tree = [{"id": "root", "parent": None, "p": 1.0, "prices": [s0]}]
    for k, (s, p) in enumerate(zip(terminal, probs), start=1):
        tree.append({"id": f"s{k}", "parent": "root", "p": float(p),
                     "prices": [float(s)]})
    return {"assets": 1, "tree": tree}


@dataclass(frozen=True)
class GapStudyResult:
    rows: tuple[dict, ...]
    wealth_floor: float
    weight_ratio: float
    claim_kind: str


def truncation_gap_study(n_values=(10, 100, 1000), wealth_floor: float = 5.0,
                         weight_ratio: float = 0.5, s0: float = 2.0,
                         tol: float = _GAP_TOL) -> GapStudyResult:
    """Admissibility gaps on growing truncations of a countable market.

    Each market has one period and states k = 1..N with asset price k,
    weighted by a truncated geometric law.  The claim shorts the asset,
    so its downside grows with N while the dual value stays put.  Under a
    wealth floor the primal must lift its price to respect the floor in
    the deep states, and the recorded gap grows toward the claim's
    bounded-below defect.  Replicable truncations (N small enough that
    the floor never binds) show a zero gap, which is the sanity anchor.
    """
    if not (0 < weight_ratio < 1):
        raise ValidationError("weight_ratio must lie in (0, 1)")
    if wealth_floor < 0:
        raise ValidationError("wealth_floor must be nonnegative")
    rows = []
    for n in n_values:
        n = int(n)
        if n < 2:
            raise ValidationError("each truncation needs at least two "
                                  "states", got=n)
        ks = np.arange(1, n + 1, dtype=float)
        w = weight_ratio ** ks
        total = float(w.sum())
        if not np.isfinite(total) or total <= 0:
            raise ValidationError("truncated weights do not normalize",
                                  n_states=n)
        probs = w / total
        if not (ks[0] < s0 < ks[-1]):
            raise ValidationError("initial price leaves no separating "
                                  "measure for this truncation", s0=s0)
        m = build_market(_one_period_config(s0, ks, probs))
        claim = Claim(payoff=-ks, label="short_asset")
        admissible = suprep_primal(m, claim, cone_choice="Kadm",
                                   wealth_floor=wealth_floor)
        unconstrained = suprep_primal(m, claim, cone_choice="KU")
        dual = suprep_dual(m, claim)
        gap = admissible.price - dual.price
        rows.append({
            "n_states": n,
            "primal_admissible": float(admissible.price),
            "primal_unconstrained": float(unconstrained.price),
            "dual": float(dual.price),
            "gap": float(gap),
            "replicable": bool(abs(gap) <= tol),
        })
    return GapStudyResult(rows=tuple(rows), wealth_floor=float(wealth_floor),
                          weight_ratio=float(weight_ratio),
                          claim_kind="short_asset")
