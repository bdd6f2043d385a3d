"""Cone representations, double description, polars, duality certificates."""

import numpy as np
import pytest

from conftest import load_fixture
from superhedge import (Claim, DimensionError, EmptyMeasureSet,
                        ValidationError, bipolar_check, build_CU, build_KU,
                        build_market, cone_from_config, cone_summary,
                        ensure_generators, ensure_halfspaces, member,
                        member_lp, pairing, PolyCone, polar,
                        separating_polytope, verify_duality_chain,
                        verify_representation)

_W3 = np.full(3, 1.0 / 3.0)


def _has_ray(rows, target, tol=1e-9):
    target = np.asarray(target, float)
    target = target / np.linalg.norm(target)
    return any(np.linalg.norm(r / np.linalg.norm(r) - target) <= tol
               for r in rows)


# ---------------------------------------------------------------------------
# construction and the pairing
# ---------------------------------------------------------------------------

def test_polycone_guards():
    with pytest.raises(ValidationError):
        PolyCone(dim=2, weights=np.array([0.5, -0.5]),
                 generators=np.eye(2))
    with pytest.raises(ValidationError):
        PolyCone(dim=2, weights=np.array([0.5, 0.5]))
    with pytest.raises(DimensionError):
        PolyCone(dim=2, weights=np.array([0.5, 0.5]),
                 generators=np.eye(3))
    with pytest.raises(DimensionError):
        PolyCone(dim=2, weights=np.array([0.5, 0.5]),
                 generators=np.eye(2), linear_flags=[True])


def test_pairing_is_weighted():
    w = np.array([0.2, 0.3, 0.5])
    x = np.array([1.0, 2.0, -1.0])
    h = np.array([3.0, 1.0, 2.0])
    assert pairing(w, x, h) == pytest.approx(0.6 + 0.6 - 1.0)


# ---------------------------------------------------------------------------
# double description on hand-checked cones
# ---------------------------------------------------------------------------

def test_square_pyramid_rays_from_halfspaces():
    half = np.array([[1.0, 0.0, -1.0], [-1.0, 0.0, -1.0],
                     [0.0, 1.0, -1.0], [0.0, -1.0, -1.0]])
    c = ensure_generators(PolyCone(dim=3, weights=_W3, halfspaces=half))
    rays = c.generators[~c.linear_flags]
    assert rays.shape[0] == 4
    assert not np.any(c.linear_flags)
    for sx in (1.0, -1.0):
        for sy in (1.0, -1.0):
            assert _has_ray(rays, [sx, sy, 1.0])


def test_orthant_halfspaces_from_generators():
    c = ensure_halfspaces(PolyCone(dim=3, weights=_W3,
                                   generators=np.eye(3)))
    assert c.halfspaces.shape[0] == 3
    assert member(c, [1.0, 2.0, 3.0])[0]
    assert member(c, [0.0, 0.0, 0.0])[0]
    assert not member(c, [-0.1, 1.0, 1.0])[0]


def test_lineality_handling():
    # a full plane plus one ray: the halfspace description must recover
    # exactly the slab orthogonal to the missing directions
    c = cone_from_config(load_fixture("cone/halfplane_with_line.json"))
    ch = ensure_halfspaces(c)
    assert member(ch, [5.0, 0.0, 2.0])[0]
    assert member(ch, [-5.0, 0.0, 0.0])[0]
    assert not member(ch, [0.0, 1e-3, 1.0])[0]
    assert not member(ch, [0.0, 0.0, -1.0])[0]


def test_dimension_cap():
    n = 13
    c = PolyCone(dim=n, weights=np.full(n, 1.0 / n),
                 halfspaces=np.eye(n))
    with pytest.raises(DimensionError):
        ensure_generators(c)


# ---------------------------------------------------------------------------
# polar mechanics
# ---------------------------------------------------------------------------

def test_polar_swaps_representations():
    c = PolyCone(dim=3, weights=_W3, generators=np.eye(3))
    p = polar(c)
    assert p.generators is None
    assert p.halfspaces is not None
    back = polar(ensure_generators(p))
    assert back.halfspaces is not None


def test_polar_of_orthant_is_negative_orthant():
    c = PolyCone(dim=3, weights=_W3, generators=np.eye(3))
    p = ensure_generators(polar(c))
    rays = p.generators[~p.linear_flags]
    assert rays.shape[0] == 3
    for i in range(3):
        e = np.zeros(3)
        e[i] = -1.0
        assert _has_ray(rays, e)


def test_trinomial_polar_rays(trinomial):
    ku = build_KU(trinomial)
    p = ensure_generators(polar(ku))
    rays = p.generators[~p.linear_flags]
    assert rays.shape[0] == 2
    assert _has_ray(rays, [0.0, 1.0, 0.0])
    assert _has_ray(rays, [1.0, 0.0, 2.0])


def test_membership_routes_agree():
    rng = np.random.default_rng(17)
    for _ in range(6):
        dim = int(rng.integers(2, 6))
        gens = rng.normal(size=(int(rng.integers(2, 7)), dim))
        flags = rng.random(gens.shape[0]) < 0.3
        w = rng.uniform(0.1, 1.0, dim)
        c = PolyCone(dim=dim, weights=w / w.sum(), generators=gens,
                     linear_flags=flags)
        lam = rng.exponential(1.0, size=(8, gens.shape[0]))
        inside = lam @ gens
        outside = rng.normal(size=(8, dim)) * 3.0
        for x in np.vstack([inside, outside]):
            a = member(c, x)[0]
            b = member_lp(c, x)[0]
            assert a == b


def test_bipolar_on_fixture_cones(fixtures_dir):
    for name in ("cone/orthant3.json", "cone/square_pyramid.json",
                 "cone/halfplane_with_line.json", "cone/from_halfspaces.json"):
        c = cone_from_config(load_fixture(name))
        rep = bipolar_check(c, tol=1e-8)
        assert rep.ok, (name, rep)


# ---------------------------------------------------------------------------
# market cones
# ---------------------------------------------------------------------------

def test_build_ku_structure(trinomial):
    ku = build_KU(trinomial)
    assert ku.dim == 3
    assert np.allclose(ku.weights, _W3)
    assert ku.generators.shape == (4, 3)
    assert np.allclose(ku.generators[0], [1.0, 0.0, -0.5])
    assert ku.linear_flags.tolist() == [True, False, False, False]
    # dominated claims: a pure loss is inside, free money is not
    assert member_lp(ku, [-1.0, -1.0, -1.0])[0]
    assert member_lp(ku, [2.0, 0.0, -1.0])[0]       # 2 units of gains
    assert not member_lp(ku, [1.0, 1.0, 1.0])[0]


def test_build_cu_trinomial(trinomial):
    cu, rep = build_CU(trinomial)
    assert rep.ok
    assert rep.n_vertex_densities == 2
    assert rep.max_generator_slack <= 1e-10
    assert rep.max_halfspace_residual <= 1e-10
    uniform = np.full(3, 1.0 / 3.0)
    call = np.array([1.0, 0.0, 0.0])
    assert member(cu, call - uniform)[0]            # shifted by its price
    assert not member(cu, call)[0]
    assert member(cu, np.array([1.0, 0.0, -0.5]))[0]


def test_build_cu_arbitrage_raises():
    m = build_market(load_fixture("arbitrage.json"))
    with pytest.raises(EmptyMeasureSet):
        build_CU(m)


def test_duality_chain_trinomial(trinomial, exp_pair):
    rep = verify_duality_chain(trinomial, pair=exp_pair)
    assert rep.all_ok
    assert [e.name for e in rep.entries] == [
        "claims_polar_is_density_cone",
        "bipolar_recovers_claims_cone",
        "polar_chain_collapses",
        "density_cone_in_separating_family",
        "entropy_cut_keeps_every_vertex",
    ]
    assert all(e.max_violation <= 1e-9 for e in rep.entries)


def test_representation_default_claims(trinomial):
    rep = verify_representation(trinomial)
    assert rep.all_consistent
    assert not rep.sampled_measures_only
    by_label = {c.label: c for c in rep.claims}
    assert by_label["minus_cash"].in_cone
    assert not by_label["plus_cash"].in_cone
    assert by_label["plus_cash"].separating_density is not None
    assert by_label["plus_cash"].dual_maximum == pytest.approx(1.0,
                                                               abs=1e-9)


def test_representation_with_sampled_measures(trinomial):
    pol = separating_polytope(trinomial)
    qs = [pol.vertices[0], 0.5 * (pol.vertices[0] + pol.vertices[1])]
    rep = verify_representation(trinomial, measures=qs)
    assert rep.sampled_measures_only
    assert rep.all_consistent


def test_representation_accepts_raw_vectors(trinomial):
    rep = verify_representation(
        trinomial, claims=[np.array([1.0, 0.0, -0.5]),
                           Claim(payoff=np.ones(3), label="cash")])
    assert rep.all_consistent
    assert rep.claims[0].in_cone
    assert not rep.claims[1].in_cone


# ---------------------------------------------------------------------------
# config and summaries
# ---------------------------------------------------------------------------

def test_cone_from_config_guards():
    with pytest.raises(ValidationError):
        cone_from_config({"generators": [[1.0]]})
    with pytest.raises(ValidationError):
        cone_from_config({"dim": 2, "linear": [True]})
    with pytest.raises(DimensionError):
        cone_from_config({"dim": 2, "generators": [[1.0, 0.0]],
                          "linear": [True, False]})
    with pytest.raises(ValidationError):
        cone_from_config({"dim": 2})


def test_cone_summary_round_trip(fixtures_dir):
    c = cone_from_config(load_fixture("cone/square_pyramid.json"))
    s = cone_summary(c)
    assert s["dim"] == 3
    assert len(s["rays"]) == 4
    assert len(s["lines"]) == 0
    assert len(s["halfspaces"]) == 4
    rebuilt = cone_from_config({"dim": 3, "generators": s["rays"],
                                "weights": s["weights"]})
    for ray in c.generators:
        assert member_lp(rebuilt, ray)[0]
