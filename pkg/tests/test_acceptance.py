"""Acceptance gate: ten criteria, one test and one pass/fail line each.

Each test states its tolerance and, where promised, its runtime budget.
They only use public package API plus the independent oracles in
helpers.py, so a pass here certifies the shipped behavior end to end.
"""

import json
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import FIXTURES, TRINOMIAL_CONFIG
from helpers import conjugate_oracle_setup, legendre_oracle
from superhedge import (CountableModel, MeasureDensity, PolyCone,
                        asymptotic_elasticity_minus, bipolar_check,
                        build_CU, build_KU, build_market, build_utility,
                        classify_measure, conjugate, ensure_generators,
                        exponential_utility, geometric_weights,
                        growth_constants, loss_entropy, make_claim, member,
                        mhatv_minus_mv_witness, polar, powerlaw_weights,
                        random_claim, random_market, separating_polytope,
                        suprep_dual, suprep_primal, v_plus,
                        verify_representation)

_E = float(np.e)


def _elapsed_ok(t0, budget, label):
    dt = time.perf_counter() - t0
    assert dt < budget, f"{label} took {dt:.2f}s, budget {budget}s"
    return dt


def test_criterion_01_trinomial_hand_values():
    t0 = time.perf_counter()
    m = build_market(TRINOMIAL_CONFIG)
    cases = [
        (make_claim(m, {"type": "call", "strike": 1.0}), 1.0 / 3.0),
        (make_claim(m, {"type": "put", "strike": 1.0}), 1.0 / 3.0),
        (np.array([1.0, 0.0, -0.5]), 0.0),
    ]
    for claim, want in cases:
        assert suprep_primal(m, claim).price == pytest.approx(want,
                                                              abs=1e-9)
        assert suprep_dual(m, claim).price == pytest.approx(want, abs=1e-9)
    _elapsed_ok(t0, 1.0, "trinomial hand values")


def test_criterion_02_strong_duality_battery():
    t0 = time.perf_counter()
    worst, n_cases = 0.0, 0
    for seed in range(1, 51):
        m = random_market(seed)
        assert len(m.terminal_states) <= 12
        pol = separating_polytope(m)
        rng = np.random.default_rng(1000 + seed)
        for _ in range(10):
            claim = random_claim(m, rng)
            p = suprep_primal(m, claim).price
            d = suprep_dual(m, claim, polytope=pol).price
            worst = max(worst, abs(p - d))
            n_cases += 1
    assert n_cases == 500
    assert worst <= 1e-7, f"worst primal-dual gap {worst:.3e}"
    _elapsed_ok(t0, 30.0, "strong duality battery")


def test_criterion_03_duality_chain_on_fifty_markets():
    t0 = time.perf_counter()
    for seed in range(1, 51):
        m = random_market(seed)
        n = len(m.terminal_states)
        kup = ensure_generators(polar(build_KU(m)))
        vd = np.asarray(separating_polytope(m).vertex_densities())
        density_cone = PolyCone(dim=n, weights=m.reference_probabilities,
                                generators=vd)
        for g in kup.generators:
            ok, viol = member(density_cone, g, tol=1e-8)
            assert ok, f"seed {seed}: polar ray leaves the density " \
                       f"cone by {viol:.2e}"
        for v in vd:
            ok, viol = member(kup, v, tol=1e-8)
            assert ok, f"seed {seed}: vertex density leaves the polar " \
                       f"by {viol:.2e}"
        cu, rep = build_CU(m)
        assert rep.ok, f"seed {seed}: the two claim-cone constructions " \
                       f"disagree"
        cup = ensure_generators(polar(cu))
        for g in cup.generators:
            ok, viol = member(kup, g, tol=1e-8)
            assert ok, f"seed {seed}: closed-cone polar not inside the " \
                       f"raw polar, off by {viol:.2e}"
        for g in kup.generators:
            ok, viol = member(cup, g, tol=1e-8)
            assert ok, f"seed {seed}: raw polar not inside the " \
                       f"closed-cone polar, off by {viol:.2e}"
    _elapsed_ok(t0, 60.0, "duality chain battery")


def test_criterion_04_bipolar_battery():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    for i in range(200):
        dim = int(rng.integers(1, 7))
        n_gen = int(rng.integers(1, 13))
        cone = PolyCone(dim=dim,
                        weights=rng.uniform(0.2, 2.0, size=dim),
                        generators=rng.normal(size=(n_gen, dim)),
                        linear_flags=rng.random(n_gen) < 0.25)
        rep = bipolar_check(cone, rng=rng, tol=1e-8)
        assert rep.ok, (f"cone {i} (dim {dim}, {n_gen} generators): "
                        f"violations {rep.max_violation_forward:.2e} / "
                        f"{rep.max_violation_reverse:.2e}")
    _elapsed_ok(t0, 30.0, "bipolar battery")


def test_criterion_05_conjugate_catalog_against_oracle():
    ys = np.geomspace(1e-4, 1e4, 1000)
    rng = np.random.default_rng(5)
    for kind in ("exponential", "log", "power", "glued_unbounded",
                 "slow_loss"):
        u, g, grid = conjugate_oracle_setup(kind)
        pair = conjugate(u)
        got = pair.v(ys)
        want = legendre_oracle(g, ys, grid)
        with np.errstate(invalid="ignore"):
            both_inf = np.isinf(got) & np.isinf(want) & (got == want)
            rel = np.abs(got - want) / np.maximum(1.0, np.abs(want))
        rel = np.where(both_inf, 0.0, rel)
        assert np.all(np.isfinite(rel)), kind
        assert float(np.max(rel)) < 1e-6, \
            f"{kind}: worst relative error {np.max(rel):.3e}"
        # tangency: the conjugate touches u(x) - x y at x = -v'(y)
        ys_r = np.exp(rng.uniform(np.log(1e-2), np.log(1e2), size=100))
        x_hat = -pair.v_prime(ys_r)
        resid = np.abs(u.u(x_hat) - x_hat * ys_r - pair.v(ys_r))
        scale = np.maximum(1.0, np.abs(pair.v(ys_r)))
        assert float(np.max(resid / scale)) < 1e-9, \
            f"{kind}: tangency residual {np.max(resid / scale):.3e}"


def test_criterion_06_elasticity_classifier():
    statuses = {}
    for kind in ("exponential", "log", "power", "slow_loss"):
        u = build_utility({"kind": kind, "params": {}})
        statuses[kind] = asymptotic_elasticity_minus(u)
    assert statuses["exponential"].status == "holds"
    assert statuses["log"].status == "not_required"
    assert statuses["power"].status == "not_required"
    slow = statuses["slow_loss"]
    assert slow.status == "fails"
    assert slow.estimate == pytest.approx(1.0, abs=1e-2)


def test_criterion_07_growth_certificate():
    u = exponential_utility()
    pair = conjugate(u)
    for alpha in (1.5, 2.0, 4.0):
        cert = growth_constants(u, alpha)
        ys = np.geomspace(cert.b, 1e6, 10_000)
        violations = int(np.sum(pair.v(alpha * ys) > cert.d_const
                                * pair.v(ys)))
        assert violations == 0, f"alpha {alpha}: {violations} violations"
    cert = growth_constants(u, 2.0, b=_E)
    ratio = cert.d_const / 1.05
    assert ratio == pytest.approx(1.0 + 2.0 * _E * np.log(2.0), rel=1e-9)
    assert round(ratio, 2) == 4.77
    assert cert.d_const == pytest.approx(5.0, abs=0.05)
    ys = np.geomspace(_E, 1e6, 10_000)
    assert not np.any(pair.v(2.0 * ys) > cert.d_const * pair.v(ys))


def _geometric_density(r, q_gen=None):
    model = CountableModel(p_gen=geometric_weights(0.5),
                           q_gen=q_gen or geometric_weights(r),
                           truncation_default=512)
    return MeasureDensity.countable(model)


def test_criterion_08_entropy_classification():
    pair = conjugate(exponential_utility())
    glued = conjugate(build_utility({"kind": "glued_unbounded",
                                     "params": {}}))
    # (i) geometric reference, geometric candidate at half the ratio
    d_fin = _geometric_density(0.25)
    assert loss_entropy(d_fin, pair).verdict == "finite"
    # (ii) dyadic reference, inverse-square candidate
    d_inf = _geometric_density(None, q_gen=powerlaw_weights(2.0))
    assert loss_entropy(d_inf, pair).verdict == "infinite"
    # (iii) the witness lies in the loss family but not the full one
    _, witness = mhatv_minus_mv_witness(glued)
    rep = classify_measure(witness, glued)
    assert rep.in_hatMV and not rep.in_MV
    # (iv) finiteness does not depend on the cutoff
    for d, p in ((d_fin, pair), (d_inf, pair), (witness, glued)):
        flags = [loss_entropy(d, p, b=b).finite
                 for b in (0.5, 1.0, 2.0, 10.0)]
        assert len(set(flags)) == 1, flags
    # (v) mixtures stay in the family with the promised bound
    rng = np.random.default_rng(8)
    for i in range(20):
        r1, r2 = rng.uniform(0.15, 0.85, size=2)
        alpha = float(rng.uniform(0.0, 1.0))
        g1, g2 = geometric_weights(r1), geometric_weights(r2)

        def q_mix(ks, g1=g1, g2=g2, a=alpha):
            return a * g1(ks) + (1.0 - a) * g2(ks)

        for b in (0.5, 1.0):
            l1 = loss_entropy(_geometric_density(r1), pair, b=b)
            l2 = loss_entropy(_geometric_density(r2), pair, b=b)
            lm = loss_entropy(_geometric_density(None, q_gen=q_mix),
                              pair, b=b)
            assert l1.finite and l2.finite and lm.finite, (i, b)
            bound = l1.value + l2.value + float(v_plus(pair, b))
            assert lm.value <= bound + 1e-9, \
                f"mixture {i} at b={b}: {lm.value} > {bound}"


def test_criterion_09_representation_on_random_claims():
    m = build_market(TRINOMIAL_CONFIG)
    rng = np.random.default_rng(99)
    claims = [random_claim(m, rng) for _ in range(100)]
    rep = verify_representation(m, claims=claims,
                                rng=np.random.default_rng(7))
    assert rep.all_consistent
    assert len(rep.claims) == 100
    inside = [c for c in rep.claims if c.in_cone]
    rejected = [c for c in rep.claims if not c.in_cone]
    assert inside and rejected, "battery should split both ways"
    for c in rep.claims:
        assert c.consistent, c.label
        assert c.in_cone == c.dual_nonpositive, c.label
    for c in rejected:
        assert c.separating_density is not None, c.label
        assert c.dual_maximum > 0.0, c.label


def _cli_bytes(*argv):
    env = {k: v for k, v in os.environ.items() if k != "SUPERHEDGE_TOL"}
    proc = subprocess.run([sys.executable, "-m", "superhedge.cli", *argv],
                          capture_output=True, env=env)
    return proc.returncode, proc.stdout


def test_criterion_10_cli_determinism_and_schemas():
    tri = str(FIXTURES / "trinomial.json")
    examples = [
        (("price", "--market", tri,
          "--claim", str(FIXTURES / "call1.json")), 0),
        (("verify-duality", "--market", tri), 0),
        (("price", "--market", str(FIXTURES / "arbitrage.json"),
          "--claim", str(FIXTURES / "any.json")), 1),
    ]
    for argv, want_code in examples:
        code_a, out_a = _cli_bytes(*argv)
        code_b, out_b = _cli_bytes(*argv)
        assert code_a == code_b == want_code, argv
        assert out_a == out_b, f"{argv}: output differs between runs"
    doc = json.loads(_cli_bytes(*examples[0][0])[1])
    assert doc["primal"] == pytest.approx(1.0 / 3.0, abs=1e-9)
    assert doc["dual"] == pytest.approx(1.0 / 3.0, abs=1e-9)
    doc = json.loads(_cli_bytes(*examples[1][0])[1])
    assert doc["all_ok"] is True
    doc = json.loads(_cli_bytes(*examples[2][0])[1])
    assert doc["error"]["code"] == "NoMeasure"

    from superhedge.cli import schema_validate
    bad = {}
    for path in sorted(FIXTURES.rglob("*.json")):
        errs = schema_validate(str(path))
        if errs:
            bad[path.name] = errs
    assert bad == {}
