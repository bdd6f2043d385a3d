"""Command line surface.

Eight subcommands glue the modules together: price, dual,
verify-duality, verify-representation, utility-check, entropy-classify,
polar and gap-study.  Every run emits exactly one JSON report on stdout
(or to --output) and a one line human rendering of that same report on
stderr.  Exit codes: 0 success, 1 input or parse error, 2 verification
failure (a chain equality or gap assertion was violated; the witness is
in the report).

Reports are deterministic: same inputs and seed give byte identical
JSON.  All emitted documents carry schema_version 1 and re-validate
against the schema files shipped with the package.
"""

from __future__ import annotations

import argparse
import csv
import functools
import json
import os
import sys
from dataclasses import dataclass
from importlib import resources

import numpy as np
import jsonschema

from .cones import cone_from_config, cone_summary, polar
from .errors import (DualityGapError, NonInada, ParseError, SuperhedgeError,
                     ValidationError)
from .market import build_market, countable_from_config, make_claim
from .measures import classify_measure, MeasureDensity, separating_polytope
from .pricing import price_report, suprep_dual, truncation_gap_study
from .utility import (asymptotic_elasticity_minus, build_utility,
                      check_inada, conjugate, growth_constants,
                      utility_from_table)

_DEFAULT_TOL = 1e-7
_DEFAULT_SEED = 42
_PROBE_POINTS = (0.25, 0.5, 1.0, 2.0, 4.0)

_REPORT_SCHEMAS = {
    "price": "price_report",
    "dual": "dual_report",
    "verify-duality": "duality_report",
    "verify-representation": "representation_report",
    "utility-check": "utility_report",
    "entropy-classify": "entropy_report",
    "polar": "polar_report",
    "gap-study": "gap_study_report",
}


@dataclass(frozen=True)
class RunConfig:
    """Resolved invocation: one command plus its inputs and knobs."""

    command: str
    market: str | None = None
    claim: str | None = None
    utility: str | None = None
    measure: str | None = None
    cone_path: str | None = None
    cone_choice: str = "KU"
    wealth_floor: float | None = None
    b: float = 1.0
    n_max: int | None = None
    alpha: float = 2.0
    n_values: tuple[int, ...] = (10, 100, 1000)
    weight_ratio: float = 0.5
    tol: float = _DEFAULT_TOL
    seed: int = _DEFAULT_SEED
    output: str | None = None

    def __post_init__(self):
        if not (np.isfinite(self.tol) and self.tol > 0):
            raise ValidationError("tolerance must be a positive number",
                                  tol=self.tol)
        if not (np.isfinite(self.b) and self.b > 0):
            raise ValidationError("entropy cutoff b must be positive",
                                  b=self.b)


# ---------------------------------------------------------------------------
# schemas and file loading
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def _schema(name: str) -> dict:
    path = resources.files("superhedge").joinpath(f"schemas/{name}.json")
    return json.loads(path.read_text())


def _shape_errors(doc, name: str) -> list[str]:
    validator = jsonschema.Draft202012Validator(_schema(name))
    out = []
    for err in sorted(validator.iter_errors(doc), key=str):
        where = err.json_path if err.json_path != "$" else "$ (document)"
        out.append(f"{where}: {err.message}")
    return out


def _load_json(path: str):
    try:
        with open(path, "r") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno} "
                         f"column {exc.colno}: {exc.msg}") from exc


def _checked(doc, name: str, path: str):
    errs = _shape_errors(doc, name)
    if errs:
        raise ParseError(f"{path} fails the {name} schema: "
                         + "; ".join(errs))
    return doc


def _infer_schema(doc) -> str | None:
    if not isinstance(doc, dict):
        return None
    if "error" in doc:
        return "error_report"
    if "command" in doc:
        return _REPORT_SCHEMAS.get(doc["command"])
    if "tree" in doc:
        return "market"
    if "type" in doc:
        return "claim"
    if "density" in doc or "countable" in doc:
        return "measure"
    if "kind" in doc:
        return "utility"
    if "dim" in doc:
        return "cone"
    return None


def schema_validate(path: str, kind: str | None = None) -> list[str]:
    """Validate a JSON file; returns a list of diagnostics, empty when ok.

    Shape problems are reported with their JSON path.  When the shape is
    fine the corresponding domain constructor runs too, so semantic
    breakage (orphan tree nodes, densities that fail normalization) is
    caught here as well.
    """
    doc = _load_json(path)
    if kind is None:
        kind = _infer_schema(doc)
        if kind is None:
            return ["unrecognized document: no known schema matches"]
    errs = _shape_errors(doc, kind)
    if errs:
        return errs
    try:
        if kind == "market":
            build_market(doc)
        elif kind == "measure":
            _measure_from_doc(doc, None)
        elif kind == "utility":
            build_utility(doc)
        elif kind == "cone":
            cone_from_config(doc)
        # claims need a market for dimension checks; shape-only here
    except SuperhedgeError as exc:
        return [f"$ (document): {exc.message or exc.code}"]
    return []


def _load_market(path: str):
    doc = _checked(_load_json(path), "market", path)
    return build_market(doc)


def _load_claim(m, path: str):
    doc = _checked(_load_json(path), "claim", path)
    return make_claim(m, doc)


def _utility_from_csv(path: str):
    xs, us, ups = [], [], []
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [f.strip() for f in
                                             reader.fieldnames] != \
                    ["x", "u", "uprime"]:
                raise ParseError(f"{path}: expected CSV header x,u,uprime",
                                 got=reader.fieldnames)
            for i, row in enumerate(reader, start=2):
                try:
                    xs.append(float(row["x"]))
                    us.append(float(row["u"]))
                    ups.append(float(row["uprime"]))
                except (TypeError, ValueError, KeyError) as exc:
                    raise ParseError(f"{path}: bad number on line {i}"
                                     ) from exc
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return utility_from_table(np.array(xs), np.array(us), np.array(ups))


def _load_utility(path: str):
    if path.endswith(".csv"):
        return _utility_from_csv(path)
    doc = _checked(_load_json(path), "utility", path)
    return build_utility(doc)


def _measure_from_doc(doc: dict, m):
    if "density" in doc:
        z = np.asarray(doc["density"], dtype=float)
        if m is not None:
            weights = m.reference_probabilities
        else:
            weights = np.full(z.shape[0], 1.0 / max(z.shape[0], 1))
        return MeasureDensity.finite(z, weights)
    model = countable_from_config(doc)
    if model.q_gen is None:
        raise ValidationError("countable measure needs a 'q' weight spec")
    return MeasureDensity.countable(model)


def _load_measure(path: str, m):
    doc = _checked(_load_json(path), "measure", path)
    return _measure_from_doc(doc, m)


def _load_cone(path: str):
    doc = _checked(_load_json(path), "cone", path)
    return cone_from_config(doc)


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------

def _jsonable(obj):
    """Recursively coerce to JSON types; non-finite numbers become null."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else None
    return obj


def _emit(report: dict, output: str | None) -> None:
    text = json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _say(line: str) -> None:
    print(line, file=sys.stderr)


def _verdict_dict(v) -> dict:
    return {"value": v.value, "verdict": v.verdict,
            "n_terms": v.n_terms, "partial_sum": v.partial_sum}


# ---------------------------------------------------------------------------
# command handlers: each returns (report, verification_failed)
# ---------------------------------------------------------------------------

def _cmd_price(cfg: RunConfig):
    m = _load_market(cfg.market)
    claim = _load_claim(m, cfg.claim)
    pair = conjugate(_load_utility(cfg.utility)) if cfg.utility else None
    poly = separating_polytope(m)
    rep = price_report(m, claim, cone_choice=cfg.cone_choice,
                       wealth_floor=cfg.wealth_floor, pair=pair,
                       polytope=poly, tol=cfg.tol)
    report = {
        "schema_version": 1,
        "command": "price",
        "claim_label": rep.claim_label,
        "n_states": rep.n_states,
        "cone_choice": rep.cone_choice,
        "wealth_floor": rep.wealth_floor,
        "tolerance": rep.tolerance,
        "primal": rep.primal.price,
        "dual": rep.dual.price,
        "gap": rep.gap,
        "duality_ok": rep.duality_ok,
        "strategy": rep.primal.strategy,
        "hedge": rep.primal.hedge,
        "slack": rep.primal.slack,
        "generator_coefficients": rep.primal.generator_coefficients,
        "dual_vertex": rep.dual.probabilities,
        "dual_density": rep.dual.density,
        "dual_method": rep.dual.method,
        "in_loss_family": rep.dual.in_loss_family,
    }
    _say(f"price[{rep.claim_label}] primal={rep.primal.price:.10g} "
         f"dual={rep.dual.price:.10g} gap={rep.gap:.3g} "
         f"({'ok' if rep.duality_ok else 'VIOLATED'})")
    return report, False


def _cmd_dual(cfg: RunConfig):
    m = _load_market(cfg.market)
    claim = _load_claim(m, cfg.claim)
    pair = conjugate(_load_utility(cfg.utility)) if cfg.utility else None
    cert = suprep_dual(m, claim, pair=pair, b=cfg.b)
    report = {
        "schema_version": 1,
        "command": "dual",
        "claim_label": claim.label,
        "n_states": m.n_states,
        "price": cert.price,
        "dual_vertex": cert.probabilities,
        "dual_density": cert.density,
        "dual_method": cert.method,
        "in_loss_family": cert.in_loss_family,
    }
    _say(f"dual[{claim.label}] price={cert.price:.10g} "
         f"method={cert.method}")
    return report, False


def _cmd_verify_duality(cfg: RunConfig):
    from .cones import verify_duality_chain

    m = _load_market(cfg.market)
    pair = conjugate(_load_utility(cfg.utility)) if cfg.utility else None
    chain = verify_duality_chain(m, pair=pair, b=cfg.b,
                                 rng=np.random.default_rng(cfg.seed),
                                 tol=cfg.tol)
    report = {
        "schema_version": 1,
        "command": "verify-duality",
        "n_states": m.n_states,
        "tolerance": cfg.tol,
        "seed": cfg.seed,
        "entries": [{
            "name": e.name,
            "description": e.description,
            "max_violation": e.max_violation,
            "n_checks": e.n_checks,
            "ok": e.ok,
        } for e in chain.entries],
        "claims_checked": chain.claims_checked,
        "all_ok": chain.all_ok,
    }
    n_ok = sum(1 for e in chain.entries if e.ok)
    _say(f"verify-duality: {n_ok}/{len(chain.entries)} chain identities "
         f"hold ({chain.claims_checked} membership checks)")
    return report, not chain.all_ok


def _cmd_verify_representation(cfg: RunConfig):
    from .cones import verify_representation

    m = _load_market(cfg.market)
    rr = verify_representation(m, rng=np.random.default_rng(cfg.seed),
                               tol=cfg.tol)
    report = {
        "schema_version": 1,
        "command": "verify-representation",
        "n_states": m.n_states,
        "tolerance": cfg.tol,
        "seed": cfg.seed,
        "n_measures": rr.n_measures,
        "sampled_measures_only": rr.sampled_measures_only,
        "max_gap": rr.max_gap,
        "all_consistent": rr.all_consistent,
        "claims": [{
            "label": c.label,
            "projection_price": c.projection_price,
            "dual_maximum": c.dual_maximum,
            "in_cone": c.in_cone,
            "dual_nonpositive": c.dual_nonpositive,
            "consistent": c.consistent,
            "separating_density": c.separating_density,
        } for c in rr.claims],
    }
    n_ok = sum(1 for c in rr.claims if c.consistent)
    _say(f"verify-representation: {n_ok}/{len(rr.claims)} claims "
         f"consistent, max gap {rr.max_gap:.3g}")
    return report, not rr.all_consistent


def _cmd_utility_check(cfg: RunConfig):
    u = _load_utility(cfg.utility)
    u.validate()
    inada = check_inada(u)
    rae = asymptotic_elasticity_minus(u)
    pair = conjugate(u)
    probes = []
    for y in _PROBE_POINTS:
        try:
            probes.append({"y": y, "v": float(pair.v(y)),
                           "v_prime": float(pair.v_prime(y))})
        except NonInada:
            # tabulated marginals cover a bounded range; probes outside it
            # are reported as unavailable rather than failing the command
            probes.append({"y": y, "v": None, "v_prime": None})
    growth = None
    if rae.status == "holds":
        cert = growth_constants(u, alpha=cfg.alpha)
        growth = {"alpha": cert.alpha, "b": cert.b,
                  "d_const": cert.d_const,
                  "grid_size": cert.verification_grid_size}
    a = u.critical_wealth
    report = {
        "schema_version": 1,
        "command": "utility-check",
        "kind": u.kind,
        "critical_wealth": None if not np.isfinite(a) else float(a),
        "params": dict(u.params),
        "inada": {
            "lower_ok": inada.lower_limit_ok,
            "upper_ok": inada.upper_limit_ok,
            "lower_max": inada.lower_max,
            "upper_min": inada.upper_min,
        },
        "rae": {"status": rae.status, "estimate": rae.estimate},
        "conjugate": {"closed_form": pair.closed_form, "probes": probes},
        "growth": growth,
    }
    _say(f"utility-check[{u.kind}]: inada "
         f"{'+' if inada.lower_limit_ok else '-'}"
         f"{'+' if inada.upper_limit_ok else '-'}, rae {rae.status}"
         + (f" (estimate {rae.estimate:.4g})"
            if rae.estimate is not None else ""))
    return report, False


def _cmd_entropy_classify(cfg: RunConfig):
    pair = conjugate(_load_utility(cfg.utility))
    m = _load_market(cfg.market) if cfg.market else None
    q = _load_measure(cfg.measure, m)
    rep = classify_measure(q, pair, m=m, b=cfg.b, n_max=cfg.n_max)
    report = {
        "schema_version": 1,
        "command": "entropy-classify",
        "b": rep.b_used,
        "n_max": cfg.n_max,
        "method": rep.method,
        "loss_entropy": _verdict_dict(rep.loss_entropy),
        "full_entropy": _verdict_dict(rep.full_entropy),
        "in_M1": rep.in_M1,
        "in_hatMV": rep.in_hatMV,
        "in_MV": rep.in_MV,
    }
    _say(f"entropy-classify: loss={rep.loss_entropy.verdict} "
         f"full={rep.full_entropy.verdict} M1={rep.in_M1} "
         f"hatMV={rep.in_hatMV} MV={rep.in_MV}")
    return report, False


def _cmd_polar(cfg: RunConfig):
    c = _load_cone(cfg.cone_path)
    p = polar(c)
    report = {
        "schema_version": 1,
        "command": "polar",
        "cone": cone_summary(c),
        "polar": cone_summary(p),
    }
    _say(f"polar: dim {c.dim}, "
         f"{len(report['polar']['rays'])} rays / "
         f"{len(report['polar']['lines'])} lines in the polar")
    return report, False


def _cmd_gap_study(cfg: RunConfig):
    res = truncation_gap_study(n_values=cfg.n_values,
                               wealth_floor=cfg.wealth_floor
                               if cfg.wealth_floor is not None else 5.0,
                               weight_ratio=cfg.weight_ratio, tol=cfg.tol)
    report = {
        "schema_version": 1,
        "command": "gap-study",
        "wealth_floor": res.wealth_floor,
        "weight_ratio": res.weight_ratio,
        "claim_kind": res.claim_kind,
        "rows": [dict(r) for r in res.rows],
    }
    last = res.rows[-1]
    _say(f"gap-study: {len(res.rows)} truncations, final gap "
         f"{last['gap']:.6g} at N={last['n_states']}")
    return report, False


_HANDLERS = {
    "price": _cmd_price,
    "dual": _cmd_dual,
    "verify-duality": _cmd_verify_duality,
    "verify-representation": _cmd_verify_representation,
    "utility-check": _cmd_utility_check,
    "entropy-classify": _cmd_entropy_classify,
    "polar": _cmd_polar,
    "gap-study": _cmd_gap_study,
}


def run(cfg: RunConfig) -> int:
    """Execute one command; emits a report and returns the exit code."""
    try:
        report, failed = _HANDLERS[cfg.command](cfg)
        _emit(report, cfg.output)
        return 2 if failed else 0
    except SuperhedgeError as exc:
        err = {"code": exc.code, "message": exc.message or exc.code}
        details = _jsonable(exc.details)
        if details:
            err["details"] = details
        _emit({"schema_version": 1, "error": err}, cfg.output)
        _say(f"error[{exc.code}]: {exc.message}")
        return 2 if isinstance(exc, DualityGapError) else 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="superhedge",
                     description="Super-replication pricing and duality "
                                 "verification on finite state markets.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=False):
        p.add_argument("--tol", type=float, default=None,
                       help="tolerance override (default: SUPERHEDGE_TOL "
                            "env var or 1e-7)")
        p.add_argument("--output", default=None,
                       help="write the JSON report here instead of stdout")
        if seed:
            p.add_argument("--seed", type=int, default=_DEFAULT_SEED,
                           help="seed for randomized batteries")

    p = sub.add_parser("price", help="primal and dual price of a claim")
    p.add_argument("--market", required=True)
    p.add_argument("--claim", required=True)
    p.add_argument("--utility", default=None,
                   help="classify the maximizing measure against this "
                        "utility's loss entropy family")
    p.add_argument("--cone", dest="cone_choice", default="KU",
                   choices=["KU", "CU", "Kadm"])
    p.add_argument("--wealth-floor", type=float, default=None)
    common(p)

    p = sub.add_parser("dual", help="dual price only, with the "
                                    "maximizing measure")
    p.add_argument("--market", required=True)
    p.add_argument("--claim", required=True)
    p.add_argument("--utility", default=None)
    p.add_argument("--b", type=float, default=1.0)
    common(p)

    p = sub.add_parser("verify-duality",
                       help="certify the polar cone chain on a market")
    p.add_argument("--market", required=True)
    p.add_argument("--utility", default=None)
    p.add_argument("--b", type=float, default=1.0)
    common(p, seed=True)

    p = sub.add_parser("verify-representation",
                       help="dual description of the claims cone on "
                            "test claims")
    p.add_argument("--market", required=True)
    common(p, seed=True)

    p = sub.add_parser("utility-check",
                       help="validate a utility and analyze it")
    p.add_argument("--utility", required=True,
                   help="JSON catalog spec or CSV table x,u,uprime")
    p.add_argument("--alpha", type=float, default=2.0,
                   help="scale factor for the conjugate growth bound")
    common(p)

    p = sub.add_parser("entropy-classify",
                       help="classify a measure against the entropy "
                            "families")
    p.add_argument("--utility", required=True)
    p.add_argument("--measure", required=True)
    p.add_argument("--market", default=None)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--n-max", type=int, default=None)
    common(p)

    p = sub.add_parser("polar", help="polar of a cone, both "
                                     "representations")
    p.add_argument("--cone", dest="cone_path", required=True)
    common(p)

    p = sub.add_parser("gap-study",
                       help="admissibility gaps on growing market "
                            "truncations")
    p.add_argument("--n-values", default="10,100,1000",
                   help="comma separated truncation sizes")
    p.add_argument("--wealth-floor", type=float, default=5.0)
    p.add_argument("--ratio", dest="weight_ratio", type=float,
                   default=0.5)
    common(p)
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    tol = args.tol
    if tol is None:
        raw = os.environ.get("SUPERHEDGE_TOL")
        if raw is not None:
            try:
                tol = float(raw)
            except ValueError as exc:
                raise ValidationError(
                    f"SUPERHEDGE_TOL is not a number: {raw!r}") from exc
        else:
            tol = _DEFAULT_TOL
    fields = {"command": args.command, "tol": tol,
              "output": getattr(args, "output", None)}
    for name in ("market", "claim", "utility", "measure", "cone_path",
                 "cone_choice", "wealth_floor", "b", "n_max", "alpha",
                 "weight_ratio", "seed"):
        if hasattr(args, name):
            fields[name] = getattr(args, name)
    if hasattr(args, "n_values"):
        try:
            values = tuple(int(v) for v in
                           str(args.n_values).split(",") if v.strip())
        except ValueError as exc:
            raise ValidationError(
                f"bad --n-values list: {args.n_values!r}") from exc
        if not values:
            raise ValidationError("--n-values must name at least one "
                                  "truncation size")
        fields["n_values"] = values
    return RunConfig(**fields)


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        cfg = _config_from_args(args)
    except SuperhedgeError as exc:
        err = {"code": exc.code, "message": exc.message or exc.code}
        sys.stdout.write(json.dumps(
            {"schema_version": 1, "error": err},
            sort_keys=True, indent=2) + "\n")
        _say(f"error[{exc.code}]: {exc.message}")
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
