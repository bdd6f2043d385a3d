"""Finite event-tree markets and countable-state weight models.

A market is a rooted tree of nodes carrying conditional probabilities and
price vectors.  Terminal nodes are the states of the world; the gains space
is spanned by one generator per (non-terminal node, asset), the terminal
payoff of holding one unit of that asset over that single step.  The span
of the generators over real coefficients is exactly the set of attainable
zero-cost terminal wealths.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import zeta

from .errors import DimensionError, ValidationError

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class TreeNode:
    id: str
    parent: str | None
    p: float                    # conditional probability given the parent
    prices: tuple[float, ...]   # one entry per asset
    t: int                      # depth, root at 0


@dataclass(frozen=True)
class MarketModel:
    assets: int
    nodes: dict
    children: dict
    root: str
    terminal_states: tuple[str, ...]
    reference_probabilities: np.ndarray   # full-support, sums to one

    @property
    def n_states(self) -> int:
        return len(self.terminal_states)

    def path(self, node_id: str) -> list[str]:
        """Node ids from the root down to node_id inclusive."""
        chain = []
        cur = node_id
        while cur is not None:
            chain.append(cur)
            cur = self.nodes[cur].parent
        return chain[::-1]


@dataclass(frozen=True)
class Claim:
    payoff: np.ndarray
    label: str = "vector"


@dataclass(frozen=True)
class GainsSpace:
    """Generators of attainable zero-cost terminal wealths.

    generators has shape (n_generators, n_states); labels pairs each row
    with its (node_id, asset_index).  All generators are linear directions,
    holdings may take either sign.
    """

    generators: np.ndarray
    labels: tuple


def build_market(config: dict) -> MarketModel:
    """Build and validate a market from its config mapping."""
    if not isinstance(config, dict):
        raise ValidationError("market config must be a mapping")
    try:
        assets = int(config["assets"])
        tree = config["tree"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"market config missing field: {exc}") from exc
    if assets < 0:
        raise ValidationError("asset count must be nonnegative", assets=assets)
    if not tree:
        raise ValidationError("market tree is empty")

    nodes: dict[str, TreeNode] = {}
    order: list[str] = []
    root = None
    for raw in tree:
        nid = str(raw["id"])
        if nid in nodes:
            raise ValidationError(f"duplicate node id '{nid}'")
        parent = raw.get("parent")
        parent = None if parent is None else str(parent)
        prices = tuple(float(s) for s in raw["prices"])
        if len(prices) != assets:
            raise DimensionError(
                f"node '{nid}' has {len(prices)} prices, expected {assets}")
        p = float(raw["p"])
        if parent is None:
            if root is not None:
                raise ValidationError("more than one root node")
            root = nid
            t = 0
        else:
            if parent not in nodes:
                raise ValidationError(f"unknown parent '{parent}' for node "
                                      f"'{nid}' (parents must precede children)")
            if p <= 0.0:
                raise ValidationError(
                    f"conditional probability of node '{nid}' must be "
                    f"strictly positive", p=p)
            t = nodes[parent].t + 1
        nodes[nid] = TreeNode(id=nid, parent=parent, p=p, prices=prices, t=t)
        order.append(nid)
    if root is None:
        raise ValidationError("no root node (one node must have parent null)")

    children: dict[str, tuple[str, ...]] = {nid: () for nid in nodes}
    for nid in order:
        par = nodes[nid].parent
        if par is not None:
            children[par] = children[par] + (nid,)

    for nid in order:
        kids = children[nid]
        if kids:
            total = sum(nodes[k].p for k in kids)
            if abs(total - 1.0) > _PROB_TOL:
                raise ValidationError(
                    f"conditional probabilities under node '{nid}' sum to "
                    f"{total!r}, not 1", node=nid)

    terminal = tuple(nid for nid in order if not children[nid])
    depths = {nodes[nid].t for nid in terminal}
    if len(depths) != 1:
        raise ValidationError("terminal nodes sit at different depths",
                              depths=sorted(depths))

    ref = np.empty(len(terminal))
    for i, nid in enumerate(terminal):
        prob = 1.0
        cur = nid
        while nodes[cur].parent is not None:
            prob *= nodes[cur].p
            cur = nodes[cur].parent
        ref[i] = prob
    if abs(ref.sum() - 1.0) > 1e-9:
        raise ValidationError("reference probabilities do not sum to 1",
                              total=float(ref.sum()))

    return MarketModel(assets=assets, nodes=nodes, children=children,
                       root=root, terminal_states=terminal,
                       reference_probabilities=ref)


def gains_space(m: MarketModel) -> GainsSpace:
    """One generator per (non-terminal node, asset).

    The generator pays, on each terminal state below the node, the one-step
    price increment of the asset along that state's path, and zero off the
    subtree.  A one-period market with d assets yields exactly d generators.
    """
    leaf_index = {nid: i for i, nid in enumerate(m.terminal_states)}
    paths = {nid: m.path(nid) for nid in m.terminal_states}
    rows = []
    labels = []
    for nid, node in m.nodes.items():
        kids = m.children[nid]
        if not kids:
            continue
        for asset in range(m.assets):
            g = np.zeros(m.n_states)
            for leaf, path in paths.items():
                if nid in path:
                    step_child = path[path.index(nid) + 1]
                    g[leaf_index[leaf]] = (m.nodes[step_child].prices[asset]
                                           - node.prices[asset])
            rows.append(g)
            labels.append((nid, asset))
    gens = np.array(rows) if rows else np.zeros((0, m.n_states))
    return GainsSpace(generators=gens, labels=tuple(labels))


def make_claim(m: MarketModel, spec: dict) -> Claim:
    """Claim from a spec mapping: call/put on one asset, or explicit vector."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise ValidationError("claim spec needs a 'type' field")
    ctype = spec["type"]
    if ctype in ("call", "put"):
        if "strike" not in spec:
            raise ValidationError(f"{ctype} claim needs a strike")
        strike = float(spec["strike"])
        asset = int(spec.get("asset", 0))
        if not 0 <= asset < max(m.assets, 1):
            raise DimensionError("asset index out of range", asset=asset)
        if m.assets == 0:
            raise DimensionError("option claim on a market with no assets")
        term = np.array([m.nodes[nid].prices[asset]
                         for nid in m.terminal_states])
        payoff = (np.maximum(term - strike, 0.0) if ctype == "call"
                  else np.maximum(strike - term, 0.0))
        return Claim(payoff=payoff, label=f"{ctype}(K={strike})")
    if ctype == "vector":
        values = np.asarray(spec.get("values"), dtype=float)
        if values.ndim != 1 or values.size != m.n_states:
            raise DimensionError(
                f"claim vector has length {values.size}, market has "
                f"{m.n_states} terminal states")
        return Claim(payoff=values, label="vector")
    raise ValidationError(f"unknown claim type '{ctype}'")


# ---------------------------------------------------------------------------
# countable-state weight models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CountableModel:
    """Reference weights p_k and candidate weights q_k over states k >= 1.

    Generators are vectorized callables on integer arrays.  Weight sequences
    must have nonincreasing-to-zero partial tails; partial sums are checked
    to stay within 1 + 1e-9 at the default truncation.
    """

    p_gen: Callable
    q_gen: Callable | None = None
    truncation_default: int = 1_000_000
    p_desc: dict = field(default_factory=dict)
    q_desc: dict = field(default_factory=dict)

    def densities(self, ks: np.ndarray) -> np.ndarray:
        if self.q_gen is None:
            raise ValidationError("countable model has no candidate weights")
        p = self.p_gen(ks)
        return self.q_gen(ks) / p


def geometric_weights(r: float) -> Callable:
    """p_k = (1 - r) * r**(k-1), k >= 1."""
    if not 0.0 < r < 1.0:
        raise ValidationError("geometric ratio must lie in (0, 1)", r=r)

    def gen(ks):
        ks = np.asarray(ks, dtype=float)
        return (1.0 - r) * r ** (ks - 1.0)

    return gen


def powerlaw_weights(s: float) -> Callable:
    """p_k = k**(-s) / zeta(s), k >= 1, s > 1."""
    if not s > 1.0:
        raise ValidationError("power-law exponent must exceed 1", s=s)
    norm = float(zeta(s))

    def gen(ks):
        ks = np.asarray(ks, dtype=float)
        return ks ** (-s) / norm

    return gen


def countable_from_config(config: dict) -> CountableModel:
    spec = config.get("countable")
    if not isinstance(spec, dict):
        raise ValidationError("countable measure config needs a 'countable' "
                              "mapping")

    def build(entry):
        if not isinstance(entry, dict):
            raise ValidationError("countable weight spec must be a mapping")
        kind = entry.get("kind")
        try:
            if kind == "geometric":
                return geometric_weights(float(entry["r"])), dict(entry)
            if kind == "powerlaw":
                return powerlaw_weights(float(entry["s"])), dict(entry)
        except KeyError as exc:
            raise ValidationError(f"countable weight spec missing "
                                  f"parameter {exc}") from exc
        raise ValidationError(f"unknown countable weight kind '{kind}'")

    if "p" not in spec:
        raise ValidationError("countable config needs a 'p' weight spec")
    p_gen, p_desc = build(spec["p"])
    q_gen, q_desc = (None, {})
    if "q" in spec:
        q_gen, q_desc = build(spec["q"])
    n_max = int(config.get("n_max", 1_000_000))
    if n_max < 32:
        raise ValidationError("n_max too small for series classification",
                              n_max=n_max)
    model = CountableModel(p_gen=p_gen, q_gen=q_gen, truncation_default=n_max,
                           p_desc=p_desc, q_desc=q_desc)
    validate_countable(model)
    return model


def validate_countable(cm: CountableModel, n_check: int = 100_000) -> None:
    """Partial sums must be nondecreasing and bounded by 1 + 1e-9."""
    ks = np.arange(1, n_check + 1)
    for name, gen in (("p", cm.p_gen), ("q", cm.q_gen)):
        if gen is None:
            continue
        w = np.asarray(gen(ks), dtype=float)
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValidationError(f"{name}-weights must be finite and "
                                  f"nonnegative")
        if w.sum() > 1.0 + 1e-9:
            raise ValidationError(f"{name}-weight partial sums exceed 1",
                                  total=float(w.sum()))


# ---------------------------------------------------------------------------
# seeded random markets for the verification batteries
# ---------------------------------------------------------------------------

_BRANCHINGS = {
    1: [(2,), (3,), (4,), (6,), (8,), (12,)],
    2: [(2, 2), (2, 3), (3, 2), (2, 4), (4, 2), (3, 4), (2, 6), (4, 3)],
    3: [(2, 2, 2), (2, 2, 3), (2, 3, 2), (3, 2, 2)],
}


def random_market(seed: int, max_assets: int = 3) -> MarketModel:
    """Arbitrage-free random tree market, deterministic in the seed.

    Prices are built backward from positive leaf prices through random
    full-support martingale mixing weights, so a full-support separating
    measure exists by construction.  The physical conditional probabilities
    are drawn independently of the mixing weights.
    """
    rng = np.random.default_rng(seed)
    periods = int(rng.integers(1, 4))
    branching = _BRANCHINGS[periods][rng.integers(len(_BRANCHINGS[periods]))]
    d = int(rng.integers(1, max_assets + 1))

    def full_support(k):
        w = rng.dirichlet(np.ones(k))
        w = np.maximum(w, 0.05)
        return w / w.sum()

    tree = []
    counter = [0]

    def grow(parent_id, level, cond_p):
        nid = f"n{counter[0]}"
        counter[0] += 1
        entry = {"id": nid, "parent": parent_id, "p": cond_p, "prices": None}
        tree.append(entry)
        if level == periods:
            entry["prices"] = [float(np.exp(rng.normal(0.0, 0.35)))
                               for _ in range(d)]
            return entry
        k = branching[level]
        probs = full_support(k)
        kid_entries = [grow(nid, level + 1, float(probs[j]))
                       for j in range(k)]
        mix = full_support(k)
        entry["prices"] = [float(sum(mix[j] * kid_entries[j]["prices"][a]
                                     for j in range(k)))
                           for a in range(d)]
        return entry

    grow(None, 0, 1.0)
    tree.sort(key=lambda e: int(e["id"][1:]))
    return build_market({"assets": d, "tree": tree})


def random_claim(m: MarketModel, rng: np.random.Generator) -> Claim:
    """Random payoff vector with occasional option-shaped draws."""
    if m.assets > 0 and rng.random() < 0.3:
        asset = int(rng.integers(m.assets))
        term = np.array([m.nodes[nid].prices[asset]
                         for nid in m.terminal_states])
        strike = float(np.median(term) * rng.uniform(0.7, 1.3))
        kind = "call" if rng.random() < 0.5 else "put"
        return make_claim(m, {"type": kind, "strike": strike, "asset": asset})
    return Claim(payoff=rng.normal(0.0, 1.0, m.n_states))
