"""Free minimal spanning forest: the label-cutting rule, its Monte Carlo degree estimate, and the degree bounds.

An edge ``e`` is cut iff it carries the maximal label on some simple cycle,
iff its endpoints are joined by a path avoiding ``e`` whose labels are all
below ``label(e)``.  Labels are totally ordered by ``(label, edge id)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, minimum_spanning_tree

from .cayley import GraphPatch, build_ball
from .errors import PatchError
from .groups import GeneratingMultiset, power_multiset
from .rng import label_bits, to_unit
from .spectral import lambda_exact
from .trials import Stats, run_trials, statistics
from .unionfind import UnionFind


class Labeling:
    """Per-edge label stack; layer ``l`` of edge ``e`` is a pure function of (seed, key[e], l, trial)."""

    def __init__(self, keys: np.ndarray, seed: int, trial: int = 0):
        self.keys = np.asarray(keys, dtype=np.uint64)
        self.seed = int(seed)
        self.trial = int(trial)
        self._layers: dict = {}

    @classmethod
    def for_patch(cls, patch: GraphPatch, seed: int, trial: int = 0) -> "Labeling":
        return cls(patch.edge_keys, seed, trial)

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "Labeling":
        """Fixed primary-layer labels (floats in [0,1]) for hand-built examples."""
        lab = cls(np.zeros(len(values), dtype=np.uint64), seed=0)
        lab._layers[0] = (np.asarray(values, dtype=np.float64) * 2.0 ** 63).astype(np.uint64)
        return lab

    def bits(self, layer: int = 0) -> np.ndarray:
        if layer not in self._layers:
            self._layers[layer] = label_bits(self.keys, self.seed, layer, self.trial)
        return self._layers[layer]

    def uniform(self, layer: int = 0) -> np.ndarray:
        return to_unit(self.bits(layer))

    def ranks(self, layer: int = 0) -> np.ndarray:
        """Position of each edge in the strict total order on (label, id)."""
        order = np.argsort(self.bits(layer), kind="stable")
        ranks = np.empty(len(order), dtype=np.int64)
        ranks[order] = np.arange(len(order))
        return ranks


@dataclass
class ForestSample:
    surviving: np.ndarray  # bool per canonical edge
    root_degree: int
    n_components: int


def edge_survives(patch: GraphPatch, labeling: Labeling, e: int, radius_used: Optional[int] = None,
                  strict: bool = False) -> bool:
    """Whether ``e`` survives the cutting rule, looking for bypasses within ``radius_used`` of the root.

    A truncated search can only miss bypasses, so on a ball ``True`` may
    over-report survival relative to the infinite graph.
    """
    if patch.edge_loop[e]:
        if strict:
            raise PatchError(f"edge {e} is a loop")
        return False
    u, v = int(patch.edge_u[e]), int(patch.edge_v[e])
    allowed = patch.dist <= radius_used if radius_used is not None else np.ones(patch.n_vertices, bool)
    if not (allowed[u] and allowed[v]):
        raise PatchError(f"edge {e} lies outside radius {radius_used}")
    bits = labeling.bits(0)
    ids = np.arange(patch.n_edges)
    lower = (bits < bits[e]) | ((bits == bits[e]) & (ids < e))
    indptr, nbr, eid = patch.incidence
    seen = {u}
    stack = [u]
    while stack:
        x = stack.pop()
        for j in range(indptr[x], indptr[x + 1]):
            y, f = int(nbr[j]), int(eid[j])
            if y in seen or not lower[f] or not allowed[y]:
                continue
            if y == v:
                return False
            seen.add(y)
            stack.append(y)
    return True


def kruskal_msf(patch: GraphPatch, labeling: Labeling, radius_used: Optional[int] = None) -> np.ndarray:
    """Minimum spanning forest edge mask by Kruskal's algorithm (reference oracle)."""
    bits = labeling.bits(0)
    within = patch.edge_mask_within(radius_used)
    order = sorted((int(bits[e]), e) for e in range(patch.n_edges) if within[e] and not patch.edge_loop[e])
    uf = UnionFind(patch.n_vertices)
    keep = np.zeros(patch.n_edges, dtype=bool)
    for _, e in order:
        if uf.union(int(patch.edge_u[e]), int(patch.edge_v[e])):
            keep[e] = True
    return keep


def _msf_fast(patch: GraphPatch, ranks: np.ndarray, edge_mask: np.ndarray, n: int) -> np.ndarray:
    """MSF mask via scipy on the vertex prefix ``range(n)``; weights are ranks + 1 (all distinct)."""
    sel = np.flatnonzero(edge_mask & ~patch.edge_loop)
    u, v = patch.edge_u[sel], patch.edge_v[sel]
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    r = ranks[sel]
    if _has_parallel(patch):
        # only the lowest-ranked of parallel edges can be in the forest
        order = np.argsort(r, kind="stable")
        _, first = np.unique(lo[order] * n + hi[order], return_index=True)
        pick = order[first]
        sel, lo, hi, r = sel[pick], lo[pick], hi[pick], r[pick]
    M = csr_matrix(((r + 1).astype(np.float64), (lo, hi)), shape=(n, n))
    T = minimum_spanning_tree(M).tocoo()
    rank_to_edge = np.full(len(ranks), -1, dtype=np.int64)
    rank_to_edge[r] = sel
    keep = np.zeros(patch.n_edges, dtype=bool)
    keep[rank_to_edge[T.data.astype(np.int64) - 1]] = True
    return keep


def _has_parallel(patch: GraphPatch) -> bool:
    if "_parallel" not in patch.__dict__:
        nl = ~patch.edge_loop
        lo = np.minimum(patch.edge_u[nl], patch.edge_v[nl])
        hi = np.maximum(patch.edge_u[nl], patch.edge_v[nl])
        pairs = lo * patch.n_vertices + hi
        patch.__dict__["_parallel"] = len(np.unique(pairs)) < len(pairs)
    return patch.__dict__["_parallel"]


def _prefix_size(patch: GraphPatch, radius_used: Optional[int]) -> int:
    if radius_used is None:
        return patch.n_vertices
    return int(np.searchsorted(patch.dist, radius_used, side="right")) if patch.kind == "ball" else patch.n_vertices


def sample_forest(patch: GraphPatch, labeling: Labeling, radius_used: Optional[int] = None) -> ForestSample:
    """Apply the cutting rule to every edge within ``radius_used`` (finite patch: the MSF)."""
    if patch.kind != "ball" and radius_used is not None:
        raise PatchError("radius truncation needs a ball patch")
    within = patch.edge_mask_within(radius_used)
    n = _prefix_size(patch, radius_used)
    keep = _msf_fast(patch, labeling.ranks(0), within, n)
    root_edges = np.flatnonzero(((patch.edge_u == 0) | (patch.edge_v == 0)) & ~patch.edge_loop)
    M = csr_matrix((np.ones(int(keep.sum())), (patch.edge_u[keep], patch.edge_v[keep])), shape=(n, n))
    n_comp = connected_components(M, directed=False)[0]
    return ForestSample(keep, int(keep[root_edges].sum()), int(n_comp))


@dataclass
class DegreeEstimate:
    radius: Optional[int]
    mean: float
    stderr: float
    trials: int
    degrees: np.ndarray = field(repr=False)
    slot_frequencies: dict = field(default_factory=dict, repr=False)


def root_edge_slots(patch: GraphPatch):
    """Non-loop edges at the root and the root-side slot of each."""
    at_root = (patch.rec_tail == 0) & ~patch.edge_loop[patch.rec_edge]
    return patch.rec_edge[at_root], patch.rec_slot[at_root]


def estimate_delta_fmsf(patch: GraphPatch, trials: int, seed: int, radius_sweep: Optional[Sequence[int]] = None,
                        workers: Optional[int] = None) -> list:
    """Mean number of surviving root edges, per truncation radius.

    For each trial the labels are fixed and the forest is recomputed inside
    each sub-ball; survival can only decrease as the radius grows.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if radius_sweep is None:
        radii = [patch.radius] if patch.kind == "ball" else [None]
    else:
        radii = list(radius_sweep)
        if patch.kind != "ball" and any(r is not None for r in radii):
            raise PatchError("radius sweep needs a ball patch")
        if any(r is not None and r > patch.radius for r in radii):
            raise PatchError(f"radius sweep {radii} exceeds patch radius {patch.radius}")
    root_edges, root_slots = root_edge_slots(patch)
    masks = [(patch.edge_mask_within(r), _prefix_size(patch, r)) for r in radii]
    keys = patch.edge_keys
    _has_parallel(patch)

    def task(t):
        ranks = Labeling(keys, seed, t).ranks(0)
        return np.stack([_msf_fast(patch, ranks, m, n)[root_edges] for m, n in masks]).astype(np.int8)

    per_trial = np.stack(run_trials(task, trials, workers))  # (trials, radii, root edges)
    out = []
    for i, r in enumerate(radii):
        surv = per_trial[:, i, :]
        degrees = surv.sum(axis=1).astype(np.int64)
        st = statistics(degrees)
        freq = surv.mean(axis=0)
        slot_freq = {}
        for s, f in zip(root_slots.tolist(), freq.tolist()):
            name = patch.S.names[s] if patch.S is not None and s >= 0 else str(len(slot_freq))
            slot_freq[name] = f
        out.append(DegreeEstimate(r, st.mean, st.stderr, trials, degrees, slot_freq))
    return out


def theorem1_bound(lam: float) -> float:
    """Lower bound ``1/(4 lam) - 1/4`` on the expected FMSF degree."""
    if not 0 < lam <= 1:
        raise ValueError(f"spectral radius must lie in (0, 1], got {lam}")
    return 1.0 / (4.0 * lam) - 0.25


def per_edge_survival_lower(lam: float, d: int) -> float:
    """``(1 - ln 2) / (lam d)``: lower bound on the survival probability of a non-loop edge."""
    return (1.0 - math.log(2.0)) / (lam * d)


def per_edge_survival_simple(lam: float, d: int) -> float:
    """The weaker closed form ``1 / (4 lam d)``."""
    return 1.0 / (4.0 * lam * d)


@dataclass
class ScanRow:
    k: int
    d_k: int
    lambda_k: float
    bound: float
    mc_mean: float
    mc_stderr: float
    radius: int


def corollary_scan(S: GeneratingMultiset, k_list: Sequence[int], trials: int, seed: int,
                   radii: Sequence[int], vertex_cap: int = 200_000, slot_cap: int = 4096,
                   workers: Optional[int] = None) -> list:
    """Degree bound and Monte Carlo degree for Cay(Gamma, S^[k]) over ``k_list``.

    ``radii[i]`` is the ball radius used for ``k_list[i]``.
    """
    lam = lambda_exact(S)
    if lam is None or lam >= 1:
        raise ValueError("corollary scan needs a nonamenable registry entry (lambda < 1)")
    if len(radii) != len(k_list):
        raise ValueError("need one radius per k")
    rows = []
    for k, R in zip(k_list, radii):
        if S.d ** k > slot_cap:
            raise PatchError(f"S^[{k}] has {S.d ** k} slots, over the cap {slot_cap}")
        Sk = S if k == 1 else power_multiset(S, k)
        patch = build_ball(Sk, R, vertex_cap=vertex_cap)
        lam_k = lam ** k
        est = estimate_delta_fmsf(patch, trials, seed, [R], workers=workers)[0]
        rows.append(ScanRow(k, Sk.d, lam_k, theorem1_bound(lam_k), est.mean, est.stderr, R))
    return rows
