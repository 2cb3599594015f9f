"""Relative minimal spanning forests and the conjugate-edge forests built from them.

``relative_cut`` colours the short simple cycles of a patch by (length,
depth) in their cycle graph and then, colour by colour, cuts the highest
labelled edge off every cycle that is still intact, never touching an edge of
an ``a``-line.  ``theta_n`` turns such a subgraph into the graph of edges
``(a^i b a^-i g, g)``, ``1 <= i <= n``.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ._kernels import edges_form_forest, longest_increasing_chain
from .cayley import DEFAULT_CYCLE_CAP, GraphPatch, a_line_mask, enumerate_simple_cycles
from .errors import PatchError
from .groups import GroupElement
from .rng import label_bits, structural_key
from .trials import Stats, run_trials, statistics

CYCLE_LAYER = 1


def cantor_pair(n: int, k: int) -> int:
    return (n + k) * (n + k + 1) // 2 + k


def cantor_unpair(z: int) -> tuple:
    w = (math.isqrt(8 * z + 1) - 1) // 2
    k = z - w * (w + 1) // 2
    return w - k, k


@dataclass
class CycleLevel:
    """Simple n-cycles of a patch and their adjacency (shared vertex)."""

    n: int
    edges: np.ndarray      # (m, n) canonical edge ids
    vertices: np.ndarray   # (m, n)
    keys: np.ndarray       # (m,) structural uint64 keys
    indptr: np.ndarray
    indices: np.ndarray

    @property
    def size(self) -> int:
        return len(self.edges)

    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)


@dataclass
class CycleStructure:
    levels: dict  # n -> CycleLevel
    n_max: int


def _adjacency(vertices: np.ndarray, n_vertices: int):
    m, n = vertices.shape
    cyc = np.repeat(np.arange(m), n)
    ver = vertices.ravel()
    order = np.argsort(ver, kind="stable")
    cyc, ver = cyc[order], ver[order]
    bounds = np.flatnonzero(np.diff(ver)) + 1
    src, dst = [], []
    for group in np.split(cyc, bounds):
        if len(group) > 1:
            a, b = np.meshgrid(group, group, indexing="ij")
            src.append(a.ravel())
            dst.append(b.ravel())
    if not src:
        return np.zeros(m + 1, dtype=np.int64), np.zeros(0, dtype=np.int64)
    src = np.concatenate(src)
    dst = np.concatenate(dst)
    keep = src != dst
    pair = np.unique(src[keep] * m + dst[keep])
    src, dst = pair // m, pair % m
    indptr = np.zeros(m + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    return np.cumsum(indptr), dst.astype(np.int64)


def cycle_structure(patch: GraphPatch, n_max: int, max_cycles: int = DEFAULT_CYCLE_CAP) -> CycleStructure:
    """Enumerate cycles up to ``n_max`` and build the per-length cycle graphs."""
    levels = {}
    if n_max >= 2:
        ekeys = patch.edge_keys
        for n, cycles in enumerate_simple_cycles(patch, n_max, max_cycles).items():
            E = np.array([c.edges for c in cycles], dtype=np.int64)
            V = np.array([c.vertices for c in cycles], dtype=np.int64)
            keys = np.array([structural_key(tuple(sorted(ekeys[row].tolist()))) for row in E], dtype=np.uint64)
            indptr, indices = _adjacency(V, patch.n_vertices)
            level = CycleLevel(n, E, V, keys, indptr, indices)
            if patch.d and level.size and level.degree().max() > n * patch.d ** n:
                raise AssertionError(f"cycle graph degree {level.degree().max()} exceeds n d^n")
            levels[n] = level
    return CycleStructure(levels, n_max)


@dataclass
class CycleGraph:
    structure: CycleStructure
    labels: dict  # n -> uint64 labels per cycle
    seed: int
    trial: int


def build_cycle_graph(patch: GraphPatch, n_max: int, seed: int, trial: int = 0,
                      structure: Optional[CycleStructure] = None) -> CycleGraph:
    """Cycle graphs for every length <= n_max, with seeded i.i.d. cycle labels."""
    if structure is None:
        structure = cycle_structure(patch, n_max)
    labels = {n: label_bits(lv.keys, seed, CYCLE_LAYER, trial) for n, lv in structure.levels.items()}
    return CycleGraph(structure, labels, seed, trial)


@dataclass
class ColouredCycles:
    depth: dict   # n -> int array
    colour: dict  # n -> int array (Cantor pairing of (n, depth))

    def classes(self) -> dict:
        """colour -> (n, indices of cycles)."""
        out = {}
        for n, col in self.colour.items():
            for c in np.unique(col):
                out[int(c)] = (n, np.flatnonzero(col == c))
        return dict(sorted(out.items()))


def depths_from_labels(indptr: np.ndarray, indices: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Longest chain of adjacent cycles with increasing labels starting at each cycle."""
    order = np.argsort(labels, kind="stable")  # ties broken by index
    rank = np.empty(len(labels), dtype=np.int64)
    rank[order] = np.arange(len(labels))
    return longest_increasing_chain(indptr, indices, rank)


def assign_depths(Z: CycleGraph) -> ColouredCycles:
    depth, colour = {}, {}
    for n, lv in Z.structure.levels.items():
        dp = depths_from_labels(lv.indptr, lv.indices, Z.labels[n])
        depth[n] = dp
        colour[n] = np.array([cantor_pair(n, int(k)) for k in dp], dtype=np.int64)
    return ColouredCycles(depth, colour)


def _n_components(patch: GraphPatch, alive: np.ndarray) -> int:
    keep = alive & ~patch.edge_loop
    M = csr_matrix((np.ones(int(keep.sum())), (patch.edge_u[keep], patch.edge_v[keep])),
                   shape=(patch.n_vertices, patch.n_vertices))
    return int(connected_components(M, directed=False)[0])


@dataclass
class RelativeCutResult:
    surviving: np.ndarray
    a_mask: np.ndarray
    audit: list = field(default_factory=list)
    n_cut: int = 0
    skipped_in_line: int = 0

    def mean_degree(self, patch: GraphPatch) -> float:
        return 2.0 * int((self.surviving & ~patch.edge_loop).sum()) / patch.n_vertices


def relative_cut(patch: GraphPatch, a: Optional[int], n_max: int, seed: int, trial: int = 0,
                 structure: Optional[CycleStructure] = None, audit: str = "full",
                 strict: Optional[bool] = None, protected: Optional[np.ndarray] = None) -> RelativeCutResult:
    """Cut every simple cycle of length <= n_max while keeping all ``a``-line edges.

    ``audit``: ``"full"`` checks connectivity after every colour step and
    records it; ``"final"`` records steps but checks connectivity only at the
    end; ``"none"`` records nothing.  ``strict`` (default: on for balls)
    raises on a cycle lying entirely inside the ``a``-lines, which cannot
    happen on the infinite graph; otherwise such cycles are skipped and noted.
    ``protected`` replaces the ``a``-line mask (for abstract graphs; pass ``a=None``).
    """
    if strict is None:
        strict = patch.kind == "ball"
    if protected is not None:
        a_mask = np.asarray(protected, dtype=bool)
        if a_mask.shape != (patch.n_edges,):
            raise ValueError("protected mask needs one entry per edge")
    else:
        a_mask = a_line_mask(patch, a)
    cut = np.zeros(patch.n_edges, dtype=bool)
    result = RelativeCutResult(~cut, a_mask)
    if n_max < 2:
        return result
    if _n_components(patch, ~cut) != 1:
        raise PatchError("relative_cut needs a connected patch")
    if structure is None:
        structure = cycle_structure(patch, n_max)
    elif structure.n_max < n_max:
        raise ValueError("cycle structure was built for a smaller n_max")
    levels = {n: lv for n, lv in structure.levels.items() if n <= n_max}
    Z = CycleGraph(CycleStructure(levels, n_max),
                   {n: label_bits(lv.keys, seed, CYCLE_LAYER, trial) for n, lv in levels.items()}, seed, trial)
    coloured = assign_depths(Z)
    ekeys = patch.edge_keys
    for colour, (n, idx) in coloured.classes().items():
        lv = levels[n]
        V = lv.vertices[idx]
        if len(np.unique(V)) != V.size:
            raise AssertionError(f"colour class {colour} is not vertex-disjoint")
        E = lv.edges[idx]
        alive = ~cut[E].any(axis=1)
        E = E[alive]
        cand = ~a_mask[E]
        in_line = ~cand.any(axis=1)
        if in_line.any():
            if strict:
                raise PatchError(f"cycle of colour {colour} lies entirely in L(a)")
            result.skipped_in_line += int(in_line.sum())
            E, cand = E[~in_line], cand[~in_line]
        chosen = np.zeros(0, dtype=np.int64)
        if len(E):
            bits = label_bits(ekeys[E], seed, colour + 2, trial)
            masked = np.where(cand, bits, np.uint64(0))
            top = masked.max(axis=1)
            tie = cand & (masked == top[:, None])
            chosen = np.where(tie, E, -1).max(axis=1)
            cut[chosen] = True
        if audit != "none":
            entry = {
                "colour": colour, "n": n, "depth": cantor_unpair(colour)[1],
                "cycles": int(len(idx)), "processed": int(len(E)),
                "skipped_in_line": int(in_line.sum()), "cut": sorted(chosen.tolist()),
            }
            if audit == "full":
                entry["connected"] = _n_components(patch, ~cut) == 1
                if not entry["connected"]:
                    raise AssertionError(f"colour step {colour} disconnected the patch")
            result.audit.append(entry)
    surviving = ~cut
    if cut[a_mask].any():
        raise AssertionError("an a-line edge was cut")
    if _n_components(patch, surviving) != 1:
        raise AssertionError("relative cut disconnected the patch")
    for n, lv in levels.items():
        intact = surviving[lv.edges].all(axis=1)
        if (intact & ~a_mask[lv.edges].all(axis=1)).any():
            raise AssertionError(f"an {n}-cycle outside L(a) survived")
    result.surviving = surviving
    result.n_cut = int(cut.sum())
    return result


def estimate_relative_degree(patch: GraphPatch, a: int, n_max: int, trials: int, seed: int,
                             workers: Optional[int] = None, audit: str = "final") -> Stats:
    """Mean vertex degree of the relative forest, averaged over vertices then trials."""
    structure = cycle_structure(patch, n_max) if n_max >= 2 else None

    def task(t):
        res = relative_cut(patch, a, n_max, seed, t, structure=structure, audit=audit)
        return res.mean_degree(patch)

    return statistics(run_trials(task, trials, workers))


# -- conjugate-edge forests ----------------------------------------------------------


class ThetaMap:
    """Endpoints of the edges ``(a^i b a^-i g, g)``, ``i = 1..n``, indexed by ``b``-edges.

    Writing ``x = a^-i g``, the edge is ``(a^i b x, a^i x)``: the ``b``-edge
    ``(x, b x)`` pushed ``i`` steps along the ``a``-lines.  Every ``b``-record
    of the patch gives ``n`` such edges.  Endpoints outside the patch get node
    ids ``>= n_vertices``.
    """

    def __init__(self, patch: GraphPatch, a: int, b: int, n: int):
        S = patch.S
        if S is None:
            raise PatchError("conjugate edges need a Cayley patch")
        if n < 1:
            raise ValueError("n must be >= 1")
        A, B = S.elements[a], S.elements[b]
        if B == A or B == A.inverse():
            raise PatchError("b must differ from a and a^-1")
        self.patch, self.a, self.b, self.n = patch, a, b, n
        self.a_mask = a_line_mask(patch, a)
        fam = S.family
        V = patch.n_vertices
        extra = {}

        def node(form):
            v = patch.vertex_index(form)
            if v is None:
                v = extra.setdefault(form, V + len(extra))
            return v

        sel = patch.rec_slot == b
        self.b_tails = patch.rec_tail[sel]
        self.b_edges = patch.rec_edge[sel]
        self.g_end = np.empty((n, len(self.b_tails)), dtype=np.int64)
        self.conj_end = np.empty((n, len(self.b_tails)), dtype=np.int64)
        for j, x in enumerate(self.b_tails.tolist()):
            g = patch.forms[x]
            h = fam.mul(B.form, g)
            for i in range(n):
                g, h = fam.mul(A.form, g), fam.mul(A.form, h)
                self.g_end[i, j] = node(g)
                self.conj_end[i, j] = node(h)
        self.n_nodes = V + len(extra)
        self._rec = np.full(V * patch.d, -1, dtype=np.int64)
        self._rec[patch.rec_tail * patch.d + patch.rec_slot] = np.arange(len(patch.rec_tail))
        self._A, self._Ainv = A, A.inverse()

    def record(self, v: int, slot: int) -> int:
        return int(self._rec[v * self.patch.d + slot])

    def x_edge(self) -> int:
        """Edge id of the ``b``-edge at the patch root (the event X), or -1."""
        r = self.record(self.patch.root, self.b)
        return int(self.patch.rec_edge[r]) if r >= 0 else -1

    def decidable_root(self, root: int, rule: str = "witness") -> bool:
        """All 2n potential edges at ``root`` are determined by the patch."""
        P = self.patch
        ib = P.S.involution[self.b]
        x = root
        for _ in range(self.n):
            x = P.mul_index(self._Ainv, x)
            if x is None or self.record(x, self.b) < 0 or self.record(x, ib) < 0:
                return False
        if rule == "component":
            at_root = (self.g_end == root) | (self.conj_end == root)
            ends = np.concatenate([self.g_end[at_root], self.conj_end[at_root]])
            return bool((ends < P.n_vertices).all())
        return True


def centred_root(patch: GraphPatch, a: int, n: int) -> int:
    """``a^ceil(n/2)``: the root degree then depends on ``b``-edges at ``a^j``, ``|j| <= n/2``."""
    A = patch.S.elements[a]
    g = patch.S.family.identity()
    for _ in range(math.ceil(n / 2)):
        g = A * g
    v = patch.vertex_index(g)
    if v is None:
        raise PatchError("centred root lies outside the patch")
    return v


@dataclass
class TauSample:
    n: int
    u: np.ndarray   # endpoint a^i b a^-i g (node id)
    v: np.ndarray   # endpoint g
    i: np.ndarray
    n_nodes: int
    root: int
    root_neighbours: tuple
    x_event: bool   # b-edge at the patch root present in the source
    acyclic: Optional[bool] = None

    @property
    def root_degree(self) -> int:
        return len(self.root_neighbours)

    def is_acyclic(self) -> bool:
        if self.acyclic is None:
            self.acyclic = bool(edges_form_forest(self.n_nodes, self.u, self.v))
        return self.acyclic

    def summary(self) -> "TauSample":
        """Copy without the edge arrays (root statistics and acyclicity only)."""
        empty = np.zeros(0, dtype=np.int64)
        return dataclasses.replace(self, u=empty, v=empty, i=empty, acyclic=self.is_acyclic())


def theta_n(patch: GraphPatch, surviving: np.ndarray, a: int, b: int, n: int, rule: str = "witness",
            root: Optional[int] = None, theta: Optional[ThetaMap] = None) -> TauSample:
    """The conjugate-edge graph of a source subgraph (``surviving`` edge mask).

    ``rule="witness"`` (default): the edge for ``(i, g)`` is present when the
    ``b``-edge at ``a^-i g`` is in the source.  Together with the ``a``-lines,
    which the source must contain, that edge joins the two endpoints, so this
    is the same-component relation restricted to the connections that matter.
    ``rule="component"``: present when both endpoints lie in the patch and in
    the same component of the source.
    """
    if theta is None:
        theta = ThetaMap(patch, a, b, n)
    if (theta.a, theta.b, theta.n) != (a, b, n) or theta.patch is not patch:
        raise ValueError("ThetaMap built for a different patch or (a, b, n)")
    if root is None:
        root = centred_root(patch, a, n)
    if not theta.decidable_root(root, rule):
        raise PatchError(f"root {root} is not interior for n = {n}")
    V = patch.n_vertices
    if rule == "witness":
        if not surviving[theta.a_mask].all():
            raise ValueError("witness rule needs every a-line edge in the source")
        present = np.broadcast_to(surviving[theta.b_edges], theta.g_end.shape)
    elif rule == "component":
        keep = surviving & ~patch.edge_loop
        M = csr_matrix((np.ones(int(keep.sum())), (patch.edge_u[keep], patch.edge_v[keep])), shape=(V, V))
        comp = np.append(connected_components(M, directed=False)[1], -1)
        inside = (theta.g_end < V) & (theta.conj_end < V)
        gi = np.where(inside, theta.g_end, V)
        ci = np.where(inside, theta.conj_end, V)
        present = inside & (comp[gi] == comp[ci])
    else:
        raise ValueError(f"unknown rule {rule!r}")
    ii = np.broadcast_to(np.arange(1, n + 1)[:, None], theta.g_end.shape)
    u, v, i = theta.conj_end[present], theta.g_end[present], ii[present]
    nbrs = tuple(sorted(set(u[v == root].tolist()) | set(v[u == root].tolist())))
    xe = theta.x_edge()
    return TauSample(n, u, v, i, theta.n_nodes, root, nbrs, bool(xe >= 0 and surviving[xe]))


@dataclass
class TauStats:
    n: int
    samples: int
    tau_X_hat: float
    tau_X_stderr: float
    width_emp: int
    deg_emp: float
    deg_stderr: float
    em_stat: float
    law_gap: float         # deg_emp - 2 n tau_X_hat
    law_gap_stderr: float  # stderr of the per-sample difference


def tau_stats(samples: Sequence[TauSample], n: int) -> TauStats:
    if not samples:
        raise ValueError("tau_stats needs at least one sample")
    deg = np.array([s.root_degree for s in samples], dtype=np.float64)
    x = np.array([s.x_event for s in samples], dtype=np.float64)
    widths = set()
    for s in samples:
        widths.update(s.root_neighbours)
    sd, sx = statistics(deg), statistics(x)
    gap = statistics(deg - 2 * n * x)
    width = len(widths)
    em = sd.mean ** 2 / width if width else 0.0
    return TauStats(n, len(samples), sx.mean, sx.stderr, width, sd.mean, sd.stderr, em, gap.mean, gap.stderr)


def least_squares_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    return float(np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)[0])
