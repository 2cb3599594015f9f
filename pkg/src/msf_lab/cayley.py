"""Finite patches of Cayley graphs.

Oriented edges follow the left-multiplication convention ``(g, s, s*g)``; the
opposite of ``(g, s, h)`` is ``(h, iota(s), g)``.  A patch stores one *record*
per ``(tail, slot)`` whose head lies in the patch.  Records are grouped into
canonical (unordered) edges; a loop whose slot is its own inverse is a single
record that serves as its own opposite, traversed in two directions.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .errors import CapExceeded, PatchError
from .groups import FreeAbelian, GeneratingMultiset, GroupElement, check_multiset
from .rng import structural_key

DEFAULT_VERTEX_CAP = 2_000_000
DEFAULT_CYCLE_CAP = 2_000_000


class GraphPatch:
    """Immutable finite graph with Cayley bookkeeping.

    ``kind`` is ``"ball"``, ``"torus"`` or ``"graph"`` (an abstract multigraph
    without group structure).  Vertex 0 is the root.
    """

    def __init__(self, kind, n_vertices, rec_tail, rec_slot, rec_head, *, S=None,
                 forms=None, dist=None, radius=None, sides=None, modulus=None):
        self.kind = kind
        self.S: Optional[GeneratingMultiset] = S
        self.forms = forms
        self.n_vertices = int(n_vertices)
        self.radius = radius
        self.sides = sides
        self.modulus = modulus
        self.rec_tail = np.asarray(rec_tail, dtype=np.int64)
        self.rec_slot = np.asarray(rec_slot, dtype=np.int64)
        self.rec_head = np.asarray(rec_head, dtype=np.int64)
        self._assign_edges()
        self.dist = np.asarray(dist, dtype=np.int64) if dist is not None else self._bfs_dist()

    # -- construction helpers -------------------------------------------------

    def _assign_edges(self):
        n_rec = len(self.rec_tail)
        rec_edge = np.full(n_rec, -1, dtype=np.int64)
        if self.S is not None:
            lookup = {(t, s): r for r, (t, s) in enumerate(zip(self.rec_tail.tolist(), self.rec_slot.tolist()))}
            inv = self.S.involution
            heads = self.rec_head.tolist()
            tails = self.rec_tail.tolist()
            slots = self.rec_slot.tolist()
            edge_u, edge_v, edge_slot = [], [], []
            n_edges = 0
            for r in range(n_rec):
                if rec_edge[r] >= 0:
                    continue
                opp = lookup.get((heads[r], inv[slots[r]]))
                if opp is None:
                    raise PatchError(f"record {r} has no opposite in the patch")
                rec_edge[r] = n_edges
                rec_edge[opp] = n_edges
                edge_u.append(tails[r])
                edge_v.append(heads[r])
                edge_slot.append(slots[r])
                n_edges += 1
        else:
            # abstract graph: records come in consecutive opposite pairs
            rec_edge = np.arange(n_rec, dtype=np.int64) // 2
            edge_u = self.rec_tail[0::2].tolist()
            edge_v = self.rec_head[0::2].tolist()
            edge_slot = [-1] * len(edge_u)
        self.rec_edge = rec_edge
        self.edge_u = np.asarray(edge_u, dtype=np.int64)
        self.edge_v = np.asarray(edge_v, dtype=np.int64)
        self.edge_slot = np.asarray(edge_slot, dtype=np.int64)
        self.edge_loop = self.edge_u == self.edge_v

    def _bfs_dist(self):
        indptr, nbr, _ = self.incidence
        dist = np.full(self.n_vertices, -1, dtype=np.int64)
        dist[0] = 0
        frontier = [0]
        while frontier:
            nxt = []
            for x in frontier:
                for y in nbr[indptr[x]:indptr[x + 1]].tolist():
                    if dist[y] < 0:
                        dist[y] = dist[x] + 1
                        nxt.append(y)
            frontier = nxt
        return dist

    # -- derived structure ------------------------------------------------------

    @property
    def n_edges(self) -> int:
        return len(self.edge_u)

    @property
    def d(self) -> int:
        return self.S.d if self.S is not None else 0

    @property
    def root(self) -> int:
        return 0

    @cached_property
    def boundary(self) -> np.ndarray:
        if self.kind == "ball":
            return self.dist == self.radius
        return np.zeros(self.n_vertices, dtype=bool)

    @cached_property
    def incidence(self):
        """CSR over non-loop edges: ``(indptr, neighbour, edge_id)``, both directions."""
        keep = ~self.edge_loop
        ids = np.flatnonzero(keep)
        src = np.concatenate([self.edge_u[keep], self.edge_v[keep]])
        dst = np.concatenate([self.edge_v[keep], self.edge_u[keep]])
        eid = np.concatenate([ids, ids])
        order = np.lexsort((eid, src))
        src, dst, eid = src[order], dst[order], eid[order]
        indptr = np.zeros(self.n_vertices + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        return np.cumsum(indptr), dst, eid

    @cached_property
    def edge_keys(self) -> np.ndarray:
        """Structural 64-bit key per canonical edge, independent of vertex indexing."""
        keys = np.empty(self.n_edges, dtype=np.uint64)
        if self.S is None:
            for k, (u, v) in enumerate(zip(self.edge_u.tolist(), self.edge_v.tolist())):
                keys[k] = structural_key(("graph", min(u, v), max(u, v), k))
            return keys
        inv = self.S.involution
        forms = self.forms
        for k, (u, v, s) in enumerate(zip(self.edge_u.tolist(), self.edge_v.tolist(), self.edge_slot.tolist())):
            keys[k] = structural_key(min((forms[u], s, forms[v]), (forms[v], inv[s], forms[u])))
        return keys

    def element(self, v: int) -> GroupElement:
        return GroupElement(self.S.family, self.forms[v])

    def vertex_index(self, g) -> Optional[int]:
        form = g.form if isinstance(g, GroupElement) else g
        if self.modulus is not None:
            form = tuple(c % m for c, m in zip(form, self.modulus))
        return self._index.get(form)

    @cached_property
    def _index(self):
        return {f: i for i, f in enumerate(self.forms)}

    def mul_index(self, g: GroupElement, v: int) -> Optional[int]:
        """Index of ``g * vertex(v)`` or None if outside the patch."""
        return self.vertex_index(self.S.family.mul(g.form, self.forms[v]))

    def record_index(self):
        """Map ``(tail, slot) -> record``."""
        return {(t, s): r for r, (t, s) in enumerate(zip(self.rec_tail.tolist(), self.rec_slot.tolist()))}

    def adjacency_counts(self):
        """Sparse symmetric matrix counting records (slots) between vertices."""
        from scipy.sparse import csr_matrix

        data = np.ones(len(self.rec_tail), dtype=np.int64)
        return csr_matrix((data, (self.rec_tail, self.rec_head)), shape=(self.n_vertices, self.n_vertices))

    def restrict(self, r: int) -> "GraphPatch":
        """Sub-ball of radius ``r`` (vertices are stored in BFS order, so a prefix)."""
        if self.kind != "ball":
            raise PatchError("restrict() needs a ball patch")
        if r > self.radius:
            raise PatchError(f"cannot restrict radius {self.radius} ball to radius {r}")
        n = int(np.searchsorted(self.dist, r, side="right"))
        keep = (self.rec_tail < n) & (self.rec_head < n)
        return GraphPatch(
            "ball", n, self.rec_tail[keep], self.rec_slot[keep], self.rec_head[keep],
            S=self.S, forms=self.forms[:n], dist=self.dist[:n], radius=r,
        )

    def edge_mask_within(self, r: Optional[int]) -> np.ndarray:
        if r is None:
            return np.ones(self.n_edges, dtype=bool)
        return (self.dist[self.edge_u] <= r) & (self.dist[self.edge_v] <= r)

    def export_edge_list(self) -> str:
        """One line per oriented record: ``tail head slot canonical-id loop-flag``."""
        lines = []
        for t, s, h, e in zip(self.rec_tail.tolist(), self.rec_slot.tolist(),
                              self.rec_head.tolist(), self.rec_edge.tolist()):
            lines.append(f"{t} {h} {s} {e} {int(t == h)}")
        return "\n".join(lines) + "\n"

    def __repr__(self):
        extra = f"R={self.radius}" if self.kind == "ball" else f"sides={self.sides}"
        return f"GraphPatch({self.kind}, {extra}, V={self.n_vertices}, E={self.n_edges})"


def build_ball(S: GeneratingMultiset, R: int, vertex_cap: int = DEFAULT_VERTEX_CAP) -> GraphPatch:
    """Ball of radius ``R`` around the identity in Cay(Gamma, S).

    Vertices are indexed in BFS order, ties broken by ``(len(form), form)``.
    All edges between ball vertices are included.
    """
    if R < 1:
        raise PatchError("ball radius must be >= 1")
    check_multiset(S)
    fam = S.family
    gens = [g.form for g in S.elements]
    ident = fam.identity().form
    forms = [ident]
    index = {ident: 0}
    dist = [0]
    frontier = [ident]
    for r in range(1, R + 1):
        new = set()
        for g in frontier:
            for s in gens:
                h = fam.mul(s, g)
                if h not in index:
                    new.add(h)
        if len(forms) + len(new) > vertex_cap:
            raise CapExceeded(f"ball of radius {R} exceeds vertex cap {vertex_cap} at radius {r}")
        frontier = sorted(new, key=lambda f: (len(f), f))
        for h in frontier:
            index[h] = len(forms)
            forms.append(h)
            dist.append(r)
    tails, slots, heads = [], [], []
    for v, g in enumerate(forms):
        for s, sf in enumerate(gens):
            w = index.get(fam.mul(sf, g))
            if w is not None:
                tails.append(v)
                slots.append(s)
                heads.append(w)
    patch = GraphPatch("ball", len(forms), tails, slots, heads, S=S, forms=forms, dist=dist, radius=R)
    patch.__dict__["_index"] = index
    return patch


def build_quotient(S: GeneratingMultiset, sides: Sequence[int], allow_small: bool = False) -> GraphPatch:
    """Cayley graph of ``Z/m_1 x ... x Z/m_d`` with the image of ``S`` (a discrete torus)."""
    if not isinstance(S.family, FreeAbelian):
        raise PatchError("quotients are only built for the free abelian family")
    sides = tuple(int(m) for m in sides)
    if len(sides) != S.family.dim:
        raise PatchError(f"sides: need {S.family.dim} moduli, got {len(sides)}")
    if not allow_small and any(m < 3 for m in sides):
        raise PatchError(f"sides: every modulus must be >= 3, got {sides}")
    check_multiset(S)
    forms = list(itertools.product(*(range(m) for m in sides)))
    index = {f: i for i, f in enumerate(forms)}
    tails, slots, heads = [], [], []
    for v, g in enumerate(forms):
        for s, el in enumerate(S.elements):
            h = tuple((a + b) % m for a, b, m in zip(g, el.form, sides))
            tails.append(v)
            slots.append(s)
            heads.append(index[h])
    patch = GraphPatch("torus", len(forms), tails, slots, heads, S=S, forms=forms,
                       sides=sides, modulus=sides)
    patch.__dict__["_index"] = index
    return patch


def graph_from_edges(n_vertices: int, edges: Sequence[tuple]) -> GraphPatch:
    """Abstract multigraph (loops and parallel edges allowed); canonical ID = position."""
    tails, heads = [], []
    for u, v in edges:
        tails += [u, v]
        heads += [v, u]
    slots = [-1] * len(tails)
    return GraphPatch("graph", n_vertices, tails, slots, heads)


def a_line_mask(patch: GraphPatch, a: int) -> np.ndarray:
    """Boolean mask over canonical edges lying on an ``a``-line ``{a^n g}``."""
    if patch.S is None:
        raise PatchError("a-lines need a Cayley patch")
    if not 0 <= a < patch.d:
        raise PatchError(f"slot {a} out of range")
    if not patch.S.elements[a].has_infinite_order():
        raise PatchError(f"slot {patch.S.names[a]!r} is a torsion element; L(a) needs infinite order")
    mask = np.zeros(patch.n_edges, dtype=bool)
    mask[patch.rec_edge[patch.rec_slot == a]] = True
    return mask


def a_line_edges(patch: GraphPatch, a: int) -> frozenset:
    return frozenset(np.flatnonzero(a_line_mask(patch, a)).tolist())


@dataclass(frozen=True)
class SimpleCycle:
    """Edge ``edges[i]`` joins ``vertices[i]`` and ``vertices[(i+1) % n]``."""

    edges: tuple
    vertices: tuple

    @property
    def length(self) -> int:
        return len(self.edges)


def canonical_cycle(vertices: Sequence[int], edges: Sequence[int]) -> SimpleCycle:
    n = len(edges)
    i0 = min(range(n), key=lambda i: edges[i])
    E = list(edges[i0:]) + list(edges[:i0])
    V = list(vertices[i0:]) + list(vertices[:i0])
    E_rev = [E[0]] + E[:0:-1]
    V_rev = [V[1], V[0]] + V[:1:-1]
    if tuple(E_rev) < tuple(E):
        E, V = E_rev, V_rev
    return SimpleCycle(tuple(E), tuple(V))


def enumerate_simple_cycles(patch: GraphPatch, n_max: int, max_cycles: int = DEFAULT_CYCLE_CAP) -> dict:
    """All simple cycles of length ``2..n_max``, as ``{n: [SimpleCycle, ...]}``.

    Each unrooted cycle appears once.  A 2-cycle needs two distinct parallel
    edges; loops never belong to a simple cycle.
    """
    if n_max < 2:
        raise PatchError("n_max must be >= 2")
    indptr, nbr, eid = patch.incidence
    indptr = indptr.tolist()
    nbr = nbr.tolist()
    eid = eid.tolist()
    on_path = [False] * patch.n_vertices
    found: dict = {}
    count = 0
    path_v: list = []
    path_e: list = []

    def extend(r, x):
        nonlocal count
        for j in range(indptr[x], indptr[x + 1]):
            y, e = nbr[j], eid[j]
            if y == r:
                # each cycle is met in both directions; keep one
                if path_e and path_e[0] < e:
                    count += 1
                    if count > max_cycles:
                        raise CapExceeded(f"more than {max_cycles} simple cycles of length <= {n_max}")
                    cyc = canonical_cycle(path_v, path_e + [e])
                    found.setdefault(cyc.length, []).append(cyc)
            elif y > r and not on_path[y] and len(path_e) + 1 < n_max:
                on_path[y] = True
                path_v.append(y)
                path_e.append(e)
                extend(r, y)
                path_v.pop()
                path_e.pop()
                on_path[y] = False

    for r in range(patch.n_vertices):
        on_path[r] = True
        path_v.append(r)
        extend(r, r)
        path_v.pop()
        on_path[r] = False
    return {n: sorted(found[n], key=lambda c: c.edges) for n in sorted(found)}
