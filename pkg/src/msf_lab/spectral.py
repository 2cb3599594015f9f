"""Walk counts, the path-count bound ``c(n,x,y) <= (lambda d)^n`` and spectral radius estimates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .cayley import GraphPatch
from .errors import PatchError
from .groups import FreeAbelian, FreeGroup, FreeProduct, GeneratingMultiset, GroupElement, standard_multiset

_INT_LIMIT = 2 ** 62


@dataclass
class SpectralEstimate:
    lambda_lower: float
    iterations: int
    converged: bool
    radius: Optional[int] = None
    lambda_exact: Optional[float] = None
    cycle_sequence: list = field(default_factory=list)


class NonConvergence(RuntimeError):
    def __init__(self, estimate: SpectralEstimate):
        super().__init__(f"power iteration did not converge in {estimate.iterations} steps "
                         f"(last estimate {estimate.lambda_lower!r})")
        self.estimate = estimate


def _check_overflow(patch: GraphPatch, n: int):
    if patch.d ** n >= _INT_LIMIT:
        raise OverflowError(f"d^n = {patch.d}^{n} overflows int64 walk counts")


def _walk_vectors(patch: GraphPatch, sources: Sequence[int], n: int):
    """Yield count matrices ``C_m[v, j]`` = #walks of length m from ``sources[j]`` to v, m = 0..n."""
    _check_overflow(patch, n)
    A = patch.adjacency_counts()
    C = np.zeros((patch.n_vertices, len(sources)), dtype=np.int64)
    C[list(sources), np.arange(len(sources))] = 1
    yield C
    for _ in range(n):
        C = A.T @ C
        yield C


def word_length(patch: GraphPatch, v: int) -> int:
    return int(patch.dist[v])


def count_rooted_cycles(patch: GraphPatch, n: int) -> int:
    """Number ``c(n)`` of closed walks (oriented-edge sequences) of length n at the root."""
    if patch.kind != "ball":
        raise PatchError("rooted cycle counts need a ball patch")
    if patch.radius < math.ceil(n / 2):
        raise PatchError(f"radius {patch.radius} too small for exact c({n}); need {math.ceil(n / 2)}")
    *_, C = _walk_vectors(patch, [patch.root], n)
    return int(C[patch.root, 0])


def count_paths(patch: GraphPatch, x: int, y: int, n: int) -> int:
    """Number ``c(n, x, y)`` of walks of length n from vertex x to vertex y.

    Exact when every such walk stays in the ball: a walk from x to y never
    gets farther from the root than ``(|x| + |y| + n) / 2``.
    """
    if patch.kind == "ball":
        need = math.ceil((patch.dist[x] + patch.dist[y] + n) / 2)
        if patch.radius < need:
            raise PatchError(f"radius {patch.radius} too small for exact c({n},x,y); need {need}")
    *_, C = _walk_vectors(patch, [x], n)
    return int(C[y, 0])


def tree_walk_counts(d: int, n_max: int) -> list:
    """Exact walk counts on the d-regular tree.

    Returns ``W`` with ``W[m][r]`` the number of length-m walks between two
    fixed vertices at distance r (``r <= m``), computed on the distance chain.
    """
    W = [[1]]
    for m in range(1, n_max + 1):
        prev = W[-1] + [0, 0]
        row = []
        for r in range(m + 1):
            if r == 0:
                row.append(d * prev[1])
            else:
                row.append(prev[r - 1] + (d - 1) * prev[r + 1])
        W.append(row)
    return W


def is_tree_multiset(S: GeneratingMultiset) -> bool:
    """True when Cay(Gamma, S) is a d-regular tree (standard free basis, or Z/2 factors)."""
    fam = S.family
    if S.base is not None:
        return False
    if isinstance(fam, FreeGroup):
        std = standard_multiset(fam)
        return sorted(g.form for g in S.elements) == sorted(g.form for g in std.elements)
    if isinstance(fam, FreeProduct):
        return all(m == 2 for m in fam.orders) and sorted(g.form for g in S.elements) == sorted(
            ((f, 1),) for f in range(len(fam.orders)))
    return False


def lambda_exact(S: GeneratingMultiset) -> Optional[float]:
    """Registry of known spectral radii.

    * free abelian groups (amenable): 1
    * Cayley graph a d-regular tree: ``2 sqrt(d-1) / d``
    * a word-power multiset ``S^[k]``: ``lambda(S)^k``
    """
    if isinstance(S.family, FreeAbelian):
        return 1.0
    root = S.root_multiset()
    if not is_tree_multiset(root):
        return None
    d = root.d
    lam = 1.0 if d <= 2 else 2.0 * math.sqrt(d - 1) / d
    return lambda_for_power_set(lam, S.power)


def lambda_for_power_set(lambda_base: float, k: int) -> float:
    """Spectral radius of Cay(Gamma, S^[k]) given that of Cay(Gamma, S)."""
    if not 0 < lambda_base <= 1:
        raise ValueError(f"lambda must lie in (0, 1], got {lambda_base}")
    return lambda_base ** k


@dataclass
class PathBoundReport:
    max_ratio: float
    argmax: tuple  # (n, x, y)
    checked: int
    violations: int

    @property
    def ok(self) -> bool:
        return self.violations == 0


def check_path_bound(patch: GraphPatch, lam: float, n_max: int, pair_radius: int = 3) -> PathBoundReport:
    """Max of ``c(n,x,y) / (lam d)^n`` over x, y in the ``pair_radius`` ball and 1 <= n <= n_max.

    Counts are exact dynamic-programming walk counts on the patch; the patch
    must be large enough for every counted walk to stay inside it.
    """
    if patch.kind == "ball":
        need = math.ceil((2 * pair_radius + n_max) / 2)
        if patch.radius < need:
            raise PatchError(f"radius {patch.radius} too small for exact counts; need {need}")
        pairs = np.flatnonzero(patch.dist <= pair_radius)
    else:
        pairs = np.arange(patch.n_vertices)
    base = lam * patch.d
    best = (0.0, (0, -1, -1))
    checked = violations = 0
    for n, C in enumerate(_walk_vectors(patch, pairs.tolist(), n_max)):
        if n == 0:
            continue
        sub = C[pairs, :]
        ratio = sub / base ** n
        checked += ratio.size
        violations += int(np.count_nonzero(ratio > 1 + 1e-12))
        i, j = np.unravel_index(np.argmax(ratio), ratio.shape)
        if ratio[i, j] > best[0]:
            best = (float(ratio[i, j]), (n, int(pairs[j]), int(pairs[i])))
    return PathBoundReport(best[0], best[1], checked, violations)


def check_path_bound_power_tree(base: GeneratingMultiset, k: int, lam: float, elements: Sequence[GroupElement],
                                n_max: int) -> PathBoundReport:
    """Path bound for Cay(Gamma, S^[k]) with a tree base graph Cay(Gamma, S).

    A walk of length n in S^[k] is a walk of length kn in S, so
    ``c_{S^[k]}(n, x, y) = W[kn][|y x^-1|_S]`` with ``W`` from the tree's
    distance chain.  Used where a patch large enough for exact counts would
    be too big to build.
    """
    if not is_tree_multiset(base):
        raise ValueError("base multiset must generate a tree Cayley graph")
    d = base.d
    W = tree_walk_counts(d, k * n_max)
    unit = lam * d ** k
    dists = [len((y * x.inverse()).form) for x in elements for y in elements]
    hist = np.bincount(dists)
    best = (0.0, (0, -1))
    checked = violations = 0
    for n in range(1, n_max + 1):
        row = W[k * n]
        for r, mult in enumerate(hist):
            if mult == 0:
                continue
            count = row[r] if r < len(row) else 0
            ratio = count / unit ** n
            checked += int(mult)
            if ratio > 1 + 1e-12:
                violations += int(mult)
            if ratio > best[0]:
                best = (ratio, (n, r))
    return PathBoundReport(best[0], best[1], checked, violations)


def spectral_radius_power_iteration(patch: GraphPatch, iterations: int = 20000, tolerance: float = 1e-12,
                                    raise_on_failure: bool = True) -> SpectralEstimate:
    """Rayleigh-quotient estimate of the norm of the random-walk operator on the patch.

    The walk is killed on leaving the patch, so every Rayleigh quotient is a
    lower bound for the spectral radius of the infinite graph.  Iterates the
    lazy operator ``(I + P) / 2`` to avoid the bipartite +-lambda oscillation.
    """
    A = patch.adjacency_counts().astype(np.float64) / patch.d
    v = np.ones(patch.n_vertices) / math.sqrt(patch.n_vertices)
    prev = None
    rq = 0.0
    for it in range(1, iterations + 1):
        Av = A @ v
        rq = float(v @ Av)
        if prev is not None and abs(rq - prev) < tolerance:
            return SpectralEstimate(rq, it, True, radius=patch.radius, lambda_exact=lambda_exact(patch.S))
        prev = rq
        w = 0.5 * (v + Av)
        v = w / np.linalg.norm(w)
    est = SpectralEstimate(rq, iterations, False, radius=patch.radius, lambda_exact=lambda_exact(patch.S))
    if raise_on_failure:
        raise NonConvergence(est)
    return est


def cycle_sequence(patch: GraphPatch, n_values: Sequence[int]) -> list:
    """Rows ``(n, c(n), c(n)^(1/n) / d)``; odd n with c(n) = 0 give estimate 0."""
    n_top = max(n_values)
    if patch.radius < math.ceil(n_top / 2):
        raise PatchError(f"radius {patch.radius} too small for c({n_top})")
    rows = []
    wanted = set(n_values)
    for n, C in enumerate(_walk_vectors(patch, [patch.root], n_top)):
        if n in wanted and n > 0:
            c = int(C[patch.root, 0])
            rows.append((n, c, c ** (1.0 / n) / patch.d if c else 0.0))
    return rows


def cycle_ratio_estimate(patch: GraphPatch, n: int) -> float:
    """``sqrt(c(n) / c(n-2)) / d``: same limit as ``c(n)^(1/n) / d`` but without the polynomial prefactor."""
    if n < 3:
        raise ValueError("ratio estimate needs n >= 3")
    rows = {m: c for m, c, _ in cycle_sequence(patch, [n - 2, n])}
    if rows[n - 2] == 0:
        raise ValueError(f"c({n - 2}) = 0; use the other parity")
    return math.sqrt(rows[n] / rows[n - 2]) / patch.d
