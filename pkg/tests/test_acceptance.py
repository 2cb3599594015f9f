"""The eleven acceptance criteria, each at its stated tolerance.

Each test prints one PASS/FAIL line; the lines are repeated in the pytest
terminal summary.  Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import heapq
import math
import random
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from conftest import ACCEPTANCE_LINES
from msf_lab import build_ball, build_quotient, enumerate_simple_cycles, graph_from_edges, standard_multiset
from msf_lab.cayley import a_line_mask
from msf_lab.experiment import ExperimentConfig, read_csv, run_experiment
from msf_lab.fmsf import Labeling, corollary_scan, edge_survives, estimate_delta_fmsf, theorem1_bound
from msf_lab.groups import FreeAbelian, FreeGroup, power_multiset
from msf_lab.relative import cycle_structure, least_squares_slope, relative_cut
from msf_lab.spectral import check_path_bound, check_path_bound_power_tree, spectral_radius_power_iteration

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
SQRT3_2 = math.sqrt(3) / 2
_CSV = {}  # config name -> 1-worker CSV text, reused by the determinism check


@contextmanager
def criterion(label):
    info = {"detail": ""}
    start = time.perf_counter()
    try:
        yield info
    except BaseException as exc:
        _emit(label, False, f"{info['detail']} [{type(exc).__name__}: {exc}]".strip(), start)
        raise
    _emit(label, True, info["detail"], start)


def _emit(label, ok, detail, start):
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail} ({time.perf_counter() - start:.1f}s)"
    ACCEPTANCE_LINES.append(line)
    print(line)


def _csv_for(name, workers=1):
    cfg = ExperimentConfig.load(CONFIGS / name)
    rec = run_experiment(cfg, workers=workers)
    text = rec.to_csv()
    if workers == 1:
        _CSV[name] = text
    return rec, text


def _prim(n, edges, labels):
    adj = [[] for _ in range(n)]
    for k, (u, v) in enumerate(edges):
        if u != v:
            adj[u].append((labels[k], k, v))
            adj[v].append((labels[k], k, u))
    seen, tree, heap = {0}, set(), list(adj[0])
    heapq.heapify(heap)
    while heap:
        _, k, v = heapq.heappop(heap)
        if v not in seen:
            seen.add(v)
            tree.add(k)
            for item in adj[v]:
                heapq.heappush(heap, item)
    return tree


def test_c01_kruskal_oracle_equivalence():
    with criterion("C1 survival rule == MST on 50 graphs x 100 labelings") as info:
        rng = random.Random(20240601)
        start = time.perf_counter()
        mismatches = multi = 0
        for g in range(50):
            n = rng.randrange(2, 13)
            edges = [(i, rng.randrange(i)) for i in range(1, n)]
            edges += [(rng.randrange(n), rng.randrange(n)) for _ in range(rng.randrange(2 * n + 1))]
            if g % 5 == 0:
                edges += [edges[0], (0, 0)]  # force a parallel pair and a loop
            pairs = [tuple(sorted(e)) for e in edges]
            multi += len(set(pairs)) < len(pairs) or any(u == v for u, v in edges)
            P = graph_from_edges(n, edges)
            for t in range(100):
                lab = Labeling.for_patch(P, seed=g, trial=t)
                rule = {e for e in range(P.n_edges) if edge_survives(P, lab, e)}
                mismatches += rule != _prim(n, edges, lab.bits(0).tolist())
        elapsed = time.perf_counter() - start
        info["detail"] = f"{mismatches} mismatches, {multi} multigraphs, {elapsed:.1f}s"
        assert mismatches == 0 and multi >= 10
        assert elapsed < 10


def test_c02_torus_exact_degree():
    with criterion("C2 torus (6,6) mean degree = 70/36") as info:
        start = time.perf_counter()
        rec, _ = _csv_for("torus_fmsf.ini")
        elapsed = time.perf_counter() - start
        _, cols, rows = read_csv(rec.to_csv())
        row = dict(zip(cols, rows[0]))
        mean, se = float(row["mean_degree"]), float(row["stderr"])
        info["detail"] = f"mean {mean:.5f} +- {se:.5f} vs {70 / 36:.5f}, trials {row['trials']}"
        assert int(row["trials"]) == 10_000
        assert abs(mean - 70 / 36) <= 3 * se
        assert elapsed < 30


def test_c03_tree_degree_four(S_free):
    with criterion("C3 F2 tree delta = 4 exactly") as info:
        P = build_ball(S_free, 6)
        est = estimate_delta_fmsf(P, 200, seed=3, radius_sweep=[1, 2, 3, 4, 5, 6])
        info["detail"] = ", ".join(f"R={e.radius}: {e.mean} +- {e.stderr}" for e in est)
        assert all(e.mean == 4.0 and e.stderr == 0.0 and (e.degrees == 4).all() for e in est)


def test_c04_degree_bound_bracket():
    with criterion("C4 Cay(F2,S^[2]) R=4: 1/12 <= mean + 3se, mean <= 16") as info:
        start = time.perf_counter()
        rec, _ = _csv_for("free_square_fmsf.ini")
        elapsed = time.perf_counter() - start
        _, cols, rows = read_csv(rec.to_csv())
        row = dict(zip(cols, rows[0]))
        mean, se = float(row["mean_degree"]), float(row["stderr"])
        bound = theorem1_bound(0.75)
        info["detail"] = f"bound {bound:.5f}, mean {mean:.4f} +- {se:.4f}, lambda {row['bound_lambda']}"
        assert int(row["trials"]) == 10_000 and int(row["R"]) == 4
        assert float(row["bound_lambda"]) == pytest.approx(0.75)
        assert bound == pytest.approx(1 / 12)
        assert bound <= mean + 3 * se and mean <= 16
        assert elapsed < 300


def test_c05_corollary_growth(S_free):
    with criterion("C5 bounds increasing in k, MC within [bound - 3se, d^k]") as info:
        ks = [1, 2, 3, 4]
        bounds = [theorem1_bound(SQRT3_2 ** k) for k in ks]
        closed = [1 / (4 * SQRT3_2 ** k) - 0.25 for k in ks]
        rows = corollary_scan(S_free, ks, trials=500, seed=55, radii=[4, 2, 2, 1])
        info["detail"] = "; ".join(f"k={r.k}: bound {r.bound:.4f}, mc {r.mc_mean:.3f} +- {r.mc_stderr:.3f}"
                                   for r in rows)
        assert all(b2 > b1 for b1, b2 in zip(bounds, bounds[1:]))
        assert bounds == pytest.approx(closed)
        assert bounds[3] == pytest.approx(4 / 9 - 1 / 4)
        for r, b in zip(rows, bounds):
            assert r.bound == pytest.approx(b) and r.d_k == 4 ** r.k
            assert b - 3 * r.mc_stderr <= r.mc_mean <= r.d_k


def test_c06_path_bound(S_z1, S_z2, S_free, S_free2):
    with criterion("C6 c(n,x,y) <= (lambda d)^n, radius-3 pairs, n <= 10") as info:
        start = time.perf_counter()
        reports = {
            "Z": check_path_bound(build_ball(S_z1, 8), 1.0, 10, pair_radius=3),
            "Z2": check_path_bound(build_ball(S_z2, 8), 1.0, 10, pair_radius=3),
            "F2": check_path_bound(build_ball(S_free, 8), SQRT3_2, 10, pair_radius=3),
        }
        ball = build_ball(S_free2, 3)
        reports["F2,S^[2]"] = check_path_bound_power_tree(
            S_free, 2, 0.75, [ball.element(v) for v in range(ball.n_vertices)], 10)
        elapsed = time.perf_counter() - start
        info["detail"] = ", ".join(f"{k}: max {r.max_ratio:.4f} over {r.checked}, {r.violations} viol."
                                   for k, r in reports.items())
        assert all(r.violations == 0 for r in reports.values())
        assert elapsed < 60


def test_c07_spectral_estimator(S_free, S_z1):
    with criterion("C7 power iteration: F2 R=12 within 0.02, monotone, Z R=50 >= 0.98") as info:
        big = build_ball(S_free, 12)
        ests = [spectral_radius_power_iteration(big.restrict(R)).lambda_lower for R in range(2, 12)]
        ests.append(spectral_radius_power_iteration(big).lambda_lower)
        z = spectral_radius_power_iteration(build_ball(S_z1, 50)).lambda_lower
        info["detail"] = f"F2 R=12 {ests[-1]:.5f} (gap {SQRT3_2 - ests[-1]:.5f}), Z R=50 {z:.5f}"
        assert abs(ests[-1] - SQRT3_2) <= 0.02
        assert all(b >= a for a, b in zip(ests, ests[1:]))
        assert z >= 0.98


def _check_relative_runs(sides, trials, seed):
    S = standard_multiset(FreeAbelian(2))
    T = build_quotient(S, sides)
    a = S.slot("e1")
    line = a_line_mask(T, a)
    structure = cycle_structure(T, 4)
    bad = 0
    for t in range(trials):
        res = relative_cut(T, a, 4, seed, t, structure=structure, audit="full")
        keep = res.surviving
        ok = keep[line].all() and all(e["connected"] for e in res.audit)
        M = csr_matrix((np.ones(int(keep.sum())), (T.edge_u[keep], T.edge_v[keep])), shape=(T.n_vertices,) * 2)
        ok &= connected_components(M, directed=False)[0] == 1
        ids = np.flatnonzero(keep)
        G = graph_from_edges(T.n_vertices, list(zip(T.edge_u[ids].tolist(), T.edge_v[ids].tolist())))
        for cycles in enumerate_simple_cycles(G, 4).values():
            ok &= all(line[ids[list(c.edges)]].all() for c in cycles)
        bad += not ok
    return bad


def test_c08_relative_invariants():
    with criterion("C8 relative cut invariants on tori (4,4), (6,6), 200 trials") as info:
        start = time.perf_counter()
        bad = {sides: _check_relative_runs(sides, 200, 5) for sides in ((4, 4), (6, 6))}
        _csv_for("relative_torus44.ini")
        _csv_for("relative_torus.ini")
        elapsed = time.perf_counter() - start
        info["detail"] = f"violating runs {bad}"
        assert all(v == 0 for v in bad.values())
        assert elapsed < 300


def _tau_rows(name):
    rec, _ = _csv_for(name)
    _, cols, rows = read_csv(rec.to_csv())
    return [dict(zip(cols, r)) for r in rows]


def test_c09_width_degree_laws():
    with criterion("C9 width <= 2n, |deg - 2n tau| <= 3se, acyclic (n = 1..4, 1000 samples)") as info:
        rows = _tau_rows("tau_free.ini")
        parts = []
        for r in rows:
            n = int(r["n"])
            gap, se = float(r["law_gap"]), float(r["law_gap_stderr"])
            parts.append(f"n={n}: w {r['width_emp']}, deg {float(r['deg_emp']):.3f}, "
                         f"2n tau {2 * n * float(r['tau_X_hat']):.3f}, gap/se {gap / se:+.2f}")
        info["detail"] = "; ".join(parts)
        assert [int(r["n"]) for r in rows] == [1, 2, 3, 4]
        for r in rows:
            n = int(r["n"])
            assert int(r["samples"]) == 1000
            assert int(r["width_emp"]) <= 2 * n
            assert abs(float(r["law_gap"])) <= 3 * float(r["law_gap_stderr"])
            assert r["all_acyclic"] == "true"


def test_c10_em_trend():
    with criterion("C10 em_stat over n = 1..8: positive slope, em(8) > em(1)") as info:
        rows = _tau_rows("tau_free_r5.ini")
        n = [int(r["n"]) for r in rows]
        em = [float(r["em_stat"]) for r in rows]
        slope = least_squares_slope(n, em)
        info["detail"] = f"slope {slope:.4f}, em " + ", ".join(f"{x:.3f}" for x in em)
        assert n == list(range(1, 9))
        assert slope > 0 and em[-1] > em[0]


def test_c11_worker_determinism():
    names = ["torus_fmsf.ini", "free_square_fmsf.ini", "relative_torus44.ini", "relative_torus.ini"]
    with criterion("C11 byte-identical CSV with 1 and 8 workers (C2, C4, C8)") as info:
        same = {}
        for name in names:
            if name not in _CSV:
                _csv_for(name)
            _, text8 = _csv_for(name, workers=8)
            same[name] = text8 == _CSV[name]
        info["detail"] = ", ".join(f"{k}: {'identical' if v else 'DIFFERENT'}" for k, v in same.items())
        assert all(same.values())


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-v", "-s"]))
