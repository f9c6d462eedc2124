"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run directly with ``python3 tests/test_acceptance.py`` or through pytest, where
the collected lines are repeated in the terminal summary.
"""

import math
import time
from fractions import Fraction

import numpy as np

import conftest
from conftest import brute_max_deviation, random_graph
from regtower.construction import (
    ConstructionParams,
    build,
    plan_paper_params,
    verify_construction,
)
from regtower.diagnostics import counting_premises, counting_report
from regtower.graph import VertexPartition, is_refinement
from regtower.irregularity import (
    coarsen_bound,
    irreg_exact,
    irreg_partition,
    pair_lower_bound,
)
from regtower.realization import (
    max_deviation_exact,
    perturbation_irreg_gap,
    round_to_unweighted,
)
from regtower.refine import parts_bound, refine_step, regularize, step_budget, tower
from regtower.spectral import blow_up, mixing_violations, top_singular_value

SEED = 20241016
PAPER_CONST = 2 ** 26 * 10 ** 4


def report(n, ok, detail):
    line = f"acceptance {n}: {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    conftest.ACCEPTANCE_LINES.append(line)
    assert ok, line


# ----------------------------------------------------------------------------
# independent oracles


def q_oracle(W, blocks):
    """Mean square density from plain block sums."""
    n = W.shape[0]
    q = 0.0
    for A in blocks:
        for B in blocks:
            e = W[np.ix_(A, B)].sum()
            q += e * e / (len(A) * len(B)) / (n * n)
    return q


def mask_matrix(m):
    return ((np.arange(1 << m)[:, None] >> np.arange(m)) & 1).astype(float)


def double_enumeration(B):
    """max over all (U, W) of |e(U, W) - |U||W| d| for a block B."""
    a, b = B.shape
    MU, MW = mask_matrix(a), mask_matrix(b)
    E = MU @ B @ MW.T
    sizes = np.outer(MU.sum(axis=1), MW.sum(axis=1))
    return float(np.abs(E - sizes * B.mean()).max())


def desk_trace(seed):
    return build(ConstructionParams(alpha=Fraction(1, 4), x=(2, 2), seed=seed, strict_properties=False))


# ----------------------------------------------------------------------------
# criteria


def test_criterion_01_refinement_increment():
    rng = np.random.default_rng(SEED + 1)
    start = time.perf_counter()
    bad, steps, worst = 0, 0, np.inf
    for _ in range(200):
        n = int(rng.integers(2, 33))
        g = random_graph(rng, n)
        P = VertexPartition.trivial(n)
        irr, wit = irreg_partition(g, P, cap=32)
        P2, dq = refine_step(g, P, cap=32, witnesses=wit)
        steps += 1
        k = len(P)
        dq_oracle = q_oracle(g.weights, [list(b) for b in P2.blocks]) - q_oracle(g.weights, [list(b) for b in P.blocks])
        margin = dq_oracle - 4 * (irr / (n * n)) ** 2
        worst = min(worst, margin)
        ok = (margin >= -1e-9 and abs(dq - dq_oracle) <= 1e-12 and len(P2) <= k * 2 ** (k + 1)
              and is_refinement(P2, P))
        bad += not ok
    elapsed = time.perf_counter() - start
    report(1, bad == 0 and elapsed < 60,
           f"{steps} steps, {bad} violations, min slack {worst:.3g}, {elapsed:.1f}s (limit 60s)")


def test_criterion_02_termination_bound():
    rng = np.random.default_rng(SEED + 2)
    graphs = [random_graph(rng, 32, "binary") for _ in range(50)]
    exact = {}

    def exact_irreg(idx, P):
        key = (idx, tuple(tuple(b) for b in P.blocks))
        if key not in exact:
            exact[key] = irreg_partition(graphs[idx], P, cap=32)[0]
        return exact[key]

    bad = []
    for eps in (0.2, 0.25, 0.3):
        budget = math.floor(eps ** -2 / 16) + 1
        if step_budget(eps) != budget:
            bad.append(f"step_budget({eps})")
        for idx, g in enumerate(graphs):
            run = regularize(g, eps, max_steps=budget, cap=32)
            if not run.bound_only:
                key = (idx, tuple(tuple(b) for b in run.partitions[-1].blocks))
                exact.setdefault(key, run.irreg_values[-1])
            final = exact_irreg(idx, run.partitions[-1])
            if not (run.by_criterion and run.steps <= budget and final <= eps * 32 * 32 + 1e-9):
                bad.append(f"eps={eps} graph={idx}")
    worst = max(exact.values()) / 1024
    report(2, not bad, f"150 runs, max final irreg/n^2 = {worst:.4f}, failures: {bad or 'none'}")


def test_criterion_03_tower_arithmetic():
    # plain recursion k_{i+1} = k_i 2^(k_i + 1) in exponent form k_i = 2^e_i
    e = [0]
    for _ in range(4):
        e.append(e[-1] + 2 ** e[-1] + 1)
    towers = [None, 2]  # towers[n] = T(n) for n <= 5; T(6) cannot be materialised
    for _ in range(4):
        towers.append(2 ** towers[-1])
    bad = []
    for i in range(6):
        lhs = 4 * parts_bound(i)
        if not lhs <= tower(i + 2):
            bad.append(i)
        if i <= 3 and lhs != 2 ** (e[i] + 2):
            bad.append(f"value {i}")
    # independent check at i <= 4 with plain ints: e_i + 2 <= T(i + 1)
    oracle_ok = all(e[i] + 2 <= towers[i + 1] for i in range(5))
    # i = 5: e_5 + 2 <= 2^(e_4 + 1) and e_4 + 1 < T(5) = 2^65536
    oracle_ok &= e[4] + 1 < towers[5]
    ok = not bad and oracle_ok and tower(4) == 65536
    report(3, ok, f"4*parts_bound(i) <= tower(i+2) for i=0..5, tower(4) = {int(tower(4))}, failures: {bad or 'none'}")


def test_criterion_04_oracle_self_consistency():
    rng = np.random.default_rng(SEED + 4)
    mismatches, total = 0, 0
    for a in range(1, 5):
        for b in range(1, 5):
            X, Y = list(range(a)), list(range(a, a + b))
            for _ in range(500):
                g = random_graph(rng, a + b)
                got = irreg_exact(g, X, Y).value
                want = double_enumeration(g.weights[np.ix_(X, Y)])
                mismatches += abs(got - want) > 1e-12
                total += 1
    report(4, mismatches == 0, f"{total} pairs over 16 shapes, {mismatches} discrepancies at 1e-12")


def test_criterion_05_mixing_lemma():
    rng = np.random.default_rng(SEED + 5)
    masks = mask_matrix(8)
    sizes = masks.sum(axis=1)
    own = pkg = 0
    for _ in range(500):
        A = rng.uniform(-1, 1, (8, 8))
        lam = np.linalg.norm(A, 2)
        D = A @ masks.T  # column c holds d_C(v) for the c-th subset C
        own += int(np.sum((D * D).sum(axis=0) > lam * lam * sizes + 1e-8))
        E = np.abs(masks @ D)
        own += int(np.sum(E > lam * np.sqrt(np.outer(sizes, sizes)) + 1e-8))
        pkg += sum(mixing_violations(A, tol=1e-8))
    report(5, own == 0 and pkg == 0, f"500 matrices, violations: enumeration {own}, package {pkg} at 1e-8")


def test_criterion_06_blow_up_law():
    rng = np.random.default_rng(SEED + 6)
    worst = 0.0
    for r in range(1, 7):
        for c in range(1, 7):
            for k in range(1, 5):
                A = rng.uniform(-1, 1, (r, c))
                lam = np.linalg.svd(A, compute_uv=False)[0]
                got = top_singular_value(blow_up(A, k))
                worst = max(worst, abs(got - k * lam) / (k * lam))
    report(6, worst <= 1e-8, f"144 (shape, k) cases, max relative error {worst:.2e}")


def test_criterion_07_construction_structure():
    alpha = 0.25
    bad = []
    for seed in range(20):
        t = desk_trace(seed)
        if not verify_construction(t).structural_ok:
            bad.append(f"seed {seed}: verify")
        N = t.N
        for i in (1, 2):
            inc = t.step_graph(i).weights[:N, N:]
            cum = t.cumulative_graph(i - 1).weights[:N, N:]
            # block constancy of the step graph on level-i block pairs
            for Xb in t.blocks_V(i):
                for Yb in t.blocks_W(i):
                    blk = inc[np.ix_(Xb, np.asarray(Yb) - N)]
                    if np.ptp(blk) != 0:
                        bad.append(f"seed {seed}: constancy {i}")
            for X in range(t.k(i - 1)):
                for Y in range(t.k(i - 1)):
                    Xs, Ys = t.blocks_V(i - 1)[X], np.asarray(t.blocks_W(i - 1)[Y]) - N
                    prev = cum[np.ix_(Xs, Ys)]
                    active = bool(np.all((prev > 0) & (prev < 1)))
                    if active != bool(t.active[i][X, Y]):
                        bad.append(f"seed {seed}: active map {i}")
                    if not active:
                        if np.any(inc[np.ix_(Xs, Ys)]):
                            bad.append(f"seed {seed}: inactive persistence {i}")
                        continue
                    for a in (0, 1):
                        rv = t.half_vertices(i, "V", X, Y, a)
                        for b in (0, 1):
                            cv = t.half_vertices(i, "W", Y, X, b) - N
                            if not np.all(inc[np.ix_(rv, cv)] == (alpha if a == b else -alpha)):
                                bad.append(f"seed {seed}: pattern {i}")
                    val = irreg_exact(t.cumulative_graph(i), t.blocks_V(i - 1)[X], t.blocks_W(i - 1)[Y], cap=16).value
                    if abs(val - alpha * len(Xs) * len(Ys) / 4) > 1e-9:
                        bad.append(f"seed {seed}: exact irreg {i}")
        final = t.final_graph()
        if not set(np.unique(final.weights)) <= {0.0, 0.5, 1.0}:
            bad.append(f"seed {seed}: final grid")
        if irreg_partition(final, t.joint_partition(t.s), cap=16)[0] != 0:
            bad.append(f"seed {seed}: aligned irregularity")
    report(7, not bad, f"20 seeds, failures: {bad[:5] or 'none'}")


def test_criterion_08_directional_lower_bound():
    bad, traces, seed = [], 0, 0
    levels = []
    while traces < 20:
        t = desk_trace(seed)
        seed += 1
        if not all(t.active[i].all() for i in range(1, t.s + 1)):
            continue
        traces += 1
        vals = [irreg_partition(t.final_graph(), t.joint_partition(i), cap=16)[0] for i in range(t.s + 1)]
        levels.append(vals)
        if not (all(v > 0 for v in vals[:-1]) and vals[-1] == 0):
            bad.append(f"seed {seed - 1}: {vals}")
        if counting_premises(t):
            bad.append(f"seed {seed - 1}: premises gate true")
        rep = counting_report(t, t.joint_partition(1), 2, cap=16)
        if rep.premises_hold or not rep.rows:
            bad.append(f"seed {seed - 1}: counting report")
    lo = np.min(np.array(levels)[:, :-1])
    report(8, not bad, f"20 fully active traces (seeds 0..{seed - 1}), min irreg below level s = {lo:g}, "
                       f"failures: {bad[:3] or 'none'}")


def test_criterion_09_perturbation():
    rng = np.random.default_rng(SEED + 9)
    N = 8
    viol, corollary_cases, oracle_bad = 0, 0, 0
    for trial in range(200):
        g = random_graph(rng, N)
        h = round_to_unweighted(g, int(rng.integers(1 << 30)))
        t = max_deviation_exact(g, h)
        if trial < 10:
            oracle_bad += abs(t - brute_max_deviation(g.weights - h.weights)) > 1e-12
        perm = rng.permutation(N)
        cut = int(rng.integers(1, N))
        pair = perturbation_irreg_gap(g, h, (sorted(perm[:cut].tolist()), sorted(perm[cut:].tolist())), t=t)
        P = VertexPartition.from_labels(rng.integers(0, int(rng.integers(1, 5)), N))
        part = perturbation_irreg_gap(g, h, P, t=t)
        k = len(P)
        viol += pair.gap > 2 * t + 1e-9
        viol += part.gap > 2 * k * k * t + 1e-9
        if t <= 4 * N ** 1.5:
            corollary_cases += 1
            viol += part.gap > 8 * k * k * N ** 1.5
    report(9, viol == 0 and oracle_bad == 0,
           f"200 pairs, {viol} violations, corollary applied {corollary_cases} times, "
           f"deviation oracle mismatches {oracle_bad}")


def test_criterion_10_unconditional_lemmas():
    rng = np.random.default_rng(SEED + 10)
    viol = 0
    for _ in range(200):
        g = random_graph(rng, 8, "uniform" if rng.random() < 0.5 else "binary")
        S = sorted(rng.choice(8, int(rng.integers(1, 9)), replace=False).tolist())
        T = sorted(rng.choice(8, int(rng.integers(1, 9)), replace=False).tolist())
        subs = [sorted(rng.choice(X, int(rng.integers(1, len(X) + 1)), replace=False).tolist())
                for X in (S, S, T, T)]
        S1, S2, T1, T2 = subs
        if len(S2) * len(T2) > len(S1) * len(T1):
            S1, S2, T1, T2 = S2, S1, T2, T1
        lb = pair_lower_bound(g, S, T, S1, S2, T1, T2)
        viol += lb > double_enumeration(g.weights[np.ix_(S, T)]) + 1e-12
    coarse = 0
    for trial in range(200):
        g = random_graph(rng, 8)
        if trial % 2 == 0:
            P, Q = VertexPartition.trivial(8), VertexPartition([range(4), range(4, 8)])
        else:
            P = VertexPartition.from_labels(rng.integers(0, 3, 8))
            Q = VertexPartition([[v for v in b if sub[v] == j] for b in P.blocks
                                 for sub in [rng.integers(0, 3, 8)] for j in range(3)
                                 if any(sub[v] == j for v in b)])
        k = max(sum(set(c) <= set(b) for c in Q.blocks) for b in P.blocks)
        assert is_refinement(Q, P)
        fine = irreg_partition(g, Q)[0]
        viol += irreg_partition(g, P)[0] < coarsen_bound(fine, k) - 1e-12
        coarse += 1
    report(10, viol == 0, f"200 quadruples and {coarse} refinement pairs, {viol} violations")


def test_criterion_11_paper_scale_arithmetic():
    rng = np.random.default_rng(SEED + 11)
    plan = plan_paper_params(1e-14)
    bad = []
    if not (plan.alpha == Fraction(1, 144) and plan.s == 576):
        bad.append(f"1e-14 -> {plan.alpha}, {plan.s}")
    for _ in range(100):
        eps = Fraction(int(rng.integers(1, 10 ** 6)), 10 ** 19) * Fraction(int(rng.integers(1, 10 ** 6)), 10 ** 6)
        assert eps < Fraction(1, 10 ** 13)
        p = plan_paper_params(eps)
        inv = 1 / p.alpha
        m = inv.numerator // 6
        ok = (p.alpha > PAPER_CONST * eps and inv.denominator == 1 and inv.numerator % 6 == 0
              and Fraction(1, 6 * (m + 1)) <= PAPER_CONST * eps and p.s == inv * inv / 36)
        if not ok:
            bad.append(str(eps))
    report(11, not bad, f"1e-14 -> alpha={plan.alpha}, s={plan.s}; 100 random eps, failures: {bad[:3] or 'none'}")


if __name__ == "__main__":
    for name, fn in sorted(globals().copy().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
