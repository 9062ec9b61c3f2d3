"""Reduced-scale acceptance runs, one test (or group) per criterion.

Each check records a line through ``acceptance_report`` and the session
summary prints one verdict per criterion.  Sub-checks that are known not
to hold are marked strict xfail: the assertion is unchanged, the verdict
line reads FAIL, and an unexpected pass breaks the run.
"""

import time

import numpy as np
import pytest
from acceptance_report import record
from oracles import count_product_states

from su3sectors.classical import (
    REFERENCE_GAMMAS,
    CoherentParams,
    coherent_matrix,
    ensemble_divergence,
    integrate_many,
    lyapunov_fit,
    monitor_drift,
    saturation_level,
    to_real,
)
from su3sectors.hamiltonian import (
    CartanVector,
    HamiltonianParams,
    build_fock_sector_hamiltonian,
    build_su3_sector_hamiltonian,
    effective_rep,
    su2_embedding_commutator,
)
from su3sectors.sectors import (
    antisymmetric_sector_basis,
    enumerate_fock_tables,
    fock_sector_basis,
    symmetric_sector_basis,
)
from su3sectors.spectral import analyze, diagonalize, mean_r_ratio, r_ratios
from su3sectors.su3_repr import brute_force_basis, build_basis, irrep_hamiltonian
from su3sectors.young import Su3Label, enumerate_partitions, local_dimension, schur_weyl_table

GENERIC = HamiltonianParams(1.0, 1.7, 1.0)
DYNAMICS = HamiltonianParams(1.0, 2.0, 0.4)


# ------------------------------------------------------------ 1. Schur-Weyl


def test_schur_weyl_identity():
    start = time.perf_counter()
    bad = [(L, d) for d in (2, 3, 6) for L in range(1, 11)
           if sum(r.specht_dim * r.weyl_dim for r in schur_weyl_table(L, d)) != d**L]
    elapsed = time.perf_counter() - start
    ok = record(1, "sum dim S * dim U = d^L, L<=10, d in 2,3,6", not bad and elapsed < 5,
                f"mismatches={bad} time={elapsed:.2f}s")
    assert ok


# ------------------------------------------------------------ 2. pathway equivalence


def test_pathway_equivalence():
    start = time.perf_counter()
    worst = 0.0
    count = 0
    for params in (GENERIC, HamiltonianParams(0.3, -0.8, 1.3)):
        for L in range(1, 6):
            for lam in enumerate_partitions(L, 3):
                label = Su3Label.from_diagram(lam)
                gt = build_basis(label.p, label.q, label.r)
                brute = brute_force_basis(lam)
                a = np.linalg.eigvalsh(irrep_hamiltonian(gt, params, L).toarray())
                b = np.linalg.eigvalsh(irrep_hamiltonian(brute, params, L).toarray())
                worst = max(worst, float(np.max(np.abs(a - b))))
                count += 1
    elapsed = time.perf_counter() - start
    ok = record(2, "GT vs symmetrizer spectra, n=1, L<=5", worst < 1e-9 and elapsed < 120,
                f"{count} diagrams, max diff={worst:.1e}, time={elapsed:.1f}s")
    assert ok


# ------------------------------------------------------------ 3. Fock tables


def test_fock_table_enumeration():
    start = time.perf_counter()
    printed = {((0, 2, 0), (0, 1, 0)), ((1, 1, 0), (0, 0, 1)), ((1, 0, 1), (0, 1, 0)), ((0, 1, 1), (1, 0, 0))}
    tables = enumerate_fock_tables((2, 1), 0)
    ok_example = len(tables) == 4 and set(tables) == printed
    rng = np.random.default_rng(0)
    mismatches = []
    for _ in range(50):
        occ = tuple(int(x) for x in rng.integers(0, 4, size=rng.integers(1, 5)))
        M = int(rng.integers(-sum(occ), sum(occ) + 1))
        if len(enumerate_fock_tables(occ, M)) != count_product_states(occ, M):
            mismatches.append((occ, M))
    elapsed = time.perf_counter() - start
    ok = record(3, "n=(2,1) M=0 tables and 50 random counts", ok_example and not mismatches and elapsed < 30,
                f"example={'ok' if ok_example else tables} mismatches={mismatches} time={elapsed:.1f}s")
    assert ok


# ------------------------------------------------------------ 4. generic and single-row irreps


def irrep_analysis(p, q, M=0):
    sm = build_su3_sector_hamiltonian(p, q, M=M, params=GENERIC)
    return sm, analyze(diagonalize(sm.matrix), label=sm.description)


@pytest.mark.xfail(strict=True, reason="mixed spectrum: regular low-energy stretch pulls the block mean to 0.475")
def test_generic_irrep_goe_band():
    start = time.perf_counter()
    sm, res = irrep_analysis(40, 20)
    elapsed = time.perf_counter() - start
    ok = record(4, "(a) D(40,20) M=0 mean r in [0.50, 0.56]", 0.50 <= res.mean_r <= 0.56 and elapsed < 300,
                f"dim={sm.dim} mean_r={res.mean_r:.4f} time={elapsed:.1f}s")
    assert ok


def test_single_row_irrep_rigidity():
    start = time.perf_counter()
    sm, res = irrep_analysis(150, 0)
    elapsed = time.perf_counter() - start
    fraction = res.summary()["picket_fraction"]
    ok = fraction >= 0.6 and res.ks_wd > 0.2 and res.ks_poisson > 0.2 and elapsed < 300
    record(4, "(b) D(150,0) M=0 picket fence", ok,
           f"dim={sm.dim} picket={fraction:.3f} ks_wd={res.ks_wd:.3f} ks_poisson={res.ks_poisson:.3f} "
           f"time={elapsed:.1f}s")
    assert ok


# ------------------------------------------------------------ 5. broken-symmetry sectors

# Named small configurations plus a fixed desk-scale grid; every member with dim >= 300 is scored.
NAMED = [
    ("symmetric", (3, 3), 1),
    ("antisymmetric", (1, 2, 3), 0),
    ("fock", (1, 2, 3), 0),
]
GRID = (
    [("symmetric", (L, n), M) for L in (3, 4, 5, 6) for n in (2, 3, 4) for M in (0, 1)]
    + [("antisymmetric", occ, M) for occ in [(1, 2, 3), (2, 3, 4), (1, 2, 3, 4), (3, 3, 3), (4, 4, 4, 4),
                                              (5, 5, 5, 5)] for M in (0, 1)]
    + [("fock", occ, M) for occ in [(1, 2, 3), (2, 3, 4), (1, 2, 3, 4), (1, 2, 2, 3), (1, 1, 2, 2, 3)]
       for M in (0, 1)]
)
POISSON_OUTLIERS = {("symmetric", (5, 4), 0)}


def sector_basis(kind, shape, M):
    if kind == "symmetric":
        return symmetric_sector_basis(shape[0], shape[1], M)
    if kind == "antisymmetric":
        return antisymmetric_sector_basis(shape, M)
    return fock_sector_basis(shape, M)


def poisson_cases():
    seen = []
    for case in NAMED + GRID:
        if case not in seen:
            seen.append(case)
    marks = pytest.mark.xfail(strict=True, reason="mean r = 0.349 just below the band; threshold-independent")
    return [pytest.param(*c, marks=marks if c in POISSON_OUTLIERS else (), id=f"{c[0]}-{c[1]}-M{c[2]}")
            for c in seen]


@pytest.fixture(scope="module")
def poisson_clock():
    return {"elapsed": 0.0}


@pytest.mark.parametrize("kind,shape,M", poisson_cases())
def test_broken_symmetry_poisson_band(kind, shape, M, poisson_clock):
    start = time.perf_counter()
    basis = sector_basis(kind, shape, M)
    label = f"{kind} {shape} M={M}"
    if basis.dim < 300:
        poisson_clock["elapsed"] += time.perf_counter() - start
        record(5, label, True, f"dim={basis.dim} (reported only)")
        return
    e = diagonalize(build_fock_sector_hamiltonian(basis, GENERIC).matrix)
    r, discarded = mean_r_ratio(e, return_discarded=True)
    poisson_clock["elapsed"] += time.perf_counter() - start
    ok = 0.35 <= r <= 0.42 and poisson_clock["elapsed"] < 300
    record(5, label, ok, f"dim={basis.dim} mean_r={r:.4f} degenerate_gaps={discarded} "
                         f"cumulative time={poisson_clock['elapsed']:.1f}s")
    assert ok


# ------------------------------------------------------------ 6. integrable point


@pytest.mark.parametrize("g", [1.0, 1.7])
def test_integrable_point(g):
    start = time.perf_counter()
    params = HamiltonianParams(1.0, g, g)
    residuals = {pq: su2_embedding_commutator(*pq, params=params)
                 for pq in [(4, 2), (10, 5), (20, 10), (12, 12), (40, 20), (30, 0)]}
    # D(p,0) holds each embedded spin once, so only p, q >= 1 can show degeneracies
    degenerate = {}
    for pq in [(4, 2), (10, 5), (20, 10), (12, 12), (40, 20)]:
        for M in (0, 1):
            sm = build_su3_sector_hamiltonian(*pq, M=M, params=params)
            degenerate[(pq, M)] = r_ratios(np.linalg.eigvalsh(sm.matrix))[1]
    elapsed = time.perf_counter() - start
    worst = max(residuals.values())
    ok = worst < 1e-10 and min(degenerate.values()) > 0 and elapsed < 60
    record(6, f"g1=g2={g}", ok, f"max [H,S^2]={worst:.1e} min degenerate gaps={min(degenerate.values())} "
                               f"time={elapsed:.1f}s")
    assert ok


# ------------------------------------------------------------ 7. classical conservation


def test_classical_conservation():
    start = time.perf_counter()
    rng = np.random.default_rng(0)
    worst = {}
    for n in (1, 10, 100):
        y0s = []
        for _ in range(20):
            gammas = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            a = rng.uniform(0.0, 1.0)
            b = rng.uniform(0.0, (1.0 - a) / 2)
            y0s.append(to_real(coherent_matrix(CoherentParams.restricted(*gammas, a * n, b * n, n))))
        ys = integrate_many(np.array(y0s), np.linspace(0.0, 100.0, 101), DYNAMICS, tol=1e-10, check_monitors=False)
        worst[n] = max(max(monitor_drift(y, DYNAMICS).values()) for y in ys)
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) < 1e-8 and elapsed < 60
    record(7, "20 coherent states per n, t=100", ok,
           " ".join(f"n={n}:{v:.1e}" for n, v in worst.items()) + f" time={elapsed:.1f}s")
    assert ok


# ------------------------------------------------------------ 8 and 9. divergence runs


@pytest.fixture(scope="module")
def divergence_runs():
    """Lazily computed ensembles shared between the chaos and scaling criteria."""
    cache = {}

    def get(alpha, beta, n=1.0):
        key = (alpha, beta, n)
        if key not in cache:
            start = time.perf_counter()
            cp = CoherentParams.restricted(*REFERENCE_GAMMAS, alpha, beta, n)
            t = np.linspace(0.0, 1000.0 / n, 4001)
            series = ensemble_divergence(cp, DYNAMICS, R=20, eps=1e-7, t_grid=t, seed=0, tol=1e-10)
            fit = lyapunov_fit(series)
            cache[key] = (series, fit, time.perf_counter() - start)
        return cache[key]

    return get


@pytest.fixture(scope="module")
def chaos_clock():
    return {"elapsed": 0.0, "seen": set()}


def run_chaos(divergence_runs, chaos_clock, alpha, beta):
    series, fit, elapsed = divergence_runs(alpha, beta)
    if (alpha, beta) not in chaos_clock["seen"]:
        chaos_clock["seen"].add((alpha, beta))
        chaos_clock["elapsed"] += elapsed
    return series, fit


def fit_detail(fit, clock):
    return (f"lambda={fit.lyapunov:.4g} sigma={fit.stderr:.2g} z={fit.lyapunov / fit.stderr:.1f} "
            f"R2={fit.r2_linear:.3f} window=({fit.window[0]:.0f},{fit.window[1]:.0f}) "
            f"cumulative time={clock['elapsed']:.0f}s")


@pytest.mark.parametrize("alpha,beta", [(1.0, 0.0), (0.0, 0.5)])
def test_regular_sector_zero_lyapunov(alpha, beta, divergence_runs, chaos_clock):
    _, fit = run_chaos(divergence_runs, chaos_clock, alpha, beta)
    ok = abs(fit.lyapunov) < 3 * fit.stderr and chaos_clock["elapsed"] < 300
    record(8, f"({alpha},{beta}) |lambda| < 3 sigma", ok, fit_detail(fit, chaos_clock))
    assert ok


@pytest.mark.parametrize("alpha,beta", [(0.4, 0.3), (0.3, 0.4)])
def test_chaotic_sector_positive_lyapunov(alpha, beta, divergence_runs, chaos_clock):
    _, fit = run_chaos(divergence_runs, chaos_clock, alpha, beta)
    ok = fit.lyapunov > 5 * fit.stderr > 0 and chaos_clock["elapsed"] < 300
    record(8, f"({alpha},{beta}) lambda > 5 sigma > 0", ok, fit_detail(fit, chaos_clock))
    assert ok


@pytest.mark.parametrize("alpha,beta", [
    (0.4, 0.3),
    pytest.param(0.3, 0.4, marks=pytest.mark.xfail(
        strict=True, reason="convex log-divergence on the window: slow transient then faster growth, R2 = 0.933")),
])
def test_chaotic_sector_log_linear(alpha, beta, divergence_runs, chaos_clock):
    _, fit = run_chaos(divergence_runs, chaos_clock, alpha, beta)
    ok = fit.r2_linear > 0.95
    record(8, f"({alpha},{beta}) log-linear R2 > 0.95", ok, fit_detail(fit, chaos_clock))
    assert ok


def test_lyapunov_scales_with_n(divergence_runs):
    ns = (1.0, 10.0, 100.0)
    runs = {n: divergence_runs(0.4 * n, 0.3 * n, n) for n in ns}
    rates = np.array([runs[n][1].lyapunov / n for n in ns])
    plateaus = [saturation_level(runs[n][0].delta_r) for n in ns]
    elapsed = sum(runs[n][2] for n in ns)
    spread = rates.max() / rates.min() - 1.0
    ok = spread < 0.1 and all(a < b for a, b in zip(plateaus, plateaus[1:])) and elapsed < 600
    record(9, "p/q = 4/3 family, n in 1,10,100", ok,
           "lambda/n=" + ",".join(f"{x:.4g}" for x in rates) + f" spread={spread:.1e} plateaus="
           + ",".join(f"{x:.3g}" for x in plateaus) + f" time={elapsed:.0f}s")
    assert ok


# ------------------------------------------------------------ 10. effective representation


def test_effective_rep_constraint():
    start = time.perf_counter()
    rng = np.random.default_rng(0)
    violations = 0
    for k in range(1000):
        n = (1, 2, 3, 5)[k % 4]
        length = int(rng.integers(1, min(25, local_dimension(n)) + 1))
        h = rng.integers(0, 7, size=length)
        if h.sum() == 0:
            h[-1] = 1
        cartan = CartanVector(tuple(int(x) for x in h))
        p, q, r = effective_rep(cartan, n)
        violations += min(p, q, r) < 0 or p + 2 * q + 3 * r != n * cartan.n_sites
    identity = all(
        effective_rep(CartanVector.from_diagram(lam), 1)
        == (Su3Label.from_diagram(lam).p, Su3Label.from_diagram(lam).q, Su3Label.from_diagram(lam).r)
        for L in range(1, 13) for lam in enumerate_partitions(L, 3))
    elapsed = time.perf_counter() - start
    ok = violations == 0 and identity and elapsed < 5
    record(10, "p*+2q*+3r* = nL on 1000 vectors, n=1 identity", ok,
           f"violations={violations} identity={'ok' if identity else 'broken'} time={elapsed:.2f}s")
    assert ok
