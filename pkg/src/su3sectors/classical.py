"""Classical limit on SU(3) coherent states.

The state is the site-averaged one-body matrix ``G_ab = <T_ab> / L``, a
3x3 Hermitian matrix with trace ``n``.  The classical energy per site is

    H(G) = h (G11 - G33) - chi_- chi_+,
    chi_+ = g1 G12 + g2 G23,   chi_- = conj(chi_+),

and the flow is the Lie-Poisson (Heisenberg) equation

    dG/dt = -i [G, K],   K_ab = dH/dG_ba,

which makes ``tr G``, ``G11 - G33`` and the Casimir functions
``C2 = tr G^2``, ``C3 = tr G^3`` constants of motion along with ``H``.

Trajectories are integrated in the nine real coordinates
``(G11, G22, G33, Re G12, Im G12, Re G13, Im G13, Re G23, Im G23)`` so
that Hermiticity holds exactly.  The integrator is an adaptive
Dormand-Prince 5(4) pair compiled with numba; ensemble members run in
parallel threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import InvalidInputError, NumericalError
from .hamiltonian import HamiltonianParams

# prefer OpenMP: old TBB builds only emit a warning before numba falls back
numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]

OK, STEP_UNDERFLOW, MAX_STEPS = 0, 1, 2
# local error target per step, as a fraction of the requested drift tolerance
LOCAL_TOL_FACTOR = 1e-3

# ------------------------------------------------------------ coherent states


@dataclass(frozen=True)
class CoherentParams:
    """SU(3) coherent-state parameters with ``alpha = p/L`` and ``beta = q/L``.

    Degenerate orbits are parametrized without redundancy: for
    ``beta = 0`` the state does not depend on ``gamma2`` and for
    ``alpha = 0`` it depends on ``gamma1`` only through
    ``gamma3 - gamma1 gamma2``, so those parameters must be zero.
    """

    gamma1: complex
    gamma2: complex
    gamma3: complex
    alpha: float
    beta: float
    n: float = 1.0

    def __post_init__(self):
        for name in ("gamma1", "gamma2", "gamma3"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.alpha < 0 or self.beta < 0:
            raise InvalidInputError(f"alpha and beta must be non-negative, got {self.alpha}, {self.beta}")
        if self.n <= 0:
            raise InvalidInputError(f"n must be positive, got {self.n}")
        if self.beta == 0 and self.gamma2 != 0:
            raise InvalidInputError("beta = 0 requires gamma2 = 0")
        if self.alpha == 0 and self.gamma1 != 0:
            raise InvalidInputError("alpha = 0 requires gamma1 = 0")

    @classmethod
    def restricted(cls, gamma1, gamma2, gamma3, alpha, beta, n=1.0) -> "CoherentParams":
        """Like the constructor but zeroes the redundant parameter of a degenerate orbit."""
        if beta == 0:
            gamma2 = 0.0
        if alpha == 0:
            gamma1 = 0.0
        return cls(gamma1, gamma2, gamma3, alpha, beta, n)

    @property
    def physical(self) -> bool:
        """Whether ``alpha + 2 beta <= n``, i.e. the labels fit a diagram of ``n L`` boxes."""
        return self.alpha + 2 * self.beta <= self.n * (1 + 1e-12)

    @property
    def gammas(self) -> np.ndarray:
        return np.array([self.gamma1, self.gamma2, self.gamma3])

    def with_gammas(self, gammas) -> "CoherentParams":
        g1, g2, g3 = (complex(x) for x in gammas)
        return CoherentParams(g1, g2, g3, self.alpha, self.beta, self.n)

    def free_mask(self) -> np.ndarray:
        """Which of the three gammas are genuine coordinates of the orbit."""
        return np.array([self.alpha != 0, self.beta != 0, True])


REFERENCE_GAMMAS = (4 / np.sqrt(21), 2 / np.sqrt(21), 1j / np.sqrt(21))


@dataclass
class ClassicalState:
    G: np.ndarray
    params: HamiltonianParams
    n: float

    def __post_init__(self):
        self.G = np.asarray(self.G, dtype=complex)
        if self.G.shape != (3, 3):
            raise InvalidInputError(f"G must be 3x3, got {self.G.shape}")
        if np.max(np.abs(self.G - self.G.conj().T)) > 1e-12 * max(1.0, np.abs(self.G).max()):
            raise InvalidInputError("G is not Hermitian")


def coherent_matrix(cp: CoherentParams) -> np.ndarray:
    """Expectation values of ``T_ab / L`` in the coherent state."""
    g1, g2, g3 = cp.gamma1, cp.gamma2, cp.gamma3
    a, b = cp.alpha, cp.beta
    w = g3 - g1 * g2
    A1 = 1 + abs(g1) ** 2 + abs(g3) ** 2
    A2 = 1 + abs(g2) ** 2 + abs(w) ** 2
    P, Q = a / A1, b / A2
    G = np.zeros((3, 3), dtype=complex)
    G[0, 0] = cp.n / 3 + P / 3 * (2 - abs(g1) ** 2 - abs(g3) ** 2) + Q / 3 * (1 + abs(g2) ** 2 - 2 * abs(w) ** 2)
    G[1, 1] = cp.n / 3 + P / 3 * (-1 + 2 * abs(g1) ** 2 - abs(g3) ** 2) + Q / 3 * (1 - 2 * abs(g2) ** 2 + abs(w) ** 2)
    G[2, 2] = cp.n / 3 + P / 3 * (-1 - abs(g1) ** 2 + 2 * abs(g3) ** 2) + Q / 3 * (-2 + abs(g2) ** 2 + abs(w) ** 2)
    G[0, 1] = P * g1 - Q * np.conj(g2) * w
    G[0, 2] = P * g3 + Q * w
    G[1, 2] = P * np.conj(g1) * g3 + Q * g2
    for i, j in ((0, 1), (0, 2), (1, 2)):
        G[j, i] = np.conj(G[i, j])
    return G


def init_from_coherent(cp: CoherentParams, params: HamiltonianParams | None = None) -> ClassicalState:
    return ClassicalState(coherent_matrix(cp), params or HamiltonianParams(1.0, 2.0, 0.4), cp.n)


# ------------------------------------------------------------ energy and flow


def _as_matrix(state) -> np.ndarray:
    return np.asarray(state.G if isinstance(state, ClassicalState) else state, dtype=complex)


def classical_energy(G, params: HamiltonianParams) -> float:
    G = _as_matrix(G)
    chi_p = params.g1 * G[0, 1] + params.g2 * G[1, 2]
    chi_m = params.g1 * G[1, 0] + params.g2 * G[2, 1]
    return float(np.real(params.h * (G[0, 0] - G[2, 2]) - chi_m * chi_p))


def energy_gradient(G, params: HamiltonianParams) -> np.ndarray:
    """``K`` with ``K_ab = dH / dG_ba`` (entries treated as independent)."""
    G = _as_matrix(G)
    chi_p = params.g1 * G[0, 1] + params.g2 * G[1, 2]
    chi_m = params.g1 * G[1, 0] + params.g2 * G[2, 1]
    K = np.zeros((3, 3), dtype=complex)
    K[0, 0], K[2, 2] = params.h, -params.h
    K[0, 1], K[1, 2] = -params.g1 * chi_p, -params.g2 * chi_p
    K[1, 0], K[2, 1] = -params.g1 * chi_m, -params.g2 * chi_m
    return K


def eom_rhs(state: ClassicalState) -> np.ndarray:
    """``dG/dt = -i [G, K]``."""
    G = _as_matrix(state)
    K = energy_gradient(G, state.params)
    return -1j * (G @ K - K @ G)


def casimir_functions(state) -> tuple[float, float]:
    """``C2 = sum G_ab G_ba`` and ``C3 = sum G_ab G_bc G_ca``."""
    G = _as_matrix(state)
    G2 = G @ G
    c2, c3 = np.trace(G2), np.trace(G2 @ G)
    scale = max(1.0, float(np.abs(G).max()) ** 3)
    if abs(c2.imag) > 1e-12 * scale or abs(c3.imag) > 1e-12 * scale:
        raise NumericalError("Casimir functions are not real; G is not Hermitian")
    return float(c2.real), float(c3.real)


def reduced_coordinates(state) -> tuple[float, float]:
    """``q1 = <Y'>`` and ``q2 = <V^2>`` per site.

    ``V^2 = V3 (V3 + 1) + V- V+`` is transcribed as ``v3^2 + v3 + G13 G31``
    with ``v3 = (G11 - G33) / 2``.
    """
    G = _as_matrix(state)
    q1 = float(np.real(2 * G[1, 1] - G[0, 0] - G[2, 2]) / 3)
    v3 = float(np.real(G[0, 0] - G[2, 2]) / 2)
    return q1, v3 * v3 + v3 + float(np.real(G[0, 2] * G[2, 0]))


def to_real(G) -> np.ndarray:
    G = _as_matrix(G)
    return np.array([G[0, 0].real, G[1, 1].real, G[2, 2].real,
                     G[0, 1].real, G[0, 1].imag, G[0, 2].real, G[0, 2].imag, G[1, 2].real, G[1, 2].imag])


def from_real(y) -> np.ndarray:
    """Hermitian matrices from real coordinates; works on trailing axis."""
    y = np.asarray(y, dtype=float)
    G = np.zeros(y.shape[:-1] + (3, 3), dtype=complex)
    G[..., 0, 0], G[..., 1, 1], G[..., 2, 2] = y[..., 0], y[..., 1], y[..., 2]
    G[..., 0, 1] = y[..., 3] + 1j * y[..., 4]
    G[..., 0, 2] = y[..., 5] + 1j * y[..., 6]
    G[..., 1, 2] = y[..., 7] + 1j * y[..., 8]
    G[..., 1, 0] = np.conj(G[..., 0, 1])
    G[..., 2, 0] = np.conj(G[..., 0, 2])
    G[..., 2, 1] = np.conj(G[..., 1, 2])
    return G


@numba.njit(cache=True, nogil=True)
def _rhs_real(y, h, g1, g2, out, G, K):
    """Real-coordinate right-hand side; ``G`` and ``K`` are 3x3 complex workspaces."""
    G[0, 0], G[1, 1], G[2, 2] = y[0], y[1], y[2]
    G[0, 1] = complex(y[3], y[4])
    G[0, 2] = complex(y[5], y[6])
    G[1, 2] = complex(y[7], y[8])
    G[1, 0], G[2, 0], G[2, 1] = G[0, 1].conjugate(), G[0, 2].conjugate(), G[1, 2].conjugate()
    chi = g1 * G[0, 1] + g2 * G[1, 2]
    chic = chi.conjugate()
    K[0, 0], K[2, 2] = h, -h
    K[0, 1], K[1, 2] = -g1 * chi, -g2 * chi
    K[1, 0], K[2, 1] = -g1 * chic, -g2 * chic
    # dG/dt = -i [G, K], upper triangle only
    for a, b, slot in ((0, 0, 0), (1, 1, 1), (2, 2, 2), (0, 1, 3), (0, 2, 5), (1, 2, 7)):
        c = 0j
        for m in range(3):
            c += G[a, m] * K[m, b] - K[a, m] * G[m, b]
        d = -1j * c
        out[slot] = d.real
        if a != b:
            out[slot + 1] = d.imag


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.zeros((7, 7))
_A[1, :1] = [1 / 5]
_A[2, :2] = [3 / 40, 9 / 40]
_A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
_A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
_A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
_A[6, :6] = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])


@numba.njit(cache=True, nogil=True)
def _dp45(y0, t_grid, h_, g1, g2, tol, max_steps, out):
    """Integrate one trajectory, writing the state at every ``t_grid`` point.

    Returns ``(status, steps, time reached)``.
    """
    n_out = t_grid.shape[0]
    y = y0.copy()
    out[0, :] = y
    t = t_grid[0]
    direction = 1.0 if t_grid[-1] >= t_grid[0] else -1.0
    k = np.zeros((7, 9))
    Gw = np.zeros((3, 3), dtype=np.complex128)
    Kw = np.zeros((3, 3), dtype=np.complex128)
    ytmp = np.empty(9)
    ynew = np.empty(9)
    _rhs_real(y, h_, g1, g2, k[0], Gw, Kw)
    # initial step from the derivative scale
    scale = 0.0
    for i in range(9):
        scale = max(scale, abs(k[0, i]) / (1.0 + abs(y[i])))
    step = 0.01 * tol ** 0.2 / max(scale, 1e-12)
    steps = 0
    for j in range(1, n_out):
        target = t_grid[j]
        while direction * (target - t) > 0.0:
            if steps >= max_steps:
                return MAX_STEPS, steps, t
            last = False
            if step >= direction * (target - t):
                step = direction * (target - t)
                last = True
            hs = direction * step
            for s in range(1, 7):
                for i in range(9):
                    acc = y[i]
                    for m in range(s):
                        acc += hs * _A[s, m] * k[m, i]
                    ytmp[i] = acc
                _rhs_real(ytmp, h_, g1, g2, k[s], Gw, Kw)
            # stage 7 evaluates at the 5th-order solution (FSAL)
            err = 0.0
            for i in range(9):
                ynew[i] = ytmp[i]
                e = 0.0
                for m in range(7):
                    e += _E[m] * k[m, i]
                sc = tol * (1.0 + max(abs(y[i]), abs(ynew[i])))
                err += (hs * e / sc) ** 2
            err = np.sqrt(err / 9.0)
            steps += 1
            if err <= 1.0:
                t = target if last else t + hs
                for i in range(9):
                    y[i] = ynew[i]
                    k[0, i] = k[6, i]
                fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                if not last:
                    step *= fac
            else:
                step *= max(0.1, 0.9 * err ** -0.2)
                if step < 1e-14 * (1.0 + abs(t)):
                    return STEP_UNDERFLOW, steps, t
        for i in range(9):
            out[j, i] = y[i]
    return OK, steps, t


@numba.njit(cache=True, parallel=True)
def _dp45_batch(y0s, t_grid, h_, g1, g2, tol, max_steps, out, status, times):
    for r in numba.prange(y0s.shape[0]):
        st, _, tr = _dp45(y0s[r], t_grid, h_, g1, g2, tol, max_steps, out[r])
        status[r] = st
        times[r] = tr


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray  # (len(t), 9)
    params: HamiltonianParams
    monitors: dict = field(default_factory=dict)

    @property
    def G(self) -> np.ndarray:
        return from_real(self.y)


MONITOR_NAMES = ("H", "C2", "C3", "trace", "magnetization")


def monitor_series(y, params: HamiltonianParams) -> dict:
    """Conserved quantities along a trajectory given in real coordinates."""
    y = np.atleast_2d(y)
    G = from_real(y)
    chi = params.g1 * G[:, 0, 1] + params.g2 * G[:, 1, 2]
    H = params.h * (y[:, 0] - y[:, 2]) - np.abs(chi) ** 2
    G2 = G @ G
    C2 = np.real(np.trace(G2, axis1=1, axis2=2))
    C3 = np.real(np.trace(G2 @ G, axis1=1, axis2=2))
    return {"H": H, "C2": C2, "C3": C3, "trace": y[:, 0] + y[:, 1] + y[:, 2], "magnetization": y[:, 0] - y[:, 2]}


def monitor_drift(y, params: HamiltonianParams) -> dict:
    """Largest drift of each conserved quantity relative to ``max(1, |initial|)``."""
    series = monitor_series(y, params)
    return {k: float(np.max(np.abs(v - v[0])) / max(1.0, abs(v[0]))) for k, v in series.items()}


def set_threads(threads: int | None) -> None:
    if threads:
        numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))


def integrate_many(y0s, t_grid, params: HamiltonianParams, tol: float = 1e-10, max_steps: int = 50_000_000,
                   check_monitors: bool = True, threads: int | None = None) -> np.ndarray:
    """Integrate several initial states on a common output grid; returns ``(R, T, 9)``."""
    y0s = np.ascontiguousarray(np.atleast_2d(y0s), dtype=float)
    t_grid = np.ascontiguousarray(t_grid, dtype=float)
    if tol <= 0:
        raise InvalidInputError(f"tol must be positive, got {tol}")
    if t_grid.ndim != 1 or len(t_grid) < 2:
        raise InvalidInputError("t_grid needs at least two points")
    d = np.diff(t_grid)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise InvalidInputError("t_grid must be strictly monotonic")
    set_threads(threads)
    out = np.zeros((y0s.shape[0], len(t_grid), 9))
    status = np.zeros(y0s.shape[0], dtype=np.int64)
    times = np.zeros(y0s.shape[0])
    local = tol * LOCAL_TOL_FACTOR
    _dp45_batch(y0s, t_grid, params.h, params.g1, params.g2, local, max_steps, out, status, times)
    for r in range(len(status)):
        if status[r] == STEP_UNDERFLOW:
            raise NumericalError(f"member {r}: step size underflow at t = {times[r]:.6g}")
        if status[r] == MAX_STEPS:
            raise NumericalError(f"member {r}: step budget exhausted at t = {times[r]:.6g}")
    if check_monitors:
        limit = 100 * tol
        for r in range(len(status)):
            drift = monitor_drift(out[r], params)
            bad = {k: v for k, v in drift.items() if v > limit}
            if bad:
                raise NumericalError(f"member {r}: conservation monitors breached {bad} (limit {limit:.1e})")
    return out


def integrate(state0: ClassicalState, t_end: float | None = None, tol: float = 1e-10, t_grid=None,
              n_out: int = 1001, check_monitors: bool = True) -> Trajectory:
    """Adaptive Dormand-Prince 5(4) integration of one state.

    Every conserved quantity is checked at the output times against
    ``100 * tol`` (relative to ``max(1, |initial value|)``).
    """
    if t_grid is None:
        if t_end is None:
            raise InvalidInputError("give t_end or t_grid")
        t_grid = np.linspace(0.0, t_end, n_out)
    y = integrate_many(to_real(state0.G)[None, :], t_grid, state0.params, tol, check_monitors=check_monitors)[0]
    return Trajectory(np.asarray(t_grid, dtype=float), y, state0.params, monitor_drift(y, state0.params))


# ------------------------------------------------------------ ensembles


@dataclass
class DivergenceSeries:
    t: np.ndarray
    delta_r: np.ndarray
    R: int
    eps: float
    n: float
    monitors: dict = field(default_factory=dict)
    reference: np.ndarray | None = None  # (T, 9) trajectory of member 0
    window: tuple[float, float] | None = None
    lyapunov: float | None = None
    stderr: float | None = None


def pair_distances(ys) -> np.ndarray:
    """``Delta r_uv(t)`` for all ``u > v`` in a fixed pair order, shape ``(pairs, T)``.

    Frobenius norm of ``G(u) - G(v)``: off-diagonal real coordinates count twice.
    """
    R = ys.shape[0]
    weights = np.array([1, 1, 1, 2, 2, 2, 2, 2, 2], dtype=float)
    out = []
    for u in range(R):
        for v in range(u):
            d = ys[u] - ys[v]
            out.append(np.sqrt(np.sum(weights * d * d, axis=-1)))
    return np.array(out)


def ensemble_divergence(cp: CoherentParams, params: HamiltonianParams, R: int = 20, eps: float = 1e-7,
                        t_grid=None, seed: int = 0, tol: float = 1e-10, threads: int | None = None,
                        check_monitors: bool = True) -> DivergenceSeries:
    """Mean pair distance of ``R`` trajectories started from perturbed coherent states.

    Each free gamma gets an independent complex Gaussian offset of scale
    ``eps``; ``Delta r(t) = sum_{u>v} Delta r_uv(t) / (R (R - 1))``.
    """
    if R < 2:
        raise InvalidInputError(f"R must be >= 2, got {R}")
    if eps < 0:
        raise InvalidInputError(f"eps must be >= 0, got {eps}")
    if t_grid is None:
        t_grid = np.linspace(0.0, 50.0, 2001)
    rng = np.random.default_rng(seed)
    mask = cp.free_mask()
    y0s = []
    for _ in range(R):
        offset = eps * (rng.standard_normal(3) + 1j * rng.standard_normal(3)) / np.sqrt(2.0)
        member = cp.with_gammas(cp.gammas + offset * mask)
        y0s.append(to_real(coherent_matrix(member)))
    try:
        ys = integrate_many(np.array(y0s), t_grid, params, tol, check_monitors=check_monitors, threads=threads)
    except NumericalError as exc:
        raise NumericalError(f"ensemble integration failed ({exc})") from exc
    dr = pair_distances(ys).sum(axis=0) / (R * (R - 1))
    drift = {}
    for r in range(R):
        for k, v in monitor_drift(ys[r], params).items():
            drift[k] = max(drift.get(k, 0.0), v)
    return DivergenceSeries(np.asarray(t_grid, dtype=float), dr, R, eps, cp.n, drift, ys[0])


# ------------------------------------------------------------ Lyapunov fits

LINEAR, POWER = "linear", "power"


@dataclass(frozen=True)
class LyapunovFit:
    """Growth rate of ``log Delta r`` on a time window.

    ``r2_linear`` is the coefficient of determination of the plain
    log-linear fit on the same window, whatever ``model`` produced
    ``lyapunov``.  ``kappa`` is the power-law exponent of the ``power``
    model and zero otherwise.
    """

    lyapunov: float
    stderr: float
    r2_linear: float
    window: tuple[float, float]
    model: str
    kappa: float = 0.0
    n_points: int = 0

    def summary(self) -> dict:
        return {"lambda": self.lyapunov, "stderr": self.stderr, "r2_linear": self.r2_linear,
                "window": list(self.window), "model": self.model, "kappa": self.kappa,
                "n_points": self.n_points}


def saturation_level(delta_r, tail: float = 0.2) -> float:
    """Median of the last ``tail`` fraction of the series."""
    d = np.asarray(delta_r, dtype=float)
    return float(np.median(d[int(np.floor((1.0 - tail) * len(d))):]))


def automatic_window(t, delta_r, start_factor: float = 10.0, stop_fraction: float = 0.1) -> tuple[float, float]:
    """``[t1, t2]`` with ``Delta r(t1) = 10 Delta r(0)`` and ``Delta r(t2) = 0.1 saturation``.

    Both times are first crossings on the grid.
    """
    t = np.asarray(t, dtype=float)
    d = np.asarray(delta_r, dtype=float)
    if t.shape != d.shape or t.size < 3:
        raise InvalidInputError("t and delta_r must be equal-length series with at least three points")
    if not d[0] > 0:
        raise InvalidInputError(f"Delta r(0) must be positive, got {d[0]}")
    above = np.flatnonzero(d >= start_factor * d[0])
    if above.size == 0:
        raise NumericalError(f"Delta r never reaches {start_factor} Delta r(0); extend the time grid")
    i1 = above[0]
    sat = saturation_level(d)
    reach = np.flatnonzero((d >= stop_fraction * sat) & (np.arange(d.size) > i1))
    if reach.size == 0 or reach[0] - i1 < 2:
        raise NumericalError("no growth regime between the transient and saturation")
    return float(t[i1]), float(t[reach[0]])


def lyapunov_fit(series, window=None, model: str = POWER, t=None) -> LyapunovFit:
    """Least-squares growth rate of ``log Delta r`` over ``window``.

    ``model="linear"`` fits ``log Delta r = lambda t + c``.  ``"power"``
    adds a ``kappa log t`` regressor so that algebraic growth, which is
    what regular trajectories show, is not mistaken for an exponential;
    it needs ``t > 0`` on the window.  Standard errors are
    heteroskedasticity and autocorrelation consistent (Newey-West), since
    neighbouring grid points are strongly correlated.  ``series`` is a
    DivergenceSeries or, with ``t`` given, a bare array of values.
    """
    import statsmodels.api as sm

    if isinstance(series, DivergenceSeries):
        t_all, d_all = series.t, series.delta_r
    else:
        if t is None:
            raise InvalidInputError("pass t together with a bare Delta r array")
        t_all, d_all = np.asarray(t, dtype=float), np.asarray(series, dtype=float)
    if model not in (LINEAR, POWER):
        raise InvalidInputError(f"unknown model {model!r}")
    if window is None:
        window = automatic_window(t_all, d_all)
    t1, t2 = float(window[0]), float(window[1])
    if not t2 > t1:
        raise InvalidInputError(f"empty window [{t1}, {t2}]")
    sel = (t_all >= t1) & (t_all <= t2)
    tt, dd = t_all[sel], d_all[sel]
    if tt.size < 4:
        raise InvalidInputError(f"window [{t1}, {t2}] holds {tt.size} grid points, need at least 4")
    if np.any(~(dd > 0)):
        raise InvalidInputError("Delta r must be positive on the fit window")
    y = np.log(dd)
    linear = sm.OLS(y, sm.add_constant(tt)).fit()
    if model == LINEAR:
        X = sm.add_constant(tt)
    else:
        if t1 <= 0:
            raise InvalidInputError("the power model needs a window with t > 0")
        X = np.column_stack([np.ones_like(tt), tt, np.log(tt)])
    lags = int(4 * (tt.size / 100.0) ** (2.0 / 9.0))
    fit = sm.OLS(y, X).fit(cov_type="HAC", cov_kwds={"maxlags": max(lags, 1)})
    lam, err = float(fit.params[1]), float(fit.bse[1])
    kappa = float(fit.params[2]) if model == POWER else 0.0
    out = LyapunovFit(lam, err, float(linear.rsquared), (t1, t2), model, kappa, int(tt.size))
    if isinstance(series, DivergenceSeries):
        series.window, series.lyapunov, series.stderr = out.window, out.lyapunov, out.stderr
    return out
