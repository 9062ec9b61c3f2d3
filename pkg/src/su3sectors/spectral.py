"""Level statistics of sector spectra.

Spacings are unfolded with a smooth fit of the level staircase and
compared with the Wigner surmise ``P(s) = (pi s / 2) exp(-pi s^2 / 4)``
and the Poisson law ``P(s) = exp(-s)`` through Kolmogorov-Smirnov
distances.  The gap-ratio statistic ``r = min(d_i, d_i+1) / max(...)``
needs no unfolding; its means for GOE and Poisson spectra are about
0.5307 and ``2 ln 2 - 1 = 0.3863``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy import stats

from .errors import InvalidInputError, NumericalError

R_GOE = 0.5307
R_POISSON = 2.0 * np.log(2.0) - 1.0
MIN_UNFOLD_LEVELS = 50
MIN_RATIO_LEVELS = 100


def wigner_cdf(s):
    s = np.asarray(s, dtype=float)
    return np.where(s > 0, 1.0 - np.exp(-np.pi * s**2 / 4.0), 0.0)


def wigner_pdf(s):
    s = np.asarray(s, dtype=float)
    return np.where(s > 0, 0.5 * np.pi * s * np.exp(-np.pi * s**2 / 4.0), 0.0)


def poisson_cdf(s):
    s = np.asarray(s, dtype=float)
    return np.where(s > 0, 1.0 - np.exp(-s), 0.0)


def poisson_pdf(s):
    s = np.asarray(s, dtype=float)
    return np.where(s >= 0, np.exp(-s), 0.0)


def diagonalize(matrix, check_pairs: int = 10, rtol: float = 1e-8, seed: int = 0, descriptor: str = "") -> np.ndarray:
    """Full ascending spectrum of a real symmetric matrix.

    A few random eigenpairs are spot-checked for ``|Hv - Ev| <= rtol |H|``.
    """
    H = np.asarray(getattr(matrix, "matrix", matrix), dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InvalidInputError(f"matrix must be square, got shape {H.shape}")
    if H.size == 0:
        return np.zeros(0)
    if not np.allclose(H, H.T, atol=1e-12 * max(1.0, np.abs(H).max())):
        raise InvalidInputError(f"matrix {descriptor} is not symmetric")
    try:
        if check_pairs:
            w, v = scipy.linalg.eigh(H, check_finite=True)
        else:
            w = scipy.linalg.eigvalsh(H, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigensolver failed for {descriptor or H.shape}: {exc}") from exc
    if check_pairs:
        rng = np.random.default_rng(seed)
        picks = rng.choice(len(w), size=min(check_pairs, len(w)), replace=False)
        scale = max(np.linalg.norm(H, 2) if len(w) < 2000 else np.abs(w).max(), 1e-300)
        resid = np.linalg.norm(H @ v[:, picks] - v[:, picks] * w[picks], axis=0)
        if resid.max() > rtol * scale:
            raise NumericalError(f"eigenpair residual {resid.max():.3g} too large for {descriptor or H.shape}")
    return np.sort(w)


def _trim(eigenvalues, trim_fraction: float) -> np.ndarray:
    e = np.sort(np.asarray(eigenvalues, dtype=float))
    if not 0.0 <= trim_fraction < 0.5:
        raise InvalidInputError(f"trim_fraction must lie in [0, 0.5), got {trim_fraction}")
    cut = int(np.floor(trim_fraction * len(e)))
    return e[cut:len(e) - cut]


def unfold(eigenvalues, method: str = "polynomial", degree: int = 7, window: int = 10,
           trim_fraction: float = 0.05) -> np.ndarray:
    """Unfolded nearest-neighbour spacings, rescaled to unit mean.

    ``polynomial`` fits the staircase ``N(E)`` with a polynomial of the
    given degree over the whole spectrum; ``local_window`` divides every
    gap by the mean gap of the ``window`` neighbours on each side.  Edge
    levels are trimmed after unfolding, so the number of spacings is
    ``len(kept levels) - 1``.
    """
    e = np.sort(np.asarray(eigenvalues, dtype=float))
    cut = int(np.floor(trim_fraction * len(e)))
    if len(e) - 2 * cut < MIN_UNFOLD_LEVELS:
        raise InvalidInputError(f"need at least {MIN_UNFOLD_LEVELS} levels after trimming, got {len(e) - 2 * cut}")
    _trim(e, trim_fraction)
    if method == "polynomial":
        staircase = np.arange(1, len(e) + 1, dtype=float)
        span = e[-1] - e[0]
        x = (e - e[0]) / span * 2.0 - 1.0 if span > 0 else np.zeros_like(e)
        fit = np.polynomial.Polynomial.fit(x, staircase, degree)
        levels = fit(x)[cut:len(e) - cut]
        s = np.diff(levels)
    elif method == "local_window":
        gaps = np.diff(e)
        kernel = np.ones(2 * window + 1)
        padded = np.pad(gaps, window, mode="reflect")
        local = np.convolve(padded, kernel, mode="valid") / kernel.size
        s = (gaps / np.where(local > 0, local, 1.0))[cut:len(gaps) - cut]
    else:
        raise InvalidInputError(f"unknown unfolding method {method!r}")
    mean = s.mean()
    if not mean > 0:
        raise NumericalError("unfolded spacings have non-positive mean")
    return s / mean


@dataclass
class SpectrumAnalysis:
    eigenvalues: np.ndarray
    unfolded_spacings: np.ndarray
    r_values: np.ndarray
    histogram: tuple[np.ndarray, np.ndarray]
    ks_wd: float
    ks_poisson: float
    mean_r: float
    discarded_gaps: int
    label: str = ""
    extra: dict = field(default_factory=dict)

    def summary(self) -> dict:
        out = {
            "sector": self.label,
            "dim": int(len(self.eigenvalues)),
            "mean_r": _finite_or_none(self.mean_r),
            "ks_wd": _finite_or_none(self.ks_wd),
            "ks_poisson": _finite_or_none(self.ks_poisson),
            "discarded_gaps": int(self.discarded_gaps),
            "picket_fraction": _finite_or_none(picket_fraction(self.unfolded_spacings)),
            "n_spacings": int(len(self.unfolded_spacings)),
        }
        out.update(self.extra)
        return out


def _finite_or_none(x):
    return float(x) if np.isfinite(x) else None


def histogram(spacings, bins: int = 40, s_max: float = 4.0) -> tuple[np.ndarray, np.ndarray]:
    """Bin centres and normalized density of ``spacings`` on ``[0, s_max]``."""
    counts, edges = np.histogram(spacings, bins=bins, range=(0.0, s_max))
    width = edges[1] - edges[0]
    density = counts / (max(len(spacings), 1) * width)
    return 0.5 * (edges[1:] + edges[:-1]), density


def spacing_statistics(spacings, bins: int = 40, s_max: float = 4.0) -> dict:
    """Histogram and KS distances to the Wigner and Poisson laws."""
    s = np.asarray(spacings, dtype=float)
    if s.size == 0:
        raise InvalidInputError("no spacings")
    return {
        "histogram": histogram(s, bins, s_max),
        "ks_wd": float(stats.kstest(s, wigner_cdf).statistic),
        "ks_poisson": float(stats.kstest(s, poisson_cdf).statistic),
    }


def picket_fraction(spacings, width: float = 0.25) -> float:
    """Fraction of unfolded spacings within ``width`` of 1; near 1 for a rigid ladder."""
    s = np.asarray(spacings, dtype=float)
    return float(np.mean(np.abs(s - 1.0) <= width)) if s.size else float("nan")


def gap_threshold(eigenvalues, rtol: float = 1e-10) -> float:
    """Gaps below this are treated as exact degeneracies."""
    e = np.asarray(eigenvalues, dtype=float)
    return rtol * max(1.0, float(np.abs(e).max(initial=0.0)))


def r_ratios(eigenvalues, threshold: float | None = None) -> tuple[np.ndarray, int]:
    """Consecutive gap ratios after dropping degenerate gaps; also returns the drop count."""
    e = np.sort(np.asarray(eigenvalues, dtype=float))
    threshold = gap_threshold(e) if threshold is None else threshold
    gaps = np.diff(e)
    keep = gaps > threshold
    gaps = gaps[keep]
    if gaps.size < 2:
        return np.zeros(0), int((~keep).sum())
    r = np.minimum(gaps[1:], gaps[:-1]) / np.maximum(gaps[1:], gaps[:-1])
    return r, int((~keep).sum())


def mean_r_ratio(eigenvalues, threshold: float | None = None, return_discarded: bool = False):
    """Mean gap ratio; degenerate gaps are removed and counted."""
    e = np.asarray(eigenvalues)
    if e.size < MIN_RATIO_LEVELS:
        raise InvalidInputError(f"need at least {MIN_RATIO_LEVELS} levels, got {e.size}")
    r, dropped = r_ratios(e, threshold)
    mean = float(r.mean()) if r.size else float("nan")
    return (mean, dropped) if return_discarded else mean


def analyze(eigenvalues, method: str = "polynomial", degree: int = 7, window: int = 10,
            trim_fraction: float = 0.05, bins: int = 40, label: str = "") -> SpectrumAnalysis:
    """Everything the spectrum pipeline reports for one sector.

    Small spectra still get their r-ratios (if at least three levels) but
    KS distances and the histogram need enough levels to unfold.
    """
    e = np.sort(np.asarray(eigenvalues, dtype=float))
    r, dropped = r_ratios(e)
    mean_r = float(r.mean()) if r.size else float("nan")
    ks_wd = ks_p = float("nan")
    hist = (np.zeros(0), np.zeros(0))
    s = np.zeros(0)
    cut = int(np.floor(trim_fraction * len(e)))
    if len(e) - 2 * cut >= MIN_UNFOLD_LEVELS:
        s = unfold(e, method, degree, window, trim_fraction)
        st = spacing_statistics(s, bins)
        ks_wd, ks_p, hist = st["ks_wd"], st["ks_poisson"], st["histogram"]
    return SpectrumAnalysis(e, s, r, hist, ks_wd, ks_p, mean_r, dropped, label)


def goe_matrix(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Sample from the Gaussian orthogonal ensemble."""
    a = rng.standard_normal((dim, dim))
    return (a + a.T) / 2.0
