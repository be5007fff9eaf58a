"""Vector geometry and small-ball machinery behind smallest-singular-value tails.

Unit vectors split into sparse / compressible / incompressible by their exact
Euclidean distance to the set of delta*n-sparse vectors (the minimizing
support is the top coordinates by magnitude, so the distance is just the tail
norm). Incompressible vectors carry a spread set of moderate coordinates.
Concentration functions are computed exactly for atomic laws and estimated by
sliding-window scans for continuous ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import rng
from .ensemble import EnsembleConfig, EntryDistribution, _values_from_words, sample_matrix
from .errors import DomainError, NumericError
from .linalg import shift, singular_values
from .parallel import parallel_map


@dataclass(frozen=True)
class VectorClass:
    tag: str  # Sparse | Compressible | Incompressible
    delta: float
    rho: float
    residual: float


@dataclass
class TailTable:
    """Empirical tail frequencies of the smallest singular value."""

    thresholds: np.ndarray
    frequencies: np.ndarray
    trials: int
    n: int
    p_n: float
    z: complex
    s1_violation_frequency: float

    def to_csv(self, path) -> None:
        lines = ["threshold,frequency,trials,n,p_n,z_re,z_im"]
        for t, f in zip(self.thresholds, self.frequencies):
            lines.append(
                f"{t:.17g},{f:.17g},{self.trials},{self.n},"
                f"{self.p_n:.17g},{self.z.real:.17g},{self.z.imag:.17g}"
            )
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


def _tail_norm(x: np.ndarray, keep: int) -> float:
    """Exact distance to the set of keep-sparse vectors: norm of the smallest coords."""
    sq = np.sort(np.abs(x) ** 2)
    drop = len(x) - keep
    return math.sqrt(float(np.sum(sq[:drop]))) if drop > 0 else 0.0


def classify_vector(x, delta: float, rho: float) -> VectorClass:
    """Sparse / compressible / incompressible split of a unit vector."""
    x = np.asarray(x)
    if not (0.0 < delta <= 1.0):
        raise DomainError(f"delta must lie in (0, 1], got {delta}")
    if not (0.0 < rho < 1.0):
        raise DomainError(f"rho must lie in (0, 1), got {rho}")
    norm = float(np.linalg.norm(x))
    if abs(norm - 1.0) > 1e-10:
        raise DomainError(f"expected a unit vector, got norm {norm!r}")
    keep = int(math.floor(delta * len(x)))
    residual = _tail_norm(x, keep)
    if residual == 0.0:
        tag = "Sparse"
    elif residual <= rho:
        tag = "Compressible"
    else:
        tag = "Incompressible"
    return VectorClass(tag, delta, rho, residual)


def spread_set(x, delta: float, rho: float) -> np.ndarray:
    """Indices k with rho/sqrt(2n) <= |x_k| <= 1/sqrt(n*delta/2), for incompressible x.

    The returned set is guaranteed to hold at least n*delta/2 indices and at
    least rho^2/2 of the vector's mass; a violation is a contract failure.
    """
    x = np.asarray(x)
    cls = classify_vector(x, delta, rho)
    if cls.tag != "Incompressible":
        raise DomainError(f"spread_set requires an incompressible vector, got {cls.tag}")
    n = len(x)
    mags = np.abs(x)
    lower = rho / math.sqrt(2.0 * n)
    upper = 1.0 / math.sqrt(n * delta / 2.0)
    sigma = np.flatnonzero((mags >= lower) & (mags <= upper))
    if len(sigma) < n * delta / 2.0:
        raise NumericError(f"spread set too small: {len(sigma)} < {n * delta / 2}")
    if float(np.sum(mags[sigma] ** 2)) < rho * rho / 2.0:
        raise NumericError("spread set carries less mass than rho^2/2")
    return sigma


def _discrete_concentration(values: np.ndarray, weights: np.ndarray, eta: float) -> float:
    """Exact sup_u P(|X - u| <= eta) for an atomic law.

    Candidate centers: the atoms, midpoints of atom pairs, and the origin;
    for laws with at most four atoms on a circle or a line this covers every
    optimal ball placement.
    """
    candidates = list(values) + [0.0 + 0.0j]
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            candidates.append(0.5 * (values[i] + values[j]))
    best = 0.0
    for u in candidates:
        covered = np.abs(values - u) <= eta + 1e-12
        best = max(best, float(weights[covered].sum()))
    return min(best, 1.0)


def concentration_Q(
    dist: EntryDistribution, eta: float, budget: int = 100_000, seed: int = 0
) -> float:
    """sup over centers u of P(|X - u| <= eta) for one entry law.

    Atomic laws are exact; continuous laws use a Monte Carlo sample with a
    center grid of pitch eta/4 across the sample range.
    """
    if eta < 0:
        raise DomainError(f"eta must be >= 0, got {eta}")
    atoms = dist.atoms()
    if atoms is not None:
        return _discrete_concentration(*atoms, eta)
    if eta == 0.0:
        return 0.0
    keys = rng.grid_keys(seed, rng.ROLE_CONCENTRATION, 0, budget, 1)
    words = np.stack([rng.word_grid(keys, i) for i in range(dist.words_per_draw)], axis=-1)
    draws = _values_from_words(dist, words)[:, 0]
    if dist.is_complex:
        return _max_ball_fraction_complex(draws, eta, pitch=eta / 4.0)
    draws = np.sort(draws.real)
    centers = np.arange(draws[0], draws[-1] + eta / 4.0, eta / 4.0)
    hi = np.searchsorted(draws, centers + eta, side="right")
    lo = np.searchsorted(draws, centers - eta, side="left")
    return float((hi - lo).max()) / budget


def _max_ball_fraction_complex(samples: np.ndarray, eta: float, pitch: float) -> float:
    """Max fraction of samples in a closed eta-ball centered on a pitch-spaced
    hexagonal lattice, restricted to lattice points near at least one sample."""
    dy = pitch * math.sqrt(3.0) / 2.0
    re, im = samples.real, samples.imag
    reach = int(math.ceil((eta + pitch) / pitch))
    cells = set()
    rows = np.round(im / dy).astype(int)
    for drow in range(-reach, reach + 1):
        row = rows + drow
        offset = 0.5 * (np.abs(row) % 2)
        cols = np.round(re / pitch - offset).astype(int)
        for dcol in range(-reach, reach + 1):
            cells.update(zip(row.tolist(), (cols + dcol).tolist()))
    order = np.argsort(re)
    re_sorted, im_sorted = re[order], im[order]
    best = 0
    for row, col in cells:
        cy = row * dy
        cx = (col + 0.5 * (abs(row) % 2)) * pitch
        lo = np.searchsorted(re_sorted, cx - eta, side="left")
        hi = np.searchsorted(re_sorted, cx + eta, side="right")
        if hi - lo <= best:
            continue
        slab_re = re_sorted[lo:hi] - cx
        slab_im = im_sorted[lo:hi] - cy
        count = int(np.sum(slab_re * slab_re + slab_im * slab_im <= eta * eta + 1e-300))
        best = max(best, count)
    return best / len(samples)


def small_ball(
    x,
    dist: EntryDistribution,
    p_n: float,
    eta: float,
    trials: int,
    seed: int = 0,
) -> float:
    """Monte Carlo estimate of sup_u P(|sum_k x_k eps_k X_k - u| <= eta)."""
    if trials < 10_000:
        raise DomainError(f"need at least 10^4 trials, got {trials}")
    if not (0.0 < p_n <= 1.0):
        raise DomainError(f"p_n must lie in (0, 1], got {p_n}")
    x = np.asarray(x)
    n = len(x)
    keys = rng.grid_keys(seed, rng.ROLE_SMALL_BALL, 0, trials, n)
    words = np.stack([rng.word_grid(keys, i) for i in range(dist.words_per_draw)], axis=-1)
    draws = _values_from_words(dist, words)
    if p_n < 1.0:
        mask_keys = rng.grid_keys(seed, rng.ROLE_SMALL_BALL, 1, trials, n)
        mask = rng.uniform_from_words(rng.word_grid(mask_keys, 0)) < p_n
        draws = np.where(mask, draws, 0.0)
    sums = draws @ x
    if np.iscomplexobj(sums) and np.abs(sums.imag).max() > 0:
        return _max_ball_fraction_complex(sums, eta, pitch=eta / 2.0)
    sums = np.sort(sums.real)
    if sums[-1] - sums[0] <= 2.0 * eta:
        return 1.0
    hi = np.searchsorted(sums, sums + 2.0 * eta, side="right")
    best = int((hi - np.arange(trials)).max())
    return best / trials


def min_sv_tail(
    config: EnsembleConfig,
    z: complex,
    trials: int,
    thresholds: Sequence[float],
) -> TailTable:
    """Empirical frequencies of {s_n(z) <= t and s_1(z) <= n sqrt(p_n)} per threshold."""
    if trials < 50:
        raise DomainError(f"need at least 50 trials, got {trials}")
    thresholds = np.sort(np.asarray(thresholds, dtype=np.float64))
    if len(thresholds) == 0 or thresholds[0] <= 0:
        raise DomainError("thresholds must be positive")
    ceiling = config.n * math.sqrt(config.p_n)

    def one_trial(t):
        s = singular_values(shift(sample_matrix(config, t), z)).values
        return float(s[-1]), float(s[0])

    extremes = parallel_map(one_trial, range(trials))
    s_min = np.array([e[0] for e in extremes])
    s_max = np.array([e[1] for e in extremes])
    ok = s_max <= ceiling
    freqs = np.array([float(np.mean((s_min <= t) & ok)) for t in thresholds])
    return TailTable(
        thresholds,
        freqs,
        trials,
        config.n,
        config.p_n,
        complex(z),
        float(np.mean(~ok)),
    )


def largest_sv_tail(config: EnsembleConfig, trials: int) -> float:
    """Empirical frequency of s_1 >= n sqrt(p_n) (no shift)."""
    if trials < 50:
        raise DomainError(f"need at least 50 trials, got {trials}")
    ceiling = config.n * math.sqrt(config.p_n)

    def one_trial(t):
        s = singular_values(sample_matrix(config, t)).values
        return float(s[0]) >= ceiling

    hits = parallel_map(one_trial, range(trials))
    return float(np.mean(hits))
