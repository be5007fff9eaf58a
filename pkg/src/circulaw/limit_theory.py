"""Exact limiting objects for shifted i.i.d. matrices.

For a shift z, the limiting symmetrized singular-value law has Stieltjes
transform S(a, z) solving

    S = -(S + a) / ((S + a)^2 - |z|^2),

equivalently, with y = S + x on the real line, the cubic

    L(y) = y^3 - x*y^2 + (1 - |z|^2)*y + x*|z|^2 = 0.

Where the cubic has one real root the complex pair contributes the density
(1/pi) * Im y_+; where it has three real roots the density vanishes. The
support edges are

    x1^2 = (5 + 2|z|^2)/2 + ((1 + 8|z|^2)^{3/2} - 1) / (8|z|^2),
    x2^2 = (5 + 2|z|^2)/2 - ((1 + 8|z|^2)^{3/2} + 1) / (8|z|^2),

with an inner edge only for |z| > 1. The logarithmic potential of the
uniform unit-disc law, (1-|z|^2)/2 inside and -ln|z| outside, must equal
-Int ln|x| d(symmetrized law); `potential_from_law` evaluates the right side
by quadrature so the identity can be checked numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, NumericError

_SQRT3 = math.sqrt(3.0)
_T_SERIES = 1e-8  # below this |z|^2 the edge ratio uses its series value
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_GL_NODES8, _GL_WEIGHTS8 = np.polynomial.legendre.leggauss(8)
_EDGE_LEVELS = 48
_GRID_HALF = 2048


def _edge_squares(t: float):
    """(x1^2, x2^2) of the squared coordinate; x2^2 is None for t below series cut."""
    base = (5.0 + 2.0 * t) / 2.0
    if t < _T_SERIES:
        return base + 1.5 + 3.0 * t, None
    s = math.sqrt(1.0 + 8.0 * t)
    cube = s * s * s
    return base + (cube - 1.0) / (8.0 * t), base - (cube + 1.0) / (8.0 * t)


def support_endpoints(z: complex):
    """(x1, x2): outer edge always, inner edge for |z| > 1 (0.0 exactly at |z| = 1)."""
    z = complex(z)
    t = z.real * z.real + z.imag * z.imag
    x1_sq, x2_sq = _edge_squares(t)
    x1 = math.sqrt(x1_sq)
    if x2_sq is None or x2_sq < 0.0:
        return x1, None
    return x1, math.sqrt(x2_sq)


def _polish_roots(coeffs: np.ndarray, roots: np.ndarray, steps: int = 2) -> np.ndarray:
    deriv = np.polyder(coeffs)
    for _ in range(steps):
        fval = np.polyval(coeffs, roots)
        dval = np.polyval(deriv, roots)
        safe = np.abs(dval) > 0
        roots = np.where(safe, roots - fval / np.where(safe, dval, 1.0), roots)
    return roots


def cubic_roots(x: float, z: complex) -> np.ndarray:
    """The three roots of L(y), via companion-matrix eigenvalues plus Newton polish.

    Real coefficients get exact conjugate pairing enforced after polishing.
    """
    z = complex(z)
    t = z.real * z.real + z.imag * z.imag
    coeffs = np.array([1.0, -x, 1.0 - t, x * t])
    roots = np.roots(coeffs).astype(np.complex128)
    roots = _polish_roots(coeffs, roots)
    scale = max(1.0, abs(x)) ** 3
    imag_tol = 1e-9 * max(1.0, abs(x))
    complex_mask = np.abs(roots.imag) > imag_tol
    if complex_mask.sum() == 2:
        pair = roots[complex_mask]
        w = 0.5 * (pair[0] + np.conj(pair[1]))
        if w.imag < 0:
            w = np.conj(w)
        roots[complex_mask] = [w, np.conj(w)]
        real_idx = np.flatnonzero(~complex_mask)
        roots[real_idx] = roots[real_idx].real
    else:
        roots = roots.real.astype(np.complex128)
    residual = np.abs(np.polyval(coeffs, roots)).max()
    if residual > 1e-10 * scale:
        raise NumericError(f"cubic root residual {residual:.3g} exceeds tolerance")
    order = np.lexsort((roots.imag, roots.real))
    return roots[order]


def limit_stieltjes(alpha: complex, z: complex) -> complex:
    """The unique upper-half-plane solution S(alpha, z) of the self-consistent equation."""
    alpha = complex(alpha)
    if alpha.imag <= 0:
        raise DomainError("alpha must lie in the upper half-plane")
    z = complex(z)
    t = z.real * z.real + z.imag * z.imag
    coeffs = np.array(
        [1.0, 2.0 * alpha, alpha * alpha + 1.0 - t, alpha], dtype=np.complex128
    )
    roots = _polish_roots(coeffs, np.roots(coeffs).astype(np.complex128), steps=3)
    candidates = roots[roots.imag > 1e-12]
    if len(candidates) != 1:
        raise NumericError(
            f"expected one upper-half-plane root at alpha={alpha}, z={z}, "
            f"found {len(candidates)}"
        )
    s = complex(candidates[0])
    p = s + alpha
    q = p * p - t
    if abs(q) < 1e-14:
        raise NumericError("degenerate denominator in the self-consistent equation")
    residual = abs(s + p / q)
    if residual > 1e-10:
        raise NumericError(f"self-consistent equation residual {residual:.3g}")
    return s


def _sym_density_array(x: np.ndarray, t: float) -> np.ndarray:
    """Density of the symmetrized law at real x (vectorized Cardano solve).

    One real root (positive cubic discriminant in the depressed form) means a
    conjugate pair with imaginary part (sqrt(3)/2)(u - v); three real roots
    mean zero density.
    """
    x = np.asarray(x, dtype=np.float64)
    p = -x
    q = 1.0 - t
    r = x * t
    big_p = q - p * p / 3.0
    big_q = (2.0 / 27.0) * p * p * p - p * (q / 3.0) + r
    half_q = 0.5 * big_q
    p_third = big_p * (1.0 / 3.0)
    disc = half_q * half_q + p_third * p_third * p_third
    pos = disc > 0
    root = np.sqrt(np.where(pos, disc, 0.0))
    u = np.cbrt(-half_q + root)
    v = np.cbrt(-half_q - root)
    vals = (_SQRT3 / (2.0 * math.pi)) * (u - v)
    return np.where(pos, np.maximum(vals, 0.0), 0.0)


def limit_density(x: float, z: complex) -> float:
    """Density of the symmetrized law at x (even in x, zero off the support)."""
    z = complex(z)
    t = z.real * z.real + z.imag * z.imag
    return float(_sym_density_array(np.array([x]), t)[0])


def _unit_panels(nodes_1d, weights_1d):
    """Geometrically graded Gauss-Legendre rule for int_0^1 g(u) du; scales
    linearly to any [0, u_max]."""
    k = np.arange(_EDGE_LEVELS)
    hi = 0.5**k
    lo = 0.5 * hi
    mid = 0.5 * (hi + lo)
    half = 0.5 * (hi - lo)
    nodes = mid[:, None] + half[:, None] * nodes_1d[None, :]
    weights = half[:, None] * weights_1d[None, :]
    return nodes.ravel(), weights.ravel()


_UNIT_NODES16, _UNIT_WEIGHTS16 = _unit_panels(_GL_NODES, _GL_WEIGHTS)
_UNIT_NODES8, _UNIT_WEIGHTS8 = _unit_panels(_GL_NODES8, _GL_WEIGHTS8)
# shallower grading for the cumulative grid: the neglected tail below
# u_max * 2^-24 carries O(u^2) mass, far below the interpolation error
_GRID_NODES = _UNIT_NODES16[: 24 * 16]
_GRID_WEIGHTS = _UNIT_WEIGHTS16[: 24 * 16]


def _edge_panels(u_max: float):
    return u_max * _UNIT_NODES16, u_max * _UNIT_WEIGHTS16


def _edge_panels8(u_max: float):
    return u_max * _UNIT_NODES8, u_max * _UNIT_WEIGHTS8


@dataclass
class LimitLaw:
    """Per-z limiting law: support edges plus a cached CDF grid for fast queries."""

    z: complex
    x1: float
    x2: Optional[float]
    _t: float = field(repr=False, default=0.0)
    _grid_x: np.ndarray = field(repr=False, default=None)
    _grid_f: np.ndarray = field(repr=False, default=None)
    _mass_pos: float = field(repr=False, default=0.0)

    @classmethod
    def for_shift(cls, z: complex) -> "LimitLaw":
        z = complex(z)
        x1, x2 = support_endpoints(z)
        t = z.real * z.real + z.imag * z.imag
        law = cls(z, x1, x2, _t=t)
        law._build_grid()
        return law

    @property
    def lo(self) -> float:
        return self.x2 if self.x2 is not None else 0.0

    def density(self, x):
        return _sym_density_array(np.asarray(x, dtype=np.float64), self._t)

    def _half_integral(self, edge: float, sign: float, u_max: float, weight_fn=None, order16=True):
        """int over one half of the support under the substitution x = edge + sign*u^2."""
        if u_max <= 0:
            return 0.0
        nodes, weights = _edge_panels(u_max) if order16 else _edge_panels8(u_max)
        x = edge + sign * nodes * nodes
        g = 2.0 * nodes * self.density(x)
        if weight_fn is not None:
            g = g * weight_fn(x)
        return float(np.dot(weights, g))

    def _half_integral_many(self, edge: float, sign: float, u_values: np.ndarray) -> np.ndarray:
        """Vectorized int_0^{u} g over many upper limits (panels scale with u)."""
        nodes = u_values[:, None] * _GRID_NODES[None, :]
        x = edge + sign * nodes * nodes
        g = 2.0 * nodes * self.density(x.ravel()).reshape(nodes.shape)
        return (u_values[:, None] * _GRID_WEIGHTS[None, :] * g).sum(axis=1)

    def _build_grid(self):
        lo, hi = self.lo, self.x1
        mid = 0.5 * (lo + hi)
        u_lo = math.sqrt(mid - lo)
        u_hi = math.sqrt(hi - mid)
        mass_lower = self._half_integral(lo, +1.0, u_lo)
        mass_upper = self._half_integral(hi, -1.0, u_hi)
        self._mass_pos = mass_lower + mass_upper

        m = _GRID_HALF
        u1 = np.linspace(0.0, u_lo, m + 1)
        x_lower = lo + u1 * u1
        f_lower = self._half_integral_many(lo, +1.0, u1)
        u2 = np.linspace(u_hi, 0.0, m + 1)
        x_upper = hi - u2 * u2
        f_upper = self._mass_pos - self._half_integral_many(hi, -1.0, u2)
        xs = np.concatenate([x_lower, x_upper[1:]])
        fs = np.concatenate([f_lower, f_upper[1:]])
        fs = np.maximum.accumulate(fs)
        self._grid_x = xs
        self._grid_f = fs

    def cdf_positive(self, x):
        """Mass of the symmetrized law on [lo, x] (vectorized)."""
        return np.interp(np.asarray(x, dtype=np.float64), self._grid_x, self._grid_f,
                         left=0.0, right=self._mass_pos)

    def cdf_squared(self, x):
        """CDF of the squared-coordinate law at x (vectorized)."""
        x = np.asarray(x, dtype=np.float64)
        positive = x > 0
        roots = np.sqrt(np.where(positive, x, 1.0))
        out = np.where(positive, np.clip(2.0 * self.cdf_positive(roots), 0.0, 1.0), 0.0)
        return np.where(x >= self.x1 * self.x1, 1.0, out)

    def total_mass(self) -> float:
        """Full-line mass of the symmetrized density (should be 1)."""
        return 2.0 * self._mass_pos

    def log_moment(self) -> float:
        """-Int ln|x| d(symmetrized law), with an internal quadrature error estimate."""
        lo, hi = self.lo, self.x1
        mid = 0.5 * (lo + hi)
        u_lo = math.sqrt(mid - lo)
        u_hi = math.sqrt(hi - mid)
        val16 = self._half_integral(lo, +1.0, u_lo, np.log) + self._half_integral(
            hi, -1.0, u_hi, np.log
        )
        val8 = self._half_integral(lo, +1.0, u_lo, np.log, order16=False) + (
            self._half_integral(hi, -1.0, u_hi, np.log, order16=False)
        )
        err = 2.0 * abs(val16 - val8)
        if err > 1e-4:
            raise NumericError(f"potential quadrature error estimate {err:.3g} > 1e-4")
        return -2.0 * val16


_LAW_CACHE: dict = {}


def law_for_shift(z: complex) -> LimitLaw:
    """Cached LimitLaw; keyed on |z|^2, so phases of z share one law."""
    z = complex(z)
    t = z.real * z.real + z.imag * z.imag
    law = _LAW_CACHE.get(t)
    if law is None:
        law = LimitLaw.for_shift(z)
        _LAW_CACHE[t] = law
    return law


def limit_cdf(x, z: complex):
    """CDF of the limiting squared-singular-value law at x (scalar or array)."""
    law = law_for_shift(z)
    result = law.cdf_squared(x)
    return float(result) if np.isscalar(x) else result


def disc_potential(z: complex) -> float:
    """Logarithmic potential of the uniform unit-disc law."""
    z = complex(z)
    t = z.real * z.real + z.imag * z.imag
    if t <= 1.0:
        return 0.5 * (1.0 - t)
    return -0.5 * math.log(t)


def g_field(s: float, t: float) -> float:
    """Radial derivative field of the disc potential: 2s/(s^2+t^2) outside, 2s inside."""
    rsq = s * s + t * t
    if rsq > 1.0:
        return 2.0 * s / rsq
    return 2.0 * s


def potential_from_law(z: complex) -> float:
    """-Int ln|x| d(symmetrized law) by quadrature; agrees with disc_potential."""
    return law_for_shift(z).log_moment()


def limit_cdf_symmetric(x, z: complex):
    """CDF of the symmetrized law: (1 + sgn(x) F(x^2)) / 2."""
    law = law_for_shift(z)
    x = np.asarray(x, dtype=np.float64)
    result = 0.5 * (1.0 + np.sign(x) * law.cdf_squared(x * x))
    return float(result) if result.ndim == 0 else result


def export_tabulation(z: complex, xs, path) -> None:
    """CSV tabulation 'x,density,cdf' of the symmetrized density and CDF."""
    xs = np.asarray(xs, dtype=np.float64)
    law = law_for_shift(z)
    dens = law.density(xs)
    cdf = limit_cdf_symmetric(xs, z)
    lines = ["x,density,cdf"]
    for x, d, c in zip(xs, dens, cdf):
        lines.append(f"{x:.17g},{d:.17g},{c:.17g}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
