"""Grids, the +i theta x Fourier convention, and FFT inversion of characteristic functions.

Conventions.  A Grid1D holds the periodic sample points x_j = x_min + j h,
j = 0..n-1.  The continuous transform F{u}(theta) = int exp(i theta x) u(x) dx
is approximated by h sum_j exp(i theta_k x_j) u_j, and the inverse by
(1 / (n h)) sum_k exp(-i theta_k x_j) U_k.  numpy's forward FFT uses the kernel
exp(-2 pi i jk/n), so it implements our *inverse*; this is the single
conjugation between the two conventions.

Sampled inversion of a characteristic function phi returns the samples of the
periodized density sum_m g(x + m L) only when phi is replaced by its aliased
version sum_m phi(theta + m P), P = 2 pi / h.  The plain inversion truncates
instead.  For the power-law characteristic functions of GS and Gamma laws both
effects are computed in closed form from power expansions of phi:

* large-theta terms a theta^(-s) give the alias sum through Hurwitz zeta
  functions (analytically continued when s <= 1),
* small-theta terms b theta^nu with non-integer nu (or complex b) produce
  the algebraic density tails c |x|^(-1-nu), whose periodic images are again
  Hurwitz zeta sums.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid x_min + j h, j = 0..n_points-1."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        n = self.n_points
        if n < 8 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 8, got {n}")

    @classmethod
    def default(cls):
        """The verification grid [-40, 40] with 2^14 points."""
        return cls(-40.0, 40.0, 2 ** 14)

    @property
    def h(self):
        return (self.x_max - self.x_min) / self.n_points

    @property
    def length(self):
        return self.x_max - self.x_min

    @property
    def x(self):
        return self.x_min + self.h * np.arange(self.n_points)

    def refined(self, factor=2):
        return Grid1D(self.x_min, self.x_max, self.n_points * factor)

    def spectral(self):
        return SpectralGrid.from_grid(self)

    def to_dict(self):
        return {"x_min": self.x_min, "x_max": self.x_max, "n_points": self.n_points, "h": self.h}


@dataclass(frozen=True)
class SpectralGrid:
    """Frequencies conjugate to a Grid1D, in FFT order."""

    theta: np.ndarray
    dtheta: float
    nyquist: float

    @classmethod
    def from_grid(cls, grid):
        theta = 2 * math.pi * np.fft.fftfreq(grid.n_points, d=grid.h)
        return cls(theta=theta, dtheta=2 * math.pi / grid.length, nyquist=math.pi / grid.h)


@dataclass
class DensityField:
    """Density samples on a grid at time t.

    ``provenance`` is one of "fft_inversion", "closed_form", "quadrature".
    ``diagnostics`` collects numbers reported by the producing pipeline.
    """

    grid: Grid1D
    values: np.ndarray
    t: float
    provenance: str = "fft_inversion"
    diagnostics: dict = field(default_factory=dict)

    def mass(self):
        """Trapezoid integral over the periodic grid (a plain Riemann sum)."""
        return float(np.sum(self.values) * self.grid.h)

    def normalized(self):
        """Copy clipped at zero and rescaled to unit mass; raw values are untouched."""
        v = np.clip(self.values, 0.0, None)
        return DensityField(self.grid, v / (v.sum() * self.grid.h), self.t,
                            self.provenance, dict(self.diagnostics))

    def to_csv(self, fh):
        fh.write("x,density,t,provenance\n")
        t = f"{self.t:.17g}"
        for xv, gv in zip(self.grid.x, self.values):
            fh.write(f"{xv:.17g},{gv:.17g},{t},{self.provenance}\n")


def forward(values, grid):
    """h sum_j exp(i theta_k x_j) u_j on the FFT-ordered frequencies."""
    theta = grid.spectral().theta
    n = grid.n_points
    return grid.h * n * np.fft.ifft(values) * np.exp(1j * theta * grid.x_min)


def inverse(coeffs, grid):
    """(1/(n h)) sum_k exp(-i theta_k x_j) U_k; the inverse of :func:`forward`."""
    theta = grid.spectral().theta
    return np.fft.fft(coeffs * np.exp(-1j * theta * grid.x_min)) / grid.length


def hurwitz_zeta(s, q):
    """Hurwitz zeta function, analytically continued to real s < 1 (s != 1).

    scipy covers s > 1.  For s < 1 an Euler-Maclaurin expansion after shifting
    q by twelve units is used; its error is at the level of double rounding
    for q >= 0.5.
    """
    q = np.asarray(q, dtype=float)
    if s > 1:
        return special.zeta(s, q)
    if s == 1:
        raise ValueError("Hurwitz zeta has a pole at s = 1")
    m, order = 12, 12
    total = sum((k + q) ** (-s) for k in range(m))
    z = m + q
    total = total + z ** (1 - s) / (s - 1) + 0.5 * z ** (-s)
    for k in range(1, order + 1):
        total = total + (_BERNOULLI[2 * k] / math.factorial(2 * k)
                         * special.poch(s, 2 * k - 1) * z ** (-s - 2 * k + 1))
    return total


_BERNOULLI = special.bernoulli(2 * 12 + 2)


def _check_hermitian(phi, nyquist):
    probe = np.array([0.37, 1.3, 7.1, 0.31 * nyquist, 0.77 * nyquist])
    up, down = np.asarray(phi(probe)), np.asarray(phi(-probe))
    scale = np.maximum(1.0, np.abs(up))
    if np.any(np.abs(down - np.conj(up)) > 1e-10 * scale):
        raise ValueError("characteristic function is not Hermitian: phi(-theta) != conj(phi(theta))")
    if np.any(np.abs(up) > 1.0 + 1e-10):
        raise ValueError("characteristic function exceeds 1 in modulus")


def _alias_sum(theta, period, large, first_image):
    """sum over |m| >= first_image of the large-theta expansion at theta + m P."""
    out = np.zeros(theta.shape, dtype=complex)
    u = theta / period
    for a, power in large:
        s = -power
        if abs(a) * (0.5 * period) ** (-s) < 1e-18:
            continue
        if abs(s - 1.0) < 1e-12:
            # conjugate pair of divergent sums; the theta independent divergence
            # only feeds the x = x_0 sample of a density that is unbounded there
            out += -(a * special.digamma(first_image + u)
                     + np.conj(a) * special.digamma(first_image - u)) / period
        else:
            out += period ** (-s) * (a * hurwitz_zeta(s, first_image + u)
                                     + np.conj(a) * hurwitz_zeta(s, first_image - u))
    return out


def tail_coefficients(small):
    """Leading algebraic tail coefficients of the density implied by a small-theta expansion.

    Returns a list of (c_plus, c_minus, nu) with g(x) ~ c_plus x^(-1-nu) as
    x -> +inf and c_minus |x|^(-1-nu) as x -> -inf.
    """
    out = []
    for b, nu in small:
        rot = np.exp(0.5j * math.pi * (1 + nu))
        cp = special.gamma(1 + nu) / math.pi * float(np.real(b / rot))
        cm = special.gamma(1 + nu) / math.pi * float(np.real(b * rot))
        if abs(cp) > 1e-300 or abs(cm) > 1e-300:
            out.append((cp, cm, nu))
    return out


def _optimal_truncation(small, distance):
    """Terms of an asymptotic tail expansion kept at ``distance``, and the first omitted size.

    The expansion is cut where the envelope Gamma(1 + nu)|b| / (pi d^(1 + nu))
    starts to grow.  The envelope ignores phase cancellations of individual
    coefficients, and terms far below the running minimum (zero by symmetry,
    for instance) are carried along without ending the scan.
    """
    best, last, omitted = None, -1, 0.0
    for k, (b, nu) in enumerate(small):
        e = math.exp(special.gammaln(1 + nu) - (1 + nu) * math.log(distance)) * abs(b) / math.pi
        if best is not None and e < 1e-6 * best:
            last = k
            continue
        if best is not None and e > best:
            omitted = e
            break
        best, last = e, k
    else:
        omitted = best or 0.0
    return small[:last + 1], omitted


def _image_sum(x, length, small):
    """Contribution of all periodic images m != 0 from the algebraic density tails."""
    out = np.zeros(x.shape)
    kept, _ = _optimal_truncation(small, 0.5 * length)
    for cp, cm, nu in tail_coefficients(kept):
        s = 1 + nu
        if max(abs(cp), abs(cm)) * (0.5 * length) ** (-s) < 1e-18:
            continue
        out += length ** (-s) * (cp * special.zeta(s, 1 + x / length)
                                 + cm * special.zeta(s, 1 - x / length))
    return out


def invert_charfn(phi, grid, t=None, *, large=None, small=None, images=0, periodic=False):
    """Invert a characteristic function on ``grid``.

    Parameters
    ----------
    phi : callable
        Hermitian characteristic function of theta (vectorized).
    grid : Grid1D
    t : float, optional
        Time label stored on the result.
    large : list of (coef, power), optional
        Expansion phi(theta) ~ sum coef theta**power for theta -> +inf.  When
        given, the aliased images beyond ``images`` are added in closed form.
    small : list of (coef, power), optional
        Expansion for theta -> 0+, used to remove the periodic images of the
        algebraic density tails (ignored when ``periodic`` is set).
    images : int
        Number of aliased images |m| <= images summed directly.
    periodic : bool
        Return the periodized density sum_m g(x + m L) instead of g.

    Without ``large``/``images`` the result is the plain truncated inversion,
    with the Nyquist coefficient symmetrized.  Values are never clipped.
    """
    sg = grid.spectral()
    _check_hermitian(phi, sg.nyquist)
    theta = sg.theta
    period = 2 * sg.nyquist
    coeffs = np.asarray(phi(theta), dtype=complex)
    diagnostics = {}
    if images == 0 and large is None:
        ny = grid.n_points // 2
        coeffs[ny] = np.real(phi(np.array([sg.nyquist]))[0])
    for m in range(1, images + 1):
        coeffs = coeffs + phi(theta + m * period) + phi(theta - m * period)
    if large is not None:
        if large and abs(large[0][0]) * (0.5 * period) ** large[0][1] > 0.5:
            raise ValueError("grid too coarse: large-theta expansion invalid at the Nyquist frequency")
        alias = _alias_sum(theta, period, large, images + 1)
        diagnostics["alias_correction_max"] = float(np.max(np.abs(alias)))
        coeffs = coeffs + alias
    raw = inverse(coeffs, grid)
    values = raw.real.copy()
    diagnostics["imag_residue"] = float(np.max(np.abs(raw.imag)))
    if small is not None and not periodic:
        if not grid.x_min < 0 < grid.x_max:
            raise ValueError("tail correction needs a grid containing the origin")
        wrap = _image_sum(grid.x, grid.length, small)
        diagnostics["periodization_correction_max"] = float(np.max(np.abs(wrap)))
        diagnostics["tail_truncation_error"] = _optimal_truncation(small, 0.5 * grid.length)[1]
        values -= wrap
    diagnostics["mass_error"] = float(abs(np.sum(values) * grid.h - 1.0))
    return DensityField(grid, values, t if t is not None else float("nan"), "fft_inversion", diagnostics)


def apply_multiplier(field, m, return_residue=False):
    """Apply the Fourier multiplier ``m`` to a density field.

    The forward transform, pointwise product with m(theta_k) and inverse
    transform are exact on the periodic grid.  The real part is returned; the
    discarded imaginary part is the residue (optionally returned).
    """
    grid = field.grid
    theta = grid.spectral().theta
    mult = np.asarray(m(theta), dtype=complex)
    ny = grid.n_points // 2
    # the Nyquist mode has no partner on the grid: use the symmetric real part
    mult[ny] = np.real(m(np.array([abs(theta[ny])]))[0])
    out = inverse(mult * forward(field.values, grid), grid)
    if return_residue:
        return out.real, float(np.max(np.abs(out.imag)))
    return out.real


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not reach its error target."""


def quadrature_subordinate(stable_density, g, x, t, epsabs=1e-9):
    """Subordination integral int_0^inf p(x, z) f_Gamma(z, t) dz.

    ``stable_density(x, z)`` is the density at time z of the process being
    subordinated.  The integral is split at z = 1; for t < 1 the Gamma
    singularity z^(t-1) is handled by an algebraic quadrature weight.
    Returns ``(value, abserr)`` and raises :class:`QuadratureError` when the
    error estimate exceeds ``epsabs``.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    b = g.b
    log_norm = t * math.log(b) - special.gammaln(t)

    def smooth(z):
        return stable_density(x, z) * math.exp(log_norm - b * z) if z > 0 else 0.0

    opts = dict(epsabs=epsabs / 10, epsrel=1e-12, limit=400)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        v1, e1 = integrate.quad(smooth, 0.0, 1.0, weight="alg", wvar=(t - 1.0, 0.0), **opts)
        v2, e2 = integrate.quad(lambda z: smooth(z) * z ** (t - 1.0), 1.0, np.inf, **opts)
    err = e1 + e2
    if not (np.isfinite(v1 + v2) and err <= epsabs):
        raise QuadratureError(f"subordination quadrature at x={x}, t={t} reached only {err:.2e}")
    return v1 + v2, err


# ---------------------------------------------------------------------------
# convenience pipelines for the laws of the package


def gs_density(p, grid, t, periodic=False, terms=30):
    """GS density g(., t) by corrected FFT inversion of gs_charfn."""
    from .gslaw import gs_charfn, gs_expansions

    if t == 0:
        return invert_charfn(lambda th: np.ones_like(th, dtype=complex), grid, t=0.0)
    large, small = gs_expansions(p, t, terms)
    return invert_charfn(lambda th: gs_charfn(p, th, t), grid, t=t,
                         large=large, small=small, periodic=periodic)


def stable_density(p, grid, t, periodic=False, images=4, terms=30):
    """Stable density p(., t) by FFT inversion of stable_charfn."""
    from .gslaw import stable_charfn, stable_small_expansion

    small = None if p.alpha == 2.0 else stable_small_expansion(p, t, terms)
    return invert_charfn(lambda th: stable_charfn(p, th, t), grid, t=t,
                         images=images, small=small, periodic=periodic)


def gamma_density_field(g, grid, t, terms=30):
    """Gamma(t, b) density by corrected FFT inversion of gamma_charfn."""
    from .gslaw import gamma_charfn, gamma_expansions

    large, _ = gamma_expansions(g, t, terms)
    return invert_charfn(lambda th: gamma_charfn(g, th, t), grid, t=t, large=large)
