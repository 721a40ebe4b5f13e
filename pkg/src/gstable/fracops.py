"""Fractional and pseudo-differential operators.

Multiplier conventions follow F{u}(theta) = int exp(i theta x) u dx, so d/dx
has symbol -i theta and d^2/dx^2 has symbol -theta^2.

* Riesz-Feller derivative of order alpha and skewness gamma:
  -|theta|^alpha exp(i gamma pi/2 sign theta).
* Logarithmic operator A_{k,x} = log(1 + D_x / k): symbol log(1 - i theta / k).
* Fractional logarithmic operator (generator of the symmetric GS process):
  -log(1 + c |theta|^alpha).
* Multivariate operator of a spectral measure M:
  -sum_j w_j |<theta,z_j>|^alpha cos(pi alpha/2) omega_{alpha,1}(<theta,z_j>).

Real-space oracles: the shifted Grunwald-Letnikov (GL) scheme and the
regularized hypersingular integral.
"""

import math
import warnings

import numpy as np
from scipy import integrate, signal, special

from .gslaw import omega
from .spectral import _image_sum, apply_multiplier


class SeriesConvergenceWarning(RuntimeWarning):
    """Truncated operator series whose terms do not decay."""


def riesz_feller_symbol(alpha, gamma_skew):
    def m(theta):
        theta = np.asarray(theta, dtype=float)
        return -np.abs(theta) ** alpha * np.exp(0.5j * math.pi * gamma_skew * np.sign(theta))
    return m


def _check_skew(alpha, gamma_skew):
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    if abs(gamma_skew) > min(alpha, 2.0 - alpha) + 1e-12:
        raise ValueError(f"|gamma_skew| must not exceed min(alpha, 2 - alpha), got {gamma_skew}")


def riesz_feller_spectral(field, alpha, gamma_skew=0.0, whole_line=False, moments=8):
    """Riesz-Feller derivative of a density field via its Fourier multiplier.

    The FFT result is the derivative of the periodic extension of the field.
    With ``whole_line`` the field is taken as a rapidly decaying function on
    the real line instead: the output then has algebraic tails
    ~|x|^(-1-alpha-k), fixed by the field moments, whose periodic images are
    subtracted in closed form.
    """
    _check_skew(alpha, gamma_skew)
    out = apply_multiplier(field, riesz_feller_symbol(alpha, gamma_skew))
    if whole_line and alpha != 2.0:
        x, h = field.grid.x, field.grid.h
        rot = np.exp(0.5j * math.pi * gamma_skew)
        # m(theta) F(theta) = -rot sum_k mu_k (i theta)^k / k! theta^alpha, theta > 0
        small = [(-rot * np.sum(x ** k * field.values) * h * 1j ** k / math.factorial(k), alpha + k)
                 for k in range(moments)]
        out = out - _image_sum(x, field.grid.length, small)
    return out


def riesz_regularized_quadrature(u, x, alpha, epsabs=1e-11):
    """Riesz derivative of a smooth function ``u`` at ``x`` from the hypersingular integral.

        Gamma(1+alpha) sin(pi alpha/2)/pi * int_0^inf [u(x+y) - 2u(x) + u(x-y)] / y^(1+alpha) dy

    For alpha = 2 the integral degenerates and the second derivative is
    returned instead (sixth-order central difference).
    """
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    if alpha == 2.0:
        d = 1e-2
        w = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])
        return float(sum(wk * u(x + (k - 3) * d) for k, wk in enumerate(w)) / d ** 2)
    ux = u(x)
    y0 = 1e-3

    def second_difference(y):
        return u(x + y) - 2 * ux + u(x - y)

    # below y0 the quotient D(y)/y^2 is frozen at its y0 value to avoid
    # cancellation; the error is O(y0^2) times int_0^y0 y^(1-alpha) dy
    curvature = second_difference(y0) / y0 ** 2
    # the algebraic weight y^(1-alpha) carries the remaining singularity
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        v1, e1 = integrate.quad(lambda y: second_difference(y) / (y * y) if y > y0 else curvature,
                                0.0, 1.0, weight="alg", wvar=(1.0 - alpha, 0.0),
                                epsabs=epsabs, epsrel=1e-12, limit=400)
        v2, e2 = integrate.quad(lambda y: second_difference(y) * y ** (-1.0 - alpha),
                                1.0, np.inf, epsabs=epsabs, epsrel=1e-12, limit=800)
    if e1 + e2 > 1e3 * epsabs:
        raise ArithmeticError(f"regularized Riesz quadrature did not converge ({e1 + e2:.2e})")
    return special.gamma(1 + alpha) * math.sin(math.pi * alpha / 2) / math.pi * (v1 + v2)


def gl_weights(alpha, n):
    """Grunwald-Letnikov weights (-1)^k binom(alpha, k), k = 0..n-1."""
    k = np.arange(1, n)
    return np.concatenate([[1.0], np.cumprod(1.0 - (alpha + 1.0) / k)])


def _centered_weights(alpha, n):
    # fractional centered difference weights g_k, k = 0..n-1, whose symbol is
    # |2 sin(theta h / 2)|^alpha
    k = np.arange(n - 1)
    g0 = special.gamma(alpha + 1) / special.gamma(alpha / 2 + 1) ** 2
    return g0 * np.concatenate([[1.0], np.cumprod((k - alpha / 2) / (k + alpha / 2 + 1))])


def _fold(weights, n):
    """Fold a summable weight sequence onto n periodic slots.

    The infinite sequence sums to zero (the operator kills constants); the
    part beyond the stored length is restored as a uniform correction.
    """
    reps = len(weights) // n
    c = weights[:reps * n].reshape(reps, n).sum(axis=0)
    return c - c.sum() / n


def _circular(f, c, shift):
    # out_j = sum_k c_k f_{j-k+shift} on the periodic grid
    return np.real(np.fft.ifft(np.fft.fft(f) * np.fft.fft(np.roll(c, -shift))))


def _linear(f, w, shift):
    # out_j = sum_{k=0}^{j+shift} w_k f_{j-k+shift}, with f = 0 off the grid
    full = signal.fftconvolve(f, w)[: len(f) + shift]
    return full[shift:]


def grunwald_letnikov_rf(values, h, alpha, gamma_skew=0.0, boundary="zero", fold=64):
    """Real-space discrete Riesz-Feller derivative.

    For alpha != 1, 2 the operator is A D_+ + B D_- with left/right
    Riemann-Liouville derivatives D_+/D_- discretized by shifted GL sums
    (shift 1 for alpha > 1, 0 for alpha < 1) and

        A = -sin((alpha - gamma) pi/2) / sin(pi alpha),
        B = -sin((alpha + gamma) pi/2) / sin(pi alpha).

    The symmetric endpoints use the centered schemes: the (1, -2, 1) stencil at
    alpha = 2 and fractional centered differences at alpha = 1.

    ``boundary="zero"`` treats the field as zero outside the grid and requires
    the outer 1% of bins to be below 1e-10.  ``boundary="periodic"`` treats the
    samples as one period, folding ``fold`` periods of weights.
    """
    _check_skew(alpha, gamma_skew)
    f = np.asarray(values, dtype=float)
    n = f.size
    if boundary == "zero":
        edge = max(1, n // 100)
        if max(np.max(np.abs(f[:edge])), np.max(np.abs(f[-edge:]))) > 1e-10:
            raise ValueError("field has non-negligible mass in the outer 1% of bins")
    elif boundary != "periodic":
        raise ValueError(f"unknown boundary {boundary!r}")
    periodic = boundary == "periodic"

    if alpha == 2.0:
        if periodic:
            return (np.roll(f, -1) - 2 * f + np.roll(f, 1)) / h ** 2
        out = -2 * f
        out[1:] += f[:-1]
        out[:-1] += f[1:]
        return out / h ** 2
    if alpha == 1.0:
        if gamma_skew != 0.0:
            raise ValueError("alpha = 1 supports gamma_skew = 0 only")
        if periodic:
            g = _centered_weights(1.0, fold * n + 1)
            c = g[:fold * n].reshape(fold, n).sum(axis=0)
            c += g[1:fold * n + 1].reshape(fold, n).sum(axis=0)[::-1]
            c -= c.sum() / n
            return -_circular(f, c, 0) / h
        g = _centered_weights(1.0, n)
        two_sided = np.concatenate([g[:0:-1], g])
        return -signal.fftconvolve(f, two_sided, mode="same") / h

    a_coef = -math.sin((alpha - gamma_skew) * math.pi / 2) / math.sin(math.pi * alpha)
    b_coef = -math.sin((alpha + gamma_skew) * math.pi / 2) / math.sin(math.pi * alpha)
    shift = 1 if alpha > 1 else 0
    if periodic:
        c = _fold(gl_weights(alpha, fold * n), n)
        left = _circular(f, c, shift)
        right = _circular(f[::-1], c, shift)[::-1]
    else:
        w = gl_weights(alpha, n + 1)
        left = _linear(f, w, shift)
        right = _linear(f[::-1], w, shift)[::-1]
    return (a_coef * left + b_coef * right) / h ** alpha


def shift_op(F, t, k=1.0, domain=None):
    """exp(-k d/dt) F (t) = F(t - k).

    ``domain`` is an optional (lower, upper) bound for the time argument; a
    shifted time outside it is rejected.
    """
    s = t - k
    if domain is not None and not domain[0] <= s <= domain[1]:
        raise ValueError(f"shifted time {s} lies outside the domain {domain}")
    return F(s)


def one_minus_shift(F, t, k=1.0, domain=None):
    """(1 - exp(-k d/dt)) F (t) = F(t) - F(t - k)."""
    return F(t) - shift_op(F, t, k, domain)


# tenth-order centered first derivative stencil, offsets 1..5
_D1 = np.array([5 / 6, -5 / 21, 5 / 84, -5 / 504, 1 / 1260])


def _centered_derivative(f, h):
    out = np.zeros_like(f)
    n = f.size
    for j, wj in enumerate(_D1, start=1):
        out[j:n - j] += wj * (f[2 * j:] - f[:n - 2 * j])
    return out / h


def log_operator_series(values, h, k, L):
    """Truncated series of A_{k,x} = log(1 + D_x / k) = sum_j (-1)^(j+1) D_x^j / (j k^j).

    D_x^j is the j-fold power of a tenth-order centered difference, so each
    application loses five points at either end; those entries are not
    meaningful and inputs should be windowed away from the edges.  A
    :class:`SeriesConvergenceWarning` is emitted when the last term is larger
    than half the first.
    """
    if L < 1:
        raise ValueError("truncation order L must be at least 1")
    f = np.asarray(values, dtype=float)
    power = f
    out = np.zeros_like(f)
    first = last = 0.0
    for j in range(1, L + 1):
        power = _centered_derivative(power, h)
        term = (-1) ** (j + 1) * power / (j * k ** j)
        out += term
        size = np.max(np.abs(term))
        if j == 1:
            first = size
        last = size
    if L > 1 and first > 0 and last / first > 0.5:
        warnings.warn(f"log-operator series does not decay: |term_L|/|term_1| = {last / first:.3g}",
                      SeriesConvergenceWarning, stacklevel=2)
    return out


def log_operator_symbol(k):
    """Symbol log(1 - i theta / k) of A_{k,x}."""
    return lambda theta: np.log(1.0 - 1j * np.asarray(theta, dtype=float) / k)


def log_operator_spectral(field, k):
    """A_{k,x} applied through its symbol."""
    return apply_multiplier(field, log_operator_symbol(k))


def log_operator_fractional_spectral(field, alpha, c):
    """Apply the multiplier -log(1 + c |theta|^alpha)."""
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    return apply_multiplier(field, lambda theta: -np.log1p(c * np.abs(theta) ** alpha))


def nabla_M_multiplier(alpha, M, theta):
    """Symbol of the multivariate fractional operator of a spectral measure.

    ``theta`` has shape (..., dim).  Discrete measures give
    -sum_j w_j |<theta,z_j>|^alpha cos(pi alpha/2) omega_{alpha,1}(<theta,z_j>);
    the isotropic measure gives -||theta||^alpha.
    """
    if alpha == 1.0:
        raise ValueError("the multivariate operator needs alpha != 1")
    theta = np.asarray(theta, dtype=float)
    if M.isotropic:
        return -np.linalg.norm(theta, axis=-1) ** alpha + 0j
    proj = theta @ M.directions.T
    terms = np.abs(proj) ** alpha * math.cos(math.pi * alpha / 2) * omega(alpha, 1.0, proj)
    return -np.sum(terms * M.weights, axis=-1)


def discrete_fractional_laplacian(values, h, alpha):
    """-(-Delta_h)^(alpha/2) on a periodic 2-D grid, Delta_h the five-point Laplacian.

    For alpha = 2 this is the five-point stencil itself, applied in real
    space; otherwise the fractional power is taken on the stencil's
    eigenvalues.
    """
    f = np.asarray(values, dtype=float)
    if f.ndim != 2:
        raise ValueError("expected a 2-D array")
    if alpha == 2.0:
        return (np.roll(f, 1, 0) + np.roll(f, -1, 0) + np.roll(f, 1, 1) + np.roll(f, -1, 1) - 4 * f) / h ** 2
    k0 = 2 * np.pi * np.fft.fftfreq(f.shape[0])
    k1 = 2 * np.pi * np.fft.fftfreq(f.shape[1])
    lam = (4 * np.sin(k0[:, None] / 2) ** 2 + 4 * np.sin(k1[None, :] / 2) ** 2) / h ** 2
    return -np.real(np.fft.ifft2(lam ** (alpha / 2) * np.fft.fft2(f)))
