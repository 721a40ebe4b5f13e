"""Parameter sets, characteristic functions and reference densities.

Fourier convention throughout the package: F{u}(theta) = int exp(i theta x) u(x) dx.

A strictly stable law (mu = 0) is described either by (alpha, beta, sigma) or by
its Feller pair (gamma_skew, c).  Its characteristic function at time t is
exp{t c psi(theta)} with psi(theta) = -|theta|^alpha exp(i gamma pi/2 sign theta).
The geometric stable (GS) law is the stable law evaluated at an independent
Gamma(t, 1) time, with characteristic function (1 - c psi(theta))^(-t).
"""

import json
import math
import warnings
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import integrate, special


@dataclass(frozen=True)
class StableParams:
    """Stability index, asymmetry and scale of a strictly stable law."""

    alpha: float
    beta: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not -1.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [-1, 1], got {self.beta}")
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.alpha == 1.0 and self.beta != 0.0:
            raise ValueError(
                "alpha = 1 requires beta = 0: the asymmetric alpha = 1 law "
                "(logarithmic correction in omega) is not supported")

    @property
    def feller(self):
        return feller_from_params(self)


@dataclass(frozen=True)
class FellerParams:
    """Feller skewness angle ``gamma_skew`` and spreading rate ``c``."""

    gamma_skew: float
    c: float


@dataclass(frozen=True)
class GammaParams:
    """Rate of the Gamma subordinator; the shape parameter is fixed to 1."""

    b: float = 1.0

    def __post_init__(self):
        if not self.b > 0.0:
            raise ValueError(f"Gamma rate b must be positive, got {self.b}")


@dataclass(frozen=True)
class SpectralMeasure:
    """Finite atomic measure on the unit sphere, or the isotropic flag.

    ``directions`` has shape (m, dim) with unit rows and ``weights`` shape (m,).
    When ``isotropic`` is set the atoms are ignored.
    """

    dim: int
    directions: np.ndarray = None
    weights: np.ndarray = None
    isotropic: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be at least 1")
        if self.isotropic:
            return
        z = np.atleast_2d(np.asarray(self.directions, dtype=float))
        w = np.asarray(self.weights, dtype=float).ravel()
        if z.shape != (w.size, self.dim):
            raise ValueError(f"directions must have shape ({w.size}, {self.dim})")
        if np.any(np.abs(np.linalg.norm(z, axis=1) - 1.0) > 1e-12):
            raise ValueError("atom directions must be unit vectors")
        if np.any(w < 0) or w.sum() <= 0:
            raise ValueError("weights must be nonnegative with positive total")
        object.__setattr__(self, "directions", z)
        object.__setattr__(self, "weights", w)

    @classmethod
    def isotropic_measure(cls, dim):
        return cls(dim=dim, isotropic=True)

    @classmethod
    def from_dict(cls, doc):
        dim = int(doc["dim"])
        if doc.get("isotropic", False):
            return cls(dim=dim, isotropic=True)
        dirs, weights = [], []
        for atom in doc["atoms"]:
            v = np.asarray(atom["direction"], dtype=float)
            norm = np.linalg.norm(v)
            if v.shape != (dim,) or norm == 0.0:
                raise ValueError(f"invalid atom direction {atom['direction']!r}")
            dirs.append(v / norm)
            weights.append(float(atom["weight"]))
        return cls(dim=dim, directions=np.array(dirs), weights=np.array(weights))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_dict(self):
        if self.isotropic:
            return {"dim": self.dim, "isotropic": True, "atoms": []}
        return {"dim": self.dim, "isotropic": False,
                "atoms": [{"direction": d.tolist(), "weight": float(w)}
                          for d, w in zip(self.directions, self.weights)]}


def omega(alpha, beta, theta):
    """Asymmetry factor 1 - i beta sign(theta) tan(pi alpha / 2)."""
    if alpha == 1.0:
        if beta != 0.0:
            raise ValueError("omega for alpha = 1 is only supported with beta = 0")
        return np.ones_like(np.asarray(theta, dtype=float), dtype=complex)
    tan = 0.0 if alpha == 2.0 else math.tan(math.pi * alpha / 2)
    return 1.0 - 1j * beta * np.sign(theta) * tan


def feller_from_params(p):
    """Map (alpha, beta, sigma) to the Feller pair (gamma_skew, c)."""
    a = p.alpha
    if a in (1.0, 2.0):
        g = 0.0
    else:
        g = 2.0 / math.pi * math.atan(-p.beta * math.tan(math.pi * a / 2))
    c = p.sigma ** a / math.cos(math.pi * g / 2)
    return FellerParams(gamma_skew=g, c=c)


def stable_char_exponent(fp, alpha, theta):
    """psi(theta) = -|theta|^alpha exp(i gamma pi/2 sign(theta))."""
    theta = np.asarray(theta, dtype=float)
    return -np.abs(theta) ** alpha * np.exp(0.5j * math.pi * fp.gamma_skew * np.sign(theta))


def _kappa(p):
    # 1 - c psi(theta) = 1 + kappa theta^alpha for theta > 0
    fp = feller_from_params(p)
    return fp.c * np.exp(0.5j * math.pi * fp.gamma_skew)


def stable_charfn(p, theta, t=1.0):
    """Characteristic function exp{t c psi(theta)} of the stable law at time t."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    fp = feller_from_params(p)
    return np.exp(t * fp.c * stable_char_exponent(fp, p.alpha, theta))


def gs_charfn(p, theta, t=1.0):
    """GS characteristic function (1 - c psi(theta))^(-t).

    Re(1 - c psi) >= 1 because |gamma| <= min(alpha, 2 - alpha), so the
    principal branch of the power never meets its cut.  Negative t is
    accepted: the Fourier form stays defined there, which the shifted time
    t - 1 of the spectral identities needs for t < 1.
    """
    fp = feller_from_params(p)
    return (1.0 - fp.c * stable_char_exponent(fp, p.alpha, theta)) ** (-t)


def gamma_density(g, x, t):
    """Gamma(t, b) density b^t x^(t-1) exp(-b x) / Gamma(t); zero for x < 0."""
    if t <= 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        pos = np.exp(t * np.log(g.b) + (t - 1) * np.log(x) - g.b * x - special.gammaln(t))
    out = np.where(x > 0, pos, 0.0)
    return out[()] if out.ndim == 0 else out


def gamma_charfn(g, theta, t=1.0):
    """(1 - i theta / b)^(-t), for any real t."""
    return (1.0 - 1j * np.asarray(theta, dtype=float) / g.b) ** (-t)


def levy_fp_density(x, z):
    """Density of the first time a standard Brownian motion reaches level z."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0) or z <= 0:
        raise ValueError("levy_fp_density needs x > 0 and z > 0")
    out = z / np.sqrt(2 * math.pi * x ** 3) * np.exp(-z * z / (2 * x))
    return out[()] if out.ndim == 0 else out


def _ml_series(a, z, max_terms=4000):
    # terms peak near |z|^k / Gamma(a k + 1); carry enough digits to absorb it
    peak = max(0.0, max(k * math.log10(abs(z) + 1e-300) - special.gammaln(a * k + 1) / math.log(10)
                        for k in range(0, max_terms, 10)))
    if peak > 200:
        return None
    with mpmath.workdps(int(peak) + 25):
        zm, am = mpmath.mpf(z), mpmath.mpf(a)
        total = mpmath.mpf(0)
        for term_k in range(max_terms):
            term = zm ** term_k / mpmath.gamma(am * term_k + 1)
            total += term
            if term_k > 5 and abs(term) < mpmath.mpf(10) ** (-30) * max(abs(total), 1e-300):
                return float(total)
    return None


def _ml_integral(a, x):
    # E_a(-x) = int_0^inf exp(-r x^(1/a)) K_a(r) dr with the completely monotone
    # kernel K_a(r) = r^(a-1) sin(a pi) / (pi (r^(2a) + 2 r^a cos(a pi) + 1));
    # after r = u x^(-1/a) the u^(a-1) singularity is handled by an algebraic weight
    s = x ** (-1.0 / a)
    sa, ca = math.sin(a * math.pi) / math.pi, math.cos(a * math.pi)

    def smooth(u):
        r = (u * s) ** a
        return math.exp(-u) * s ** a * sa / (r * r + 2 * r * ca + 1)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        v1, e1 = integrate.quad(smooth, 0, 1, weight="alg", wvar=(a - 1, 0),
                                epsabs=1e-15, epsrel=1e-13, limit=200)
        v2, e2 = integrate.quad(lambda u: smooth(u) * u ** (a - 1), 1, np.inf,
                                epsabs=1e-15, epsrel=1e-13, limit=200)
    if e1 + e2 > 1e-8:
        raise ArithmeticError(f"Mittag-Leffler quadrature did not converge (error estimate {e1 + e2:.2e})")
    return v1 + v2


def mittag_leffler(alpha, z):
    """Mittag-Leffler function E_alpha(z) on the negative real axis, 0 < alpha <= 1.

    Uses the power series (in extended precision) for |z| <= 5 and the
    completely monotone integral representation beyond.  The absolute error
    is below 1e-10 for alpha >= 0.1; smaller alpha degrades towards 1e-8.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError("mittag_leffler supports 0 < alpha <= 1")
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr > 0) or not np.all(np.isfinite(z_arr)):
        raise ValueError("mittag_leffler supports finite z <= 0 only")

    def one(zz):
        if zz == 0.0:
            return 1.0
        if alpha == 1.0:
            return math.exp(zz)
        if abs(zz) <= 5.0:
            val = _ml_series(alpha, zz)
            if val is not None:
                return val
        return _ml_integral(alpha, -zz)

    out = np.vectorize(one, otypes=[float])(z_arr)
    return out[()] if out.ndim == 0 else out


def multivariate_gs_charfn(alpha, M, theta, t=1.0):
    """[1 + int |<theta,z>|^alpha omega_{alpha,1}(<theta,z>) M(dz)]^(-t).

    ``theta`` has shape (..., dim).  For the isotropic measure the bracket is
    1 + ||theta||^alpha.
    """
    if alpha == 1.0:
        raise ValueError("multivariate GS laws need alpha != 1")
    theta = np.asarray(theta, dtype=float)
    if theta.shape[-1] != M.dim:
        raise ValueError(f"theta must have trailing dimension {M.dim}")
    if M.isotropic:
        bracket = 1.0 + np.linalg.norm(theta, axis=-1) ** alpha
    else:
        proj = theta @ M.directions.T
        bracket = 1.0 + np.sum(np.abs(proj) ** alpha * omega(alpha, 1.0, proj) * M.weights, axis=-1)
    return bracket ** (-t)


def _binom(n, k):
    # generalized binomial coefficient, valid for negative real n
    return (-1) ** k * special.poch(-n, k) / special.factorial(k)


def gs_expansions(p, t, terms=30):
    """Power expansions of gs_charfn for theta -> +inf and theta -> 0+.

    Returns ``(large, small)``; each is a list of (coefficient, power) pairs
    such that phi(theta) ~ sum coef * theta**power for theta > 0 (the values
    for theta < 0 follow by conjugation).  These feed the alias and
    periodization corrections of :func:`gstable.spectral.invert_charfn`.
    """
    return _one_plus_power_expansions(_kappa(p), p.alpha, t, terms)


def gamma_expansions(g, t, terms=30):
    """Same as :func:`gs_expansions` for the Gamma characteristic function."""
    return _one_plus_power_expansions(-1j / g.b, 1.0, t, terms)


def _one_plus_power_expansions(kappa, alpha, t, terms):
    # (1 + kappa theta^alpha)^(-t), expanded in both directions
    large = [(_binom(-t, j) * kappa ** (-t - j), -alpha * (t + j)) for j in range(terms)]
    small = [(_binom(-t, k) * kappa ** k, alpha * k) for k in range(1, terms)]
    return large, small


def stable_small_expansion(p, t, terms=30):
    """Small-theta expansion of stable_charfn: sum (-t kappa)^k / k! theta^(alpha k)."""
    kappa = _kappa(p)
    return [((-t * kappa) ** k / math.factorial(k), p.alpha * k) for k in range(1, terms)]
