"""Monte Carlo generation of stable, Gamma, GS and first-passage variates.

Random streams come from numpy's PCG64 seeded through SeedSequence.  Each
component (uniform angle, exponential, Gamma time, Gaussian, ...) has a fixed
stream id, and a batch is cut into chunks of ``CHUNK`` draws, each chunk with
its own spawn key (stream id, chunk index).  The output is therefore a pure
function of (law, parameters, t, n, seed), independent of how chunks are
scheduled.
"""

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .gslaw import StableParams, feller_from_params

CHUNK = 2 ** 16

# stream ids derived from the master seed
_ANGLE, _EXPO, _GAMMA, _NORMAL, _AMPLITUDE_ANGLE, _AMPLITUDE_EXPO = range(6)


@dataclass
class SampleBatch:
    """Variates (shape (n,) or (n, dim)) with the information needed to reproduce them."""

    values: np.ndarray
    t: float
    seed: int
    law: str
    params: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.values)

    def to_csv(self, fh):
        v = self.values
        if v.ndim == 1:
            fh.write("index,value\n")
            for i, val in enumerate(v):
                fh.write(f"{i},{val:.17g}\n")
        else:
            fh.write("index," + ",".join(f"v{j + 1}" for j in range(v.shape[1])) + "\n")
            for i, row in enumerate(v):
                fh.write(f"{i}," + ",".join(f"{val:.17g}" for val in row) + "\n")

    def sidecar(self):
        return {"law": self.law, "params": self.params, "t": self.t,
                "n": int(len(self.values)), "seed": int(self.seed)}

    def sidecar_json(self):
        return json.dumps(self.sidecar(), indent=2, sort_keys=True)


def _stream(seed, stream_id, chunk):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream_id, chunk))))


def _chunked(seed, n, draw, jobs=1):
    """Concatenate draw(chunk_index, size, seed) over fixed-size chunks."""
    sizes = [min(CHUNK, n - start) for start in range(0, n, CHUNK)]
    if jobs > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda a: draw(a[0], a[1]), enumerate(sizes)))
    else:
        parts = [draw(i, size) for i, size in enumerate(sizes)]
    if not parts:
        return np.empty(0)
    return np.concatenate(parts)


def cms_params(p):
    """Chambers-Mallows-Stuck inputs (B, S) for the unit-scale law of ``p``.

    The target characteristic function is exp{-|theta|^alpha omega_{alpha,beta}(theta)};
    for alpha != 1 it is produced by

        X = S sin(alpha (V + B)) / cos(V)^(1/alpha) * (cos(V - alpha (V + B)) / W)^((1 - alpha)/alpha)

    with B = arctan(beta tan(pi alpha/2)) / alpha and
    S = (1 + beta^2 tan^2(pi alpha/2))^(1/(2 alpha)).
    """
    a, beta = p.alpha, p.beta
    if a == 1.0:
        return 0.0, 1.0
    tan = 0.0 if a == 2.0 else math.tan(math.pi * a / 2)
    return math.atan(beta * tan) / a, (1.0 + (beta * tan) ** 2) ** (1.0 / (2 * a))


def _cms(alpha, b_shift, s_scale, v, w):
    if alpha == 1.0:
        return np.tan(v)
    ab = alpha * (v + b_shift)
    return (s_scale * np.sin(ab) / np.cos(v) ** (1.0 / alpha)
            * (np.cos(v - ab) / w) ** ((1.0 - alpha) / alpha))


def _unit_stable(p, seed, chunk, size, angle_id=_ANGLE, expo_id=_EXPO):
    v = _stream(seed, angle_id, chunk).uniform(-math.pi / 2, math.pi / 2, size)
    w = _stream(seed, expo_id, chunk).standard_exponential(size)
    b_shift, s_scale = cms_params(p)
    return _cms(p.alpha, b_shift, s_scale, v, w)


def _params_dict(p):
    return {"alpha": p.alpha, "beta": p.beta, "sigma": p.sigma}


def sample_stable(p, t, n, seed, jobs=1):
    """n variates with characteristic function exp{t c psi(theta)}: scale sigma t^(1/alpha)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    scale = p.sigma * t ** (1.0 / p.alpha)
    values = _chunked(seed, n, lambda i, size: scale * _unit_stable(p, seed, i, size), jobs)
    return SampleBatch(values, t, seed, "stable", _params_dict(p))


def sample_gamma(g, t, n, seed, jobs=1):
    """n Gamma(shape t, rate b) variates."""
    if t <= 0:
        raise ValueError("t must be positive")
    values = _chunked(seed, n, lambda i, size: _stream(seed, _GAMMA, i).gamma(t, 1.0 / g.b, size), jobs)
    return SampleBatch(values, t, seed, "gamma", {"b": g.b})


def sample_gs(p, t, n, seed, jobs=1):
    """GS variates: the stable law evaluated at an independent Gamma(t, 1) time."""
    if t <= 0:
        raise ValueError("t must be positive")

    def draw(i, size):
        z = _stream(seed, _GAMMA, i).gamma(t, 1.0, size)
        return p.sigma * z ** (1.0 / p.alpha) * _unit_stable(p, seed, i, size)

    return SampleBatch(_chunked(seed, n, draw, jobs), t, seed, "gs", _params_dict(p))


def sample_isotropic_gs(alpha, dim, t, n, seed, jobs=1):
    """Isotropic GS vectors with characteristic function (1 + ||theta||^alpha)^(-t).

    Sub-Gaussian construction: sqrt(A) G with G ~ N(0, 2 I) and A a positive
    (alpha/2)-stable amplitude with Laplace transform exp(-s^(alpha/2)), so
    that E exp(i <theta, sqrt(A) G>) = exp(-||theta||^alpha); the vector is
    then evaluated at a Gamma(t, 1) time through the factor z^(1/alpha).
    """
    if not 0.0 < alpha <= 2.0:
        raise ValueError("alpha must lie in (0, 2]")
    if dim < 1:
        raise ValueError("dim must be at least 1")
    if t <= 0:
        raise ValueError("t must be positive")
    half = alpha / 2
    if alpha < 2.0:
        # totally skewed half-stable law with Laplace exponent s^(alpha/2):
        # sigma^(alpha/2) = cos(pi alpha/4)
        amp_law = StableParams(half, 1.0, math.cos(math.pi * half / 2) ** (1.0 / half))

    def draw(i, size):
        z = _stream(seed, _GAMMA, i).gamma(t, 1.0, size)
        gauss = math.sqrt(2.0) * _stream(seed, _NORMAL, i).standard_normal((size, dim))
        if alpha == 2.0:
            amp = np.ones(size)
        else:
            amp = amp_law.sigma * _unit_stable(amp_law, seed, i, size, _AMPLITUDE_ANGLE, _AMPLITUDE_EXPO)
        return (z ** (1.0 / alpha) * np.sqrt(amp))[:, None] * gauss

    values = _chunked(seed, n, draw, jobs) if n else np.empty((0, dim))
    return SampleBatch(values.reshape(n, dim), t, seed, "isotropic-gs", {"alpha": alpha, "dim": dim})


def sample_first_passage_gamma_barrier(t, n, seed, jobs=1):
    """First time a standard Brownian motion reaches an independent Gamma(t, 1) level.

    T = z^2 / N^2 with z ~ Gamma(t, 1) and N standard normal.
    """
    if t <= 0:
        raise ValueError("t must be positive")

    def draw(i, size):
        z = _stream(seed, _GAMMA, i).gamma(t, 1.0, size)
        return z ** 2 / _stream(seed, _NORMAL, i).standard_normal(size) ** 2

    return SampleBatch(_chunked(seed, n, draw, jobs), t, seed, "first-passage", {})


def ks_statistic(batch, cdf):
    """Kolmogorov-Smirnov sup-distance between the empirical CDF and ``cdf``."""
    values = np.asarray(batch.values if isinstance(batch, SampleBatch) else batch, dtype=float)
    if values.size == 0:
        raise ValueError("empty batch")
    return float(stats.kstest(values, cdf).statistic)


def ks_two_sample(a, b):
    """Two-sample Kolmogorov-Smirnov statistic."""
    va = np.asarray(a.values if isinstance(a, SampleBatch) else a, dtype=float)
    vb = np.asarray(b.values if isinstance(b, SampleBatch) else b, dtype=float)
    if va.size == 0 or vb.size == 0:
        raise ValueError("empty batch")
    return float(stats.ks_2samp(va, vb).statistic)


def ks_critical(n, m=None, level=0.01):
    """Asymptotic KS critical value; two-sample when ``m`` is given."""
    c = math.sqrt(-0.5 * math.log(level / 2))
    if m is None:
        return c / math.sqrt(n)
    return c * math.sqrt((n + m) / (n * m))


def ecf(batch, theta):
    """Empirical characteristic function mean(exp(i <theta, X>)) at each theta.

    For vector batches ``theta`` has shape (k, dim).
    """
    v = np.asarray(batch.values if isinstance(batch, SampleBatch) else batch, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if v.ndim == 1:
        return np.array([np.mean(np.exp(1j * th * v)) for th in np.atleast_1d(theta)])
    return np.array([np.mean(np.exp(1j * (v @ th))) for th in np.atleast_2d(theta)])
