"""Seeded Monte-Carlo moment estimation and kernel density curves.

Sampling is reproducible: each input dimension draws from its own substream
of the seeded generator, and normal germs are produced by the inverse-CDF
transform of uniform draws, so the germ matrix is a pure function of
(spec, n, seed).
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtri

from ._threads import evaluate_rows
from .errors import ValidationError
from .pce import GERM_NORMAL, GERM_UNIFORM, InputSpec, MomentSummary

GERM_METHOD = "inverse-cdf"

_KDE_BANDWIDTH_FACTOR = 1.06  # Silverman's rule: 1.06 s n^(-1/5)
_KDE_SUPPORT_SIGMAS = 3.0


@dataclass(frozen=True)
class SampleSet:
    """Reproducible germ draws (n x d) and, once evaluated, model outputs."""

    seed: int
    n: int
    germs: np.ndarray
    germ_method: str = GERM_METHOD
    outputs: np.ndarray | None = None

    def __post_init__(self):
        self.germs.setflags(write=False)
        if self.outputs is not None:
            self.outputs.setflags(write=False)


def _unit_open_uniform(rng: np.random.Generator, n: int) -> np.ndarray:
    # 53-bit midpoint draws: strictly inside (0, 1), so ndtri stays finite
    return (rng.integers(0, 1 << 53, size=n) + 0.5) * 2.0**-53


def draw_samples(spec: InputSpec, n: int, seed: int) -> SampleSet:
    """Draw n germ vectors for the spec from independent per-dimension substreams."""
    if n < 1:
        raise ValidationError("sample count must be >= 1")
    streams = np.random.SeedSequence(seed).spawn(spec.dimension)
    germs = np.empty((n, spec.dimension))
    for j, (param, stream) in enumerate(zip(spec.parameters, streams)):
        rng = np.random.Generator(np.random.PCG64(stream))
        u = _unit_open_uniform(rng, n)
        if param.germ == GERM_UNIFORM:
            germs[:, j] = 2.0 * u - 1.0
        else:
            assert param.germ == GERM_NORMAL
            germs[:, j] = ndtri(u)
    return SampleSet(seed=seed, n=n, germs=germs)


def evaluate_samples(model, spec: InputSpec, samples: SampleSet,
                     threads: int | None = None) -> SampleSet:
    """Run the model on every sample; outputs land at their sample index."""
    thetas = spec.to_physical(samples.germs)
    outputs = evaluate_rows(model, thetas, threads=threads, what="sample")
    return replace(samples, outputs=outputs)


def sample_moments(values: np.ndarray, labels) -> MomentSummary:
    """Columnwise sample mean, unbiased variance and moment-ratio skew/kurtosis."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    mean = values.mean(axis=0)
    centered = values - mean
    m2 = np.mean(centered**2, axis=0)
    variance = m2 * n / (n - 1) if n > 1 else np.zeros_like(m2)
    degenerate = m2 <= 0.0
    safe_m2 = np.where(degenerate, 1.0, m2)
    skewness = np.where(degenerate, 0.0, np.mean(centered**3, axis=0) / safe_m2**1.5)
    kurtosis = np.where(degenerate, 3.0, np.mean(centered**4, axis=0) / safe_m2**2)
    return MomentSummary(labels=tuple(labels), mean=mean, variance=variance,
                         skewness=skewness, kurtosis=kurtosis, degenerate=degenerate)


def mc_moments(model, spec: InputSpec, n: int, seed: int,
               threads: int | None = None) -> MomentSummary:
    """Monte-Carlo moment estimates of the model outputs under the input spec."""
    samples = evaluate_samples(model, spec, draw_samples(spec, n, seed), threads=threads)
    labels = tuple(f"y{i}" for i in range(samples.outputs.shape[1]))
    return sample_moments(samples.outputs, labels)


@dataclass(frozen=True)
class DensityCurve:
    """Kernel density estimate on a uniform grid."""

    x: np.ndarray
    density: np.ndarray
    bandwidth: float

    def __post_init__(self):
        self.x.setflags(write=False)
        self.density.setflags(write=False)


def kde(samples, grid_size: int = 256) -> DensityCurve:
    """Gaussian-kernel density estimate with Silverman bandwidth.

    The curve is evaluated on a uniform grid covering the sample range padded
    by three bandwidths on each side.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1 or samples.size < 100:
        raise ValidationError("kde needs a flat sample of at least 100 values")
    if grid_size < 2:
        raise ValidationError("grid_size must be >= 2")
    std = samples.std(ddof=1)
    if std <= 0.0:
        raise ValidationError("degenerate sample: zero variance")
    h = _KDE_BANDWIDTH_FACTOR * std * samples.size ** (-0.2)
    pad = _KDE_SUPPORT_SIGMAS * h
    x = np.linspace(samples.min() - pad, samples.max() + pad, grid_size)
    density = np.zeros(grid_size)
    norm = 1.0 / (samples.size * h * np.sqrt(2.0 * np.pi))
    for start in range(0, samples.size, 4096):  # chunked to bound memory
        block = samples[start : start + 4096]
        z = (x[:, None] - block[None, :]) / h
        density += norm * np.exp(-0.5 * z * z).sum(axis=1)
    return DensityCurve(x=x, density=density, bandwidth=float(h))
