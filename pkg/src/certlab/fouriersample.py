"""Classical simulation of Fourier sampling and the statistics scored on it.

Fourier sampling draws an index z with probability fhat(z)^2.  We score a
sampler three ways:

* heaviness statistics p_B (sampled coefficient Light), p_light4 (Light or
  SlightlyHeavy) and p_G = p_light4 - p_B, estimated over fresh random
  functions with one draw each;
* the heavy-output score (mean fhat(s)^2 over returned samples), whose
  honest expectation is the spectrum's fourth moment;
* total-variation distance between the output distributions of two
  spectra, computed exactly from the scaled integer coefficients.

The Gaussian reference triple is what the three statistics converge to as
n grows, obtained by quadrature of the half-integer chi-square density.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .boolfn import BooleanFunction, FourierSpectrum, random_functions_batch, wht_rows
from .stats import wilson_halfwidth

_BATCH = 512  # functions generated and transformed per vectorized block


class EmptySamples(ValueError):
    """Raised when a score is requested over zero samples."""


class DimensionMismatch(ValueError):
    """Raised when two spectra with different n are combined."""


@dataclass(frozen=True)
class PgPbEstimate:
    """Monte-Carlo estimate of the heaviness statistics of a sampler.

    `ci99` maps each of "p_b", "p_light4", "p_g" to its Wilson-interval
    99% half-width.  p_g is exactly p_light4 - p_b by construction.
    """

    p_b: float
    p_light4: float
    p_g: float
    trials: int
    ci99: dict

    def __post_init__(self):
        if not 0.0 <= self.p_b <= self.p_light4 <= 1.0:
            raise ValueError("need 0 <= p_b <= p_light4 <= 1")
        if abs(self.p_g - (self.p_light4 - self.p_b)) > 1e-12:
            raise ValueError("p_g must equal p_light4 - p_b")


def fourier_sample(spec: FourierSpectrum, rng: np.random.Generator) -> int:
    """One index z drawn with probability exactly fhat(z)^2.

    Inverse CDF over the cumulative squared spectrum, using the scaled
    integers so the CDF grid is exact (total mass N^2).
    """
    w = spec.scaled.astype(np.int64)
    cs = np.cumsum(w * w)
    total = int(cs[-1])
    u = rng.random()
    return int(np.searchsorted(cs, u * total, side="right"))


def fourier_sample_many(
    spec: FourierSpectrum, count: int, rng: np.random.Generator
) -> np.ndarray:
    """`count` independent Fourier samples from one spectrum."""
    w = spec.scaled.astype(np.int64)
    cs = np.cumsum(w * w)
    total = int(cs[-1])
    u = rng.random(count)
    return np.searchsorted(cs, u * total, side="right").astype(np.int64)


def hog_score(spec: FourierSpectrum, samples) -> float:
    """Mean of fhat(s)^2 over the given samples (the heavy-output score)."""
    s = np.asarray(samples, dtype=np.int64)
    if s.size == 0:
        raise EmptySamples("hog_score needs at least one sample")
    c = spec.coeffs[s]
    return float(np.mean(c * c))


class HonestSampler:
    """Draws z ~ fhat(z)^2 — the distribution the quantum algorithm outputs."""

    name = "honest"

    def __call__(self, f: BooleanFunction, spec: FourierSpectrum,
                 rng: np.random.Generator) -> int:
        return fourier_sample(spec, rng)

    def sample_batch(self, scaled_rows: np.ndarray,
                     rng: np.random.Generator) -> np.ndarray:
        w = scaled_rows.astype(np.int64)
        cs = np.cumsum(w * w, axis=1)
        totals = cs[:, -1]
        u = rng.random(cs.shape[0])
        return (cs < (u * totals)[:, None]).sum(axis=1).astype(np.int64)


class UniformSampler:
    """Ignores the function and returns a uniform index (a blind cheat)."""

    name = "uniform"

    def __call__(self, f: BooleanFunction, spec: FourierSpectrum,
                 rng: np.random.Generator) -> int:
        return int(rng.integers(0, spec.size))

    def sample_batch(self, scaled_rows: np.ndarray,
                     rng: np.random.Generator) -> np.ndarray:
        rows, size = scaled_rows.shape
        return rng.integers(0, size, size=rows, dtype=np.int64)


honest_sampler = HonestSampler()
uniform_sampler = UniformSampler()


def pgpb_counts(n: int, algorithm, functions: int,
                rng: np.random.Generator) -> tuple[int, int]:
    """(Light count, Light-or-SlightlyHeavy count) over fresh functions.

    Each trial draws a new uniform function, lets the algorithm return one
    index, and classifies the coefficient at that index by exact integer
    comparison on the scaled spectrum.  `algorithm` is called as
    algorithm(f, spec, rng) unless it provides a vectorized
    `sample_batch(scaled_rows, rng)`.
    """
    if functions < 0:
        raise ValueError("functions must be nonnegative")
    size = 1 << n
    batch_fn = getattr(algorithm, "sample_batch", None)
    n_light = 0
    n_light4 = 0
    done = 0
    while done < functions:
        b = min(_BATCH, functions - done)
        tables = random_functions_batch(n, b, rng)
        scaled = wht_rows(tables)
        if batch_fn is not None:
            idx = np.asarray(batch_fn(scaled, rng), dtype=np.int64)
        else:
            idx = np.empty(b, dtype=np.int64)
            for i in range(b):
                f = BooleanFunction(n, tables[i])
                spec = FourierSpectrum(n, scaled[i] / size, scaled[i])
                idx[i] = algorithm(f, spec, rng)
        w = scaled[np.arange(b), idx].astype(np.int64)
        w2 = w * w
        n_light += int(np.count_nonzero(w2 <= size))
        n_light4 += int(np.count_nonzero(w2 <= 4 * size))
        done += b
    return n_light, n_light4


def pgpb_from_counts(n_light: int, n_light4: int, functions: int) -> PgPbEstimate:
    """Assemble the estimate (with Wilson CIs) from raw class counts."""
    if functions < 1:
        raise ValueError("need at least one trial")
    p_b = n_light / functions
    p_light4 = n_light4 / functions
    ci = {
        "p_b": wilson_halfwidth(n_light, functions),
        "p_light4": wilson_halfwidth(n_light4, functions),
        "p_g": wilson_halfwidth(n_light4 - n_light, functions),
    }
    return PgPbEstimate(p_b, p_light4, p_light4 - p_b, functions, ci)


def estimate_pg_pb(n: int, algorithm, functions: int,
                   rng: np.random.Generator) -> PgPbEstimate:
    """Heaviness statistics of `algorithm` over fresh random functions."""
    n_light, n_light4 = pgpb_counts(n, algorithm, functions, rng)
    return pgpb_from_counts(n_light, n_light4, functions)


def gaussian_reference() -> tuple[float, float, float]:
    """Large-n limits of (p_B, p_light4, p_G) for the honest sampler.

    In the limit a sampled coefficient behaves like sqrt(N)*fhat -> u with
    density u^2 exp(-u^2/2)/sqrt(2*pi) (a size-biased standard normal), so
    p_B is that density integrated over [-1, 1] and p_light4 over [-2, 2].
    Quadrature is accurate to well below 1e-10, comfortably past the six
    digits promised.
    """

    def density(u):
        return u * u * np.exp(-0.5 * u * u) / np.sqrt(2.0 * np.pi)

    p_b, _ = integrate.quad(density, -1.0, 1.0, epsabs=1e-12, epsrel=1e-12)
    p_light4, _ = integrate.quad(density, -2.0, 2.0, epsabs=1e-12, epsrel=1e-12)
    return p_b, p_light4, p_light4 - p_b


def tv_distance(spec1: FourierSpectrum, spec2: FourierSpectrum) -> float:
    """Total-variation distance between the two Fourier-sampling outputs.

    (1/2) sum_z |fhat1(z)^2 - fhat2(z)^2|, computed on the scaled integers
    (exact; the sum is bounded by 2 N^2, far inside int64).
    """
    if spec1.n != spec2.n:
        raise DimensionMismatch(
            f"spectra have different n: {spec1.n} vs {spec2.n}"
        )
    w1 = spec1.scaled.astype(np.int64)
    w2 = spec2.scaled.astype(np.int64)
    num = int(np.sum(np.abs(w1 * w1 - w2 * w2)))
    size = 1 << spec1.n
    return num / (2.0 * size * size)
