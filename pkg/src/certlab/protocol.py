"""End-to-end certified-randomness protocol simulation.

One run: derive T pseudorandom challenge functions from the master seed,
query the device once per challenge, and judge the answers three ways.

* Score test: S = sum_i fhat_i(s_i)^2 must reach (b - eps/2) T/N.  Honest
  Fourier samplers concentrate near 3T/N (the fourth-moment mean), blind
  uniform cheats near T/N.
* Collision test (when a deterministic claim Q is supplied): V counts
  challenges with s_i = Q(C_i).  With mu = T/N, small V looks like
  uniform sampling, large V like a genuinely peaked sampler.
* Extraction: the answer bits are condensed through a Toeplitz matrix
  whose height is capped by the device's accumulated min-entropy minus a
  64-bit safety margin.

Everything — challenges, device randomness, extractor seed — derives from
the one 64-bit config seed through separate tagged streams, so transcripts
are bit-identical across reruns.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .boolfn import BooleanFunction, wht_rows
from .devices import DeviceModel, argmax_rows
from .rng import GOLDEN, MASK64, derive64, make_rng, mix64_array

_TAG_CHALLENGES = 1
_TAG_DEVICE = 2
_TAG_EXTRACTOR = 3
_BATCH = 4096
EXTRACTOR_MARGIN_BITS = 64  # leftover-hash safety margin on output length


class LengthMismatch(ValueError):
    """Raised when extractor seed/input/output lengths are inconsistent."""


class Verdict(enum.Enum):
    UNIFORM_LIKE = "UniformLike"
    QUANTUM_LIKE = "QuantumLike"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ProtocolConfig:
    """Run parameters.  delta = eps_hog^2 is the collision-test slack."""

    n: int
    T: int
    b: float
    eps_hog: float
    extractor_output_bits: int = 256
    seed: int = 0

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("T must be at least 1")
        if not self.b > 1.0:
            raise ValueError("b must exceed 1")
        if not 0.0 < self.eps_hog < 1.0:
            raise ValueError("eps_hog must lie in (0, 1)")
        if self.extractor_output_bits < 0:
            raise ValueError("extractor_output_bits must be nonnegative")

    @property
    def delta(self) -> float:
        return self.eps_hog * self.eps_hog

    @property
    def size(self) -> int:
        return 1 << self.n


@dataclass(frozen=True)
class ProtocolTranscript:
    """Everything a verifier needs to re-check a run.

    challenge_keys[i] is the 64-bit seed of challenge i's function (the
    function is regenerated by challenge_function); samples[i] is the
    device's answer; probs[i] = fhat_i(samples[i])^2.  S is the total of
    probs (recomputable to 1e-9); V is None when no claim was checked.
    """

    config: ProtocolConfig
    challenge_keys: np.ndarray  # uint64, length T
    samples: np.ndarray         # int64,  length T
    probs: np.ndarray           # float64, length T
    S: float
    score_pass: bool
    V: int | None
    entropy_verdict: Verdict | None
    min_entropy_total: float
    extracted_bits: str


def challenge_key(seed: int, i: int) -> int:
    """64-bit seed of challenge i, derived from the master seed."""
    return derive64(seed, _TAG_CHALLENGES, i)


def _challenge_keys_block(seed: int, start: int, count: int) -> np.ndarray:
    base = derive64(seed, _TAG_CHALLENGES)
    idx = np.arange(start, start + count, dtype=np.uint64)
    with np.errstate(over="ignore"):  # mod-2^64 wrap is the point
        return mix64_array(np.uint64(base) + np.uint64(GOLDEN) + idx)


def _signs_from_keys(keys: np.ndarray, n: int) -> np.ndarray:
    """Sign tables (len(keys), 2^n) from per-challenge 64-bit seeds.

    Challenge bits are the splitmix64 output stream of the key: word j of
    challenge i is mix64(key_i + (j+1) GOLDEN), unpacked LSB-first.
    """
    size = 1 << n
    words_per = max(1, size // 64)
    j = np.arange(1, words_per + 1, dtype=np.uint64) * np.uint64(GOLDEN)
    words = mix64_array(keys[:, None].astype(np.uint64) + j[None, :])
    bits = np.unpackbits(
        words.reshape(-1).view(np.uint8), bitorder="little"
    ).reshape(len(keys), words_per * 64)
    return (1 - 2 * bits[:, :size]).astype(np.int8)


def challenge_function(seed: int, i: int, n: int) -> BooleanFunction:
    """Regenerate challenge i's function from the master seed."""
    keys = np.array([challenge_key(seed, i)], dtype=np.uint64)
    return BooleanFunction(n, _signs_from_keys(keys, n)[0])


def score_threshold(config: ProtocolConfig) -> float:
    """Pass bar (b - eps_hog/2) * T / N for the total score S."""
    return (config.b - config.eps_hog / 2.0) * config.T / config.size


def verify_score(transcript: ProtocolTranscript, config: ProtocolConfig) -> bool:
    """Recompute S from the per-challenge entries and apply the bar."""
    S = float(np.sum(transcript.probs))
    if abs(S - transcript.S) > 1e-9:
        raise ValueError("transcript S does not match its own entries")
    return S >= score_threshold(config)


def collision_verdict(V: int, T: int, N: int, eps_hog: float) -> Verdict:
    """Chernoff-style reading of the collision count V against mu = T/N.

    UniformLike below (1 + eps_hog^2) mu, QuantumLike above
    (1 + eps_hog/4) mu.  For eps_hog >= 1/4 the two bars would cross, so
    the gap is widened (min/max of the two) rather than reordered.
    """
    mu = T / N
    lo = (1.0 + eps_hog * eps_hog) * mu
    hi = (1.0 + eps_hog / 4.0) * mu
    lo, hi = min(lo, hi), max(lo, hi)
    if V < lo:
        return Verdict.UNIFORM_LIKE
    if V > hi:
        return Verdict.QUANTUM_LIKE
    return Verdict.INCONCLUSIVE


def index_bits(samples: np.ndarray, n: int) -> np.ndarray:
    """Concatenate each index's n bits (LSB-first) into one uint8 bit array."""
    s = np.asarray(samples, dtype=np.uint64)
    shifts = np.arange(n, dtype=np.uint64)
    bits = (s[:, None] >> shifts[None, :]) & np.uint64(1)
    return bits.reshape(-1).astype(np.uint8)


def toeplitz_extract_naive(
    samples: np.ndarray, extractor_seed: np.ndarray, k: int
) -> np.ndarray:
    """Reference GF(2) Toeplitz multiply: row i of the matrix is
    seed[i : i+m] reversed.  Quadratic; kept as the oracle for the fast
    path."""
    x = np.asarray(samples, dtype=np.uint8)
    seed = np.asarray(extractor_seed, dtype=np.uint8)
    m = x.size
    _check_extract_args(m, seed.size, k)
    out = np.empty(k, dtype=np.uint8)
    xr = x[::-1]
    for i in range(k):
        out[i] = int(np.bitwise_xor.reduce(seed[i:i + m] & xr)) & 1
    return out


def toeplitz_extract(
    samples: np.ndarray, extractor_seed: np.ndarray, k: int
) -> np.ndarray:
    """GF(2) Toeplitz extraction of k bits from m input bits.

    Same matrix as the naive form, evaluated on packed bytes: output bit i
    is the parity of AND(seed[i : i+m], reversed input), so eight
    bit-shifted packed copies of the seed give every window alignment and
    popcount does the parity.  Linear in (input, fixed seed).
    """
    x = np.asarray(samples, dtype=np.uint8)
    seed = np.asarray(extractor_seed, dtype=np.uint8)
    m = x.size
    _check_extract_args(m, seed.size, k)
    if k == 0:
        return np.zeros(0, dtype=np.uint8)
    xr_packed = np.packbits(x[::-1], bitorder="little")
    mbytes = xr_packed.size
    # shifted[s] holds the seed bits starting at offset s, packed LSB-first
    shifted = []
    for s in range(8):
        padded = np.zeros(((seed.size - s) + 7) // 8 * 8, dtype=np.uint8)
        padded[: seed.size - s] = seed[s:]
        shifted.append(np.packbits(padded, bitorder="little"))
    out = np.empty(k, dtype=np.uint8)
    for i in range(k):
        window = shifted[i & 7][i >> 3: (i >> 3) + mbytes]
        out[i] = int(np.bitwise_count(window & xr_packed).sum()) & 1
    return out


def _check_extract_args(m: int, seed_len: int, k: int):
    if k < 0 or k > m:
        raise LengthMismatch(f"need 0 <= k <= m, got k={k}, m={m}")
    want = m + k - 1 if k > 0 else 0
    if k > 0 and seed_len != want:
        raise LengthMismatch(
            f"extractor seed must have m + k - 1 = {want} bits, got {seed_len}"
        )


def run_protocol(
    config: ProtocolConfig, device: DeviceModel, claimed_Q=None
) -> ProtocolTranscript:
    """Execute one full protocol run; see module docstring for the phases.

    claimed_Q is None, the string "argmax", or a callable mapping a block
    of scaled-spectrum rows to one claimed index per row; supplying it
    enables the collision test.
    """
    if claimed_Q == "argmax":
        claimed_Q = argmax_rows
    n, T, size = config.n, config.T, config.size
    device_rng = make_rng(config.seed, _TAG_DEVICE)
    keys = np.empty(T, dtype=np.uint64)
    samples = np.empty(T, dtype=np.int64)
    probs = np.empty(T, dtype=np.float64)
    V = 0 if claimed_Q is not None else None
    entropy_total = 0.0
    done = 0
    while done < T:
        b = min(_BATCH, T - done)
        kblk = _challenge_keys_block(config.seed, done, b)
        signs = _signs_from_keys(kblk, n)
        W = wht_rows(signs)
        s = np.asarray(device.sample_rows(W, device_rng), dtype=np.int64)
        w_at = W[np.arange(b), s].astype(np.int64)
        p = (w_at * w_at) / float(size * size)
        keys[done:done + b] = kblk
        samples[done:done + b] = s
        probs[done:done + b] = p
        if claimed_Q is not None:
            q = np.asarray(claimed_Q(W), dtype=np.int64)
            V += int(np.count_nonzero(s == q))
        entropy_total += float(device.min_entropy_rows(W).sum())
        done += b
    S = float(probs.sum())
    score_pass = S >= score_threshold(config)
    verdict = (
        collision_verdict(V, T, size, config.eps_hog)
        if V is not None
        else None
    )
    extracted = _extract_bits(config, samples, entropy_total)
    return ProtocolTranscript(
        config=config,
        challenge_keys=keys,
        samples=samples,
        probs=probs,
        S=S,
        score_pass=score_pass,
        V=V,
        entropy_verdict=verdict,
        min_entropy_total=entropy_total,
        extracted_bits="".join(map(str, extracted)),
    )


def _extract_bits(
    config: ProtocolConfig, samples: np.ndarray, entropy_total: float
) -> np.ndarray:
    """Toeplitz-condense the answer bits under the min-entropy budget."""
    x = index_bits(samples, config.n)
    m = x.size
    k = min(
        config.extractor_output_bits,
        int(np.floor(entropy_total)) - EXTRACTOR_MARGIN_BITS,
        m,
    )
    if k <= 0:
        return np.zeros(0, dtype=np.uint8)
    ext_rng = make_rng(config.seed, _TAG_EXTRACTOR)
    seed_bits = ext_rng.integers(0, 2, size=m + k - 1, dtype=np.uint8)
    return toeplitz_extract(x, seed_bits, k)


def transcript_to_dict(transcript: ProtocolTranscript) -> dict:
    """JSON-ready view of a transcript (schema documented in the README)."""
    c = transcript.config
    return {
        "config": {
            "n": c.n,
            "T": c.T,
            "b": c.b,
            "eps_hog": c.eps_hog,
            "delta": c.delta,
            "extractor_output_bits": c.extractor_output_bits,
            "seed": c.seed,
        },
        "challenges": [
            {
                "key": int(k),
                "s": int(s),
                "p": float(p),
            }
            for k, s, p in zip(
                transcript.challenge_keys,
                transcript.samples,
                transcript.probs,
            )
        ],
        "S": transcript.S,
        "score_threshold": score_threshold(c),
        "score_pass": transcript.score_pass,
        "V": transcript.V,
        "entropy_verdict": (
            transcript.entropy_verdict.value
            if transcript.entropy_verdict is not None
            else None
        ),
        "min_entropy_total": transcript.min_entropy_total,
        "extracted_bits": transcript.extracted_bits,
    }
