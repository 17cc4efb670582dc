"""Bit-packed bipolar hypervectors, bundle sums, and membership analytics.

A hypervector is a dense pattern of d signs, each -1 or +1, carrying an
implicit 1/sqrt(d) scale so that every vector has unit norm and the scaled
dot product of two vectors is (matches - mismatches) / d.  Signs are stored
bit-packed, 64 per machine word, with bit j of the vector living at bit
position (63 - (j mod 64)) of word floor(j / 64); a set bit means +1.  The
dot product is then one XOR plus a popcount, and the result is exact
integer arithmetic divided by d once at the end.

Sums of k hypervectors (bundles) keep plain signed integer components.
The membership score of a query against a bundle is the scaled dot of the
query with the component sums; it concentrates around 1 for bundled
vectors and around 0 for fresh ones, with noise sigma = sqrt(k/d).

Vector generation is deterministic: word w of vector (seed, index) is draw
w of a SplitMix64 stream whose initial state is seed XOR (index * GOLDEN).
The same (dim, seed, index) triple always regenerates the same vector, so
large vector sets never need to be stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError

MASK64 = (1 << 64) - 1

# SplitMix64 constants: golden-ratio increment and the two finalizer multipliers.
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

# Fixed default seed used by every command-line entry point.
DEFAULT_SEED = 42

_U = np.uint64


def _mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer, elementwise on uint64 arrays (wraps mod 2^64)."""
    z = (z ^ (z >> _U(30))) * _U(MIX1)
    z = (z ^ (z >> _U(27))) * _U(MIX2)
    return z ^ (z >> _U(31))


def words_per_vector(dim: int) -> int:
    return (dim + 63) // 64


def _tail_mask(dim: int) -> int:
    """Mask keeping only the valid (top) bits of the last word."""
    r = dim & 63
    if r == 0:
        return MASK64
    return (MASK64 << (64 - r)) & MASK64


def generate_packed(dim: int, seed: int, indices) -> np.ndarray:
    """Sign words for a batch of deterministic vectors.

    Args:
        dim: vector dimension, >= 1.
        seed: 64-bit stream seed (wider ints are reduced mod 2^64).
        indices: integer array-like of vector indices, each >= 0.

    Returns:
        uint64 array of shape (len(indices), words_per_vector(dim)).  Unused
        tail bits of the last word are zero, so packed words can be XORed
        and popcounted directly.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    idx = np.asarray(indices, dtype=np.uint64)
    if idx.ndim != 1:
        idx = idx.reshape(-1)
    nwords = words_per_vector(dim)
    state0 = _U(seed & MASK64) ^ (idx * _U(GOLDEN))
    steps = np.arange(1, nwords + 1, dtype=np.uint64) * _U(GOLDEN)
    words = _mix64(state0[:, None] + steps[None, :])
    mask = _tail_mask(dim)
    if mask != MASK64:
        words[:, -1] &= _U(mask)
    return words


def popcount_words(words: np.ndarray) -> np.ndarray:
    """Total set bits along the last axis."""
    return np.bitwise_count(words).sum(axis=-1, dtype=np.int64)


def packed_bits(words: np.ndarray, dim: int) -> np.ndarray:
    """Unpack sign words to a 0/1 uint8 array of shape (..., dim).

    Bit order matches the generation contract: byte-swapping each word to
    big-endian puts bit 63 first, so unpackbits yields vector order.
    """
    be = np.ascontiguousarray(words.astype(">u8"))
    flat = be.view(np.uint8).reshape(words.shape[:-1] + (words.shape[-1] * 8,))
    return np.unpackbits(flat, axis=-1)[..., :dim]


def packed_signs(words: np.ndarray, dim: int) -> np.ndarray:
    """Unpack sign words to an int8 array of -1/+1 of shape (..., dim)."""
    bits = packed_bits(words, dim).astype(np.int8)
    return 2 * bits - 1


def dot_int_rows(rows: np.ndarray, query_words: np.ndarray, dim: int) -> np.ndarray:
    """Unscaled integer dots (matches - mismatches) of packed rows vs one query."""
    return dim - 2 * popcount_words(rows ^ query_words)


class Hypervector:
    """One d-dimensional bipolar vector, immutable, bit-packed."""

    __slots__ = ("dim", "words")

    def __init__(self, dim: int, words: np.ndarray):
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        words = np.asarray(words, dtype=np.uint64)
        if words.shape != (words_per_vector(dim),):
            raise ValueError(
                f"expected {words_per_vector(dim)} words for dim {dim}, got shape {words.shape}"
            )
        if int(words[-1]) & ~_tail_mask(dim) & MASK64:
            raise ValueError("stray bits beyond dim in the last word")
        words = words.copy()
        words.flags.writeable = False
        self.dim = dim
        self.words = words

    @classmethod
    def generate(cls, dim: int, seed: int, index: int) -> "Hypervector":
        """The deterministic vector for (dim, seed, index)."""
        if index < 0:
            raise ValueError(f"index must be >= 0, got {index}")
        hv = cls.__new__(cls)
        hv.dim = dim
        w = generate_packed(dim, seed, np.array([index], dtype=np.uint64))[0]
        w.flags.writeable = False
        hv.words = w
        return hv

    def signs(self) -> np.ndarray:
        """Components as -1/+1 int8, length dim."""
        return packed_signs(self.words, self.dim)

    def bit(self, j: int) -> int:
        """Raw bit of component j (1 means the component is +1)."""
        if not 0 <= j < self.dim:
            raise IndexError(j)
        return (int(self.words[j >> 6]) >> (63 - (j & 63))) & 1

    def negated(self) -> "Hypervector":
        """The antipodal vector (every sign flipped)."""
        flipped = self.words.copy()
        flipped ^= _U(MASK64)
        flipped[-1] &= _U(_tail_mask(self.dim))
        return Hypervector(self.dim, flipped)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Hypervector)
            and self.dim == other.dim
            and bool(np.array_equal(self.words, other.words))
        )

    def __hash__(self) -> int:
        return hash((self.dim, self.words.tobytes()))

    def __repr__(self) -> str:
        return f"Hypervector(dim={self.dim})"


def generate_hypervector(dim: int, seed: int, index: int) -> Hypervector:
    return Hypervector.generate(dim, seed, index)


def dot(a: Hypervector, b: Hypervector) -> float:
    """Scaled dot product, exactly (matches - mismatches) / dim."""
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dims differ: {a.dim} vs {b.dim}")
    mismatches = int(popcount_words(a.words ^ b.words))
    return (a.dim - 2 * mismatches) / a.dim


def orthogonality_bound(dim: int, delta: float) -> float:
    """Claimed lower bound 1 - exp(-dim * delta^2) on Pr(|dot| <= delta).

    This is the closed form the analytics are built on.  Exact binomial
    tails are wider than exp(-dim * delta^2) for most (dim, delta) of
    interest, so treat the value as a design heuristic, not a guarantee;
    see the test suite's exact-tail checks.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if not delta > 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    return 1.0 - math.exp(-dim * delta * delta)


class BundleVector:
    """Integer component sums of the hypervectors added so far.

    Invariants: every component has the same parity as count, and its
    magnitude never exceeds count.  Construction is single-writer; treat a
    bundle as read-only once it is being scored.
    """

    __slots__ = ("dim", "components", "count")

    def __init__(self, dim: int, components: np.ndarray | None = None, count: int = 0):
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        if components is None:
            components = np.zeros(dim, dtype=np.int64)
            count = 0
        else:
            components = np.asarray(components)
            if components.shape != (dim,):
                raise ValueError(f"components shape {components.shape} != ({dim},)")
            if not np.issubdtype(components.dtype, np.integer):
                raise ValueError("components must be an integer array")
        self.dim = dim
        self.components = components
        self.count = int(count)

    @classmethod
    def empty(cls, dim: int) -> "BundleVector":
        return cls(dim)

    @classmethod
    def from_vectors(cls, vectors: Iterable[Hypervector]) -> "BundleVector":
        bundle = None
        for v in vectors:
            if bundle is None:
                bundle = cls(v.dim)
            bundle.add(v)
        if bundle is None:
            raise ValueError("from_vectors needs at least one vector")
        return bundle

    @classmethod
    def from_packed(cls, dim: int, rows: np.ndarray) -> "BundleVector":
        """Bundle of all packed rows at once.  Exactly equals repeated add()."""
        k = rows.shape[0]
        if k == 0:
            return cls(dim)
        ones = packed_bits(rows, dim).sum(axis=0, dtype=np.int64)
        return cls(dim, 2 * ones - k, k)

    def add(self, v: Hypervector, times: int = 1) -> "BundleVector":
        """Accumulate v (times > 1 realizes an integer weight by repetition)."""
        if v.dim != self.dim:
            raise DimensionMismatchError(f"dims differ: {self.dim} vs {v.dim}")
        if times < 1:
            raise ValueError(f"times must be >= 1, got {times}")
        self.components = self.components + times * v.signs().astype(np.int64)
        self.count += times
        return self

    def copy(self) -> "BundleVector":
        return BundleVector(self.dim, self.components.copy(), self.count)

    def __repr__(self) -> str:
        return f"BundleVector(dim={self.dim}, count={self.count})"


def bundle_add(bundle: BundleVector, v: Hypervector) -> BundleVector:
    """Add one vector into the bundle; returns the same bundle for chaining."""
    return bundle.add(v)


@dataclass(frozen=True)
class MembershipScore:
    """A scaled bundle/query dot plus the decision threshold it was scored at."""

    value: float
    threshold: float = 0.5


def membership_score(
    bundle: BundleVector, query: Hypervector, threshold: float = 0.5
) -> MembershipScore:
    """Scaled dot of the query signs with the bundle components.

    The value is exactly (sum_i sign(query, i) * components[i]) / dim; it
    estimates the weight with which the query was bundled (1 for a single
    membership, 0 for an unrelated vector).
    """
    if bundle.dim != query.dim:
        raise DimensionMismatchError(f"dims differ: {bundle.dim} vs {query.dim}")
    raw = int(query.signs().astype(np.int64) @ bundle.components)
    return MembershipScore(raw / bundle.dim, threshold)


def decide_membership(score: MembershipScore) -> bool:
    """True when the score clears its threshold (strictly)."""
    return score.value > score.threshold


def nearest_in_set(candidates: Sequence[Hypervector], query: Hypervector) -> int:
    """Index of the candidate with the largest dot; ties go to the lowest index."""
    if len(candidates) == 0:
        raise ValueError("candidates must be non-empty")
    dims = {c.dim for c in candidates}
    if dims != {query.dim}:
        raise DimensionMismatchError(f"candidate dims {dims} vs query dim {query.dim}")
    rows = np.stack([c.words for c in candidates])
    dots = dot_int_rows(rows, query.words, query.dim)
    return int(np.argmax(dots))


def normal_cdf(x: float) -> float:
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


@dataclass(frozen=True)
class FilterAnalytics:
    """Closed-form operating point of a threshold-1/2 membership filter.

    sigma is the score noise scale sqrt(k/dim); overlap is the probability
    mass the member and non-member score distributions share; the four
    rates follow the overlap split used throughout the analytics, and
    precision_recall is the predicted precision (= recall) at the halfway
    threshold.
    """

    sigma: float
    overlap: float
    fp_rate: float
    fn_rate: float
    tp_rate: float
    tn_rate: float
    precision_recall: float


def predict_filter_analytics(k: int, dim: int) -> FilterAnalytics:
    """Analytics for a bundle of k vectors in dimension dim.

    overlap(sigma) = 2 * Phi(-1 / (2 sigma)); the false rates each take
    half the overlap, the true rates are 1 - overlap, and the predicted
    precision/recall is 1 - overlap / (2 - overlap).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    sigma = math.sqrt(k / dim)
    return analytics_for_sigma(sigma)


def analytics_for_sigma(sigma: float) -> FilterAnalytics:
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    overlap = 2.0 * normal_cdf(-1.0 / (2.0 * sigma))
    rho = 1.0 - overlap / (2.0 - overlap)
    return FilterAnalytics(
        sigma=sigma,
        overlap=overlap,
        fp_rate=overlap / 2.0,
        fn_rate=overlap / 2.0,
        tp_rate=1.0 - overlap,
        tn_rate=1.0 - overlap,
        precision_recall=rho,
    )


def cosine_int(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of two integer vectors, exact where it matters.

    Dot and squared norms are computed in arbitrary-precision Python ints;
    a Cauchy-Schwarz equality check pins exactly parallel vectors to +-1.0
    so self-similarity is 1.0 with no rounding.  Raises on a zero vector.
    """
    from .errors import EmptyContextError

    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shapes differ: {a.shape} vs {b.shape}")
    ab = int(a.astype(object) @ b.astype(object))
    aa = int(a.astype(object) @ a.astype(object))
    bb = int(b.astype(object) @ b.astype(object))
    if aa == 0 or bb == 0:
        raise EmptyContextError("cosine undefined for a zero vector")
    if ab * ab == aa * bb:
        return 1.0 if ab > 0 else -1.0
    return ab / math.sqrt(aa * bb)
