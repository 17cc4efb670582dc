"""Simulation engines behind the membership-sim and rho-curve commands.

Scores are computed through pairwise integer dots: the bundle score of a
query is the sum of its dots with each bundled vector divided by d, which
equals the componentwise definition exactly (integer linearity, asserted
against brute force in the tests).  That turns a k-vector bundle probe
into k popcounts and makes the full curves cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    DEFAULT_SEED,
    analytics_for_sigma,
    dot_int_rows,
    generate_packed,
)


@dataclass(frozen=True)
class MembershipSimConfig:
    """One membership-distribution run: fresh size-k bundles, one member and
    one non-member probe per trial."""

    dim: int = 10_000
    k: int = 1000
    trials: int = 1000
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")


@dataclass(frozen=True)
class MembershipSimResult:
    config: MembershipSimConfig
    member_scores: np.ndarray
    nonmember_scores: np.ndarray

    @property
    def member_mean(self) -> float:
        return float(self.member_scores.mean())

    @property
    def member_std(self) -> float:
        return float(self.member_scores.std(ddof=1))

    @property
    def nonmember_mean(self) -> float:
        return float(self.nonmember_scores.mean())

    @property
    def nonmember_std(self) -> float:
        return float(self.nonmember_scores.std(ddof=1))


def membership_sim(config: MembershipSimConfig) -> MembershipSimResult:
    """Member and non-member score samples over fresh bundles.

    Trial t uses vector indices [t*(k+1), (t+1)*(k+1)): the first k form
    the bundle, the member probe is the first of them, the non-member
    probe is the extra one.
    """
    dim, k = config.dim, config.k
    member = np.empty(config.trials)
    outsider = np.empty(config.trials)
    base = 0
    for t in range(config.trials):
        rows = generate_packed(dim, config.seed, np.arange(base, base + k + 1))
        base += k + 1
        member[t] = int(dot_int_rows(rows[:k], rows[0], dim).sum()) / dim
        outsider[t] = int(dot_int_rows(rows[:k], rows[k], dim).sum()) / dim
    return MembershipSimResult(config, member, outsider)


@dataclass(frozen=True)
class RhoCurveConfig:
    """Empirical precision/recall sweep over bundle sizes at one dimension."""

    dim: int = 1000
    ks: tuple[int, ...] = ()
    trials: int = 1000
    seed: int = DEFAULT_SEED
    threshold: float = 0.5

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if not self.ks:
            raise ValueError("ks must be non-empty")
        if any(k < 1 for k in self.ks):
            raise ValueError(f"every k must be >= 1, got {self.ks}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        object.__setattr__(self, "ks", tuple(sorted(set(self.ks))))


@dataclass(frozen=True)
class RhoCurvePoint:
    k: int
    sigma: float
    rho_analytic: float
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def precision_emp(self) -> float | None:
        return self.tp / (self.tp + self.fp) if (self.tp + self.fp) else None

    @property
    def recall_emp(self) -> float | None:
        return self.tp / (self.tp + self.fn) if (self.tp + self.fn) else None


def rho_curve(config: RhoCurveConfig, batch: int = 64) -> list[RhoCurvePoint]:
    """Confusion counts per bundle size from shared prefix streams.

    Each trial draws one stream of max(ks) fresh vectors plus one outside
    probe; the size-k bundle is the stream's first k vectors, so prefix
    sums of pairwise dots give every k at once.  The member probe is the
    stream's first vector, which belongs to every prefix.  Marginal score
    distributions per k are exactly those of independent fresh bundles;
    only the coupling across k within a trial is shared.
    """
    dim, ks, thr = config.dim, config.ks, config.threshold
    kmax = ks[-1]
    k_idx = np.array(ks) - 1  # cumsum position of each requested k
    tp = np.zeros(len(ks), dtype=np.int64)
    fp = np.zeros(len(ks), dtype=np.int64)
    fn = np.zeros(len(ks), dtype=np.int64)
    tn = np.zeros(len(ks), dtype=np.int64)

    base = 0
    done = 0
    per_trial = kmax + 1
    while done < config.trials:
        b = min(batch, config.trials - done)
        idx = np.arange(base, base + b * per_trial)
        base += b * per_trial
        rows = generate_packed(dim, config.seed, idx).reshape(b, per_trial, -1)
        stream = rows[:, :kmax, :]
        member_q = rows[:, :1, :]
        outside_q = rows[:, kmax:, :]
        dm = dim - 2 * np.bitwise_count(stream ^ member_q).sum(axis=-1, dtype=np.int64)
        dn = dim - 2 * np.bitwise_count(stream ^ outside_q).sum(axis=-1, dtype=np.int64)
        member_scores = dm.cumsum(axis=1)[:, k_idx] / dim
        outside_scores = dn.cumsum(axis=1)[:, k_idx] / dim
        tp += (member_scores > thr).sum(axis=0)
        fn += (member_scores <= thr).sum(axis=0)
        fp += (outside_scores > thr).sum(axis=0)
        tn += (outside_scores <= thr).sum(axis=0)
        done += b

    points = []
    for i, k in enumerate(ks):
        fa = analytics_for_sigma(np.sqrt(k / dim))
        points.append(
            RhoCurvePoint(
                k=k,
                sigma=float(np.sqrt(k / dim)),
                rho_analytic=fa.precision_recall,
                tp=int(tp[i]),
                fp=int(fp[i]),
                fn=int(fn[i]),
                tn=int(tn[i]),
            )
        )
    return points
