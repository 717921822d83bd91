"""Domain types shared by demand estimation, allocation policies and the engine.

All bandwidths are MHz, all loads Mbps. Types validate on construction and are
frozen afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

EPS_MHZ = 1e-9

CLASS_LABELS = ("VL", "L", "M", "MH", "H", "S")
CASE_LABELS = ("C-I", "C-II", "C-III", "FR", "CS", "CS-degenerate")


class SpecSimError(ValueError):
    """Base class for every error raised by this package."""


class ValidationError(SpecSimError):
    pass


class NonPositivePriority(ValidationError):
    pass


class NonPositiveShare(ValidationError):
    pass


class EmptyShares(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class EntityCountMismatch(SpecSimError):
    pass


class NegativePool(SpecSimError):
    pass


def _finite(x: float, name: str) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValidationError(f"{name} must be finite, got {x!r}")
    return x


@dataclass(frozen=True)
class SpectrumPool:
    total_mhz: float
    reserved_mhz: float = 0.0

    def __post_init__(self):
        total = _finite(self.total_mhz, "total_mhz")
        reserved = _finite(self.reserved_mhz, "reserved_mhz")
        if total <= 0:
            raise ValidationError(f"total_mhz must be > 0, got {total}")
        if reserved < 0:
            raise ValidationError(f"reserved_mhz must be >= 0, got {reserved}")
        if reserved > total:
            raise ValidationError(f"reserved exceeds total: {reserved} > {total} MHz")
        object.__setattr__(self, "total_mhz", total)
        object.__setattr__(self, "reserved_mhz", reserved)

    @property
    def reserved_fraction(self) -> float:
        return self.reserved_mhz / self.total_mhz


@dataclass(frozen=True)
class ShareProfile:
    """Principal shares and priority parameters for a set of entities.

    Shares may be absolute MHz or bare weights; normalization makes the two
    conventions agree.
    """

    principal_shares: tuple[float, ...]
    priorities: tuple[float, ...] = ()

    def __post_init__(self):
        shares = tuple(_finite(x, "principal share") for x in self.principal_shares)
        if not shares:
            raise EmptyShares("principal_shares is empty")
        if any(x < 0 for x in shares):
            raise NonPositiveShare(f"principal shares must be >= 0, got {shares}")
        if sum(shares) <= 0:
            raise NonPositiveShare("sum of principal shares must be > 0")
        prios = tuple(_finite(x, "priority") for x in self.priorities) or (1.0,) * len(shares)
        if len(prios) != len(shares):
            raise LengthMismatch(
                f"{len(shares)} principal shares but {len(prios)} priorities")
        if any(x <= 0 for x in prios):
            raise NonPositivePriority(f"priorities must be > 0, got {prios}")
        object.__setattr__(self, "principal_shares", shares)
        object.__setattr__(self, "priorities", prios)

    def __len__(self):
        return len(self.principal_shares)

    @classmethod
    def equal(cls, n: int) -> ShareProfile:
        return cls((1.0,) * n, (1.0,) * n)


@dataclass(frozen=True)
class ValidatedProfile:
    profile: ShareProfile
    pool: SpectrumPool
    norm_shares: tuple[float, ...]
    norm_priorities: tuple[float, ...]

    def guaranteed_mhz(self, total_mhz: float | None = None) -> tuple[float, ...]:
        """Principal share of each entity in MHz."""
        total = self.pool.total_mhz if total_mhz is None else total_mhz
        return tuple(x * total for x in self.norm_shares)


def normalize_shares(shares: Sequence[float], reserved_fraction: float = 0.0) -> tuple[float, ...]:
    """Scale shares so they fill the non-reserved part of the pool.

    Equals xi / (sum(xi) + reserved) whenever the shares are MHz amounts that
    together with the reserve exhaust the pool.
    """
    ssum = math.fsum(shares)
    keep = 1.0 - reserved_fraction
    return tuple(x / ssum * keep for x in shares)


def normalize_priorities(priorities: Sequence[float]) -> tuple[float, ...]:
    psum = math.fsum(priorities)
    return tuple(p / psum for p in priorities)


def validate_profile(profile: ShareProfile, pool: SpectrumPool, n_entities: int) -> ValidatedProfile:
    if len(profile) != n_entities:
        raise LengthMismatch(f"profile has {len(profile)} entities, expected {n_entities}")
    return ValidatedProfile(
        profile=profile,
        pool=pool,
        norm_shares=normalize_shares(profile.principal_shares, pool.reserved_fraction),
        norm_priorities=normalize_priorities(profile.priorities),
    )


@dataclass(frozen=True)
class ServiceClass:
    label: str
    rate_mbps: float
    weight: float = 1.0

    def __post_init__(self):
        if self.label not in CLASS_LABELS:
            raise ValidationError(f"unknown service class label {self.label!r}")
        if not _finite(self.rate_mbps, "rate_mbps") > 0:
            raise ValidationError(f"rate_mbps must be > 0 for class {self.label}")
        if not _finite(self.weight, "weight") > 0:
            raise ValidationError(f"weight must be > 0 for class {self.label}")


# Per-user application rates, Kbps in the source table.
PAPER_RATES_MBPS = (5.0, 20.0, 30.0, 300.0, 600.0, 940.0)
# Non-paper profile: same shape scaled down 30-fold so that a few dozen users
# per MNO load a 30 MHz pool to the point of contention, not far beyond it.
DESK_RATE_SCALE = 30.0
DESK_RATES_MBPS = tuple(r / DESK_RATE_SCALE for r in PAPER_RATES_MBPS)
DESK_ACTIVITY = 0.1


def make_classes(rates_mbps: Sequence[float] = DESK_RATES_MBPS,
                 weights: Sequence[float] | None = None) -> tuple[ServiceClass, ...]:
    if len(rates_mbps) != len(CLASS_LABELS):
        raise LengthMismatch(f"need {len(CLASS_LABELS)} class rates, got {len(rates_mbps)}")
    weights = weights if weights is not None else (1.0,) * len(CLASS_LABELS)
    if len(weights) != len(CLASS_LABELS):
        raise LengthMismatch(f"need {len(CLASS_LABELS)} class weights, got {len(weights)}")
    classes = tuple(ServiceClass(lab, r, w) for lab, r, w in zip(CLASS_LABELS, rates_mbps, weights))
    rates = [c.rate_mbps for c in classes]
    if any(b <= a for a, b in zip(rates, rates[1:])):
        raise ValidationError("class rates must be strictly increasing VL < L < ... < S")
    return classes


@dataclass(frozen=True)
class MnoProfile:
    """Traffic description of one MNO.

    ``user_count`` is either a fixed integer or ``user_max`` is set and the
    count is redrawn uniformly from ``1..user_max`` every window.
    """

    user_count: int = 0
    activity_factor: float = DESK_ACTIVITY
    usage_pattern: tuple[float, ...] = (1 / 6,) * 6
    user_max: int | None = None

    def __post_init__(self):
        if int(self.user_count) != self.user_count or self.user_count < 0:
            raise ValidationError(f"user_count must be a non-negative integer, got {self.user_count}")
        object.__setattr__(self, "user_count", int(self.user_count))
        if self.user_max is not None:
            if int(self.user_max) != self.user_max or self.user_max < 1:
                raise ValidationError(f"user_max must be an integer >= 1, got {self.user_max}")
            object.__setattr__(self, "user_max", int(self.user_max))
        a = _finite(self.activity_factor, "activity_factor")
        if not 0 <= a <= 1:
            raise ValidationError(f"activity_factor must lie in [0, 1], got {a}")
        pattern = tuple(_finite(x, "usage_pattern entry") for x in self.usage_pattern)
        if any(x < 0 for x in pattern):
            raise ValidationError("usage_pattern entries must be >= 0")
        if abs(math.fsum(pattern) - 1.0) > 1e-12:
            raise ValidationError(f"usage_pattern must sum to 1, sums to {math.fsum(pattern)!r}")
        object.__setattr__(self, "activity_factor", a)
        object.__setattr__(self, "usage_pattern", pattern)

    @property
    def is_range(self) -> bool:
        return self.user_max is not None


@dataclass(frozen=True)
class Si1TrafficModel:
    fixed_mbps: float = 5.0
    uniform_low_mbps: float = 1.0
    uniform_high_mbps: float = 20.0

    def __post_init__(self):
        f = _finite(self.fixed_mbps, "fixed_mbps")
        lo = _finite(self.uniform_low_mbps, "uniform_low_mbps")
        hi = _finite(self.uniform_high_mbps, "uniform_high_mbps")
        if f < 0:
            raise ValidationError("fixed_mbps must be >= 0")
        if not 0 <= lo <= hi:
            raise ValidationError(f"need 0 <= uniform_low_mbps <= uniform_high_mbps, got [{lo}, {hi}]")


@dataclass(frozen=True)
class DemandVector:
    demands_mhz: tuple[float, ...]

    def __post_init__(self):
        d = tuple(_finite(x, "demand") for x in self.demands_mhz)
        if any(x < 0 for x in d):
            raise ValidationError(f"demands must be >= 0, got {d}")
        object.__setattr__(self, "demands_mhz", d)

    def __len__(self):
        return len(self.demands_mhz)

    @property
    def total(self) -> float:
        return math.fsum(self.demands_mhz)


@dataclass(frozen=True)
class AllocationResult:
    grants_mhz: tuple[float, ...]
    fractions: tuple[float, ...]
    case_label: str

    @classmethod
    def from_grants(cls, grants: Sequence[float], total_mhz: float, label: str) -> AllocationResult:
        grants = tuple(float(g) for g in grants)
        fractions = tuple(g / total_mhz for g in grants) if total_mhz > 0 else (0.0,) * len(grants)
        return cls(grants, fractions, label)

    def __post_init__(self):
        if self.case_label not in CASE_LABELS:
            raise ValidationError(f"unknown case label {self.case_label!r}")
        if any(g < -EPS_MHZ for g in self.grants_mhz):
            raise ValidationError(f"negative grant in {self.grants_mhz}")


@dataclass(frozen=True)
class LoadReport:
    entity_id: str
    load_mbps: float
    # priority-weighted per-class loads, one per service class
    per_class_mbps: tuple[float, ...] | None = None

    def __post_init__(self):
        load = _finite(self.load_mbps, "load_mbps")
        if load < 0:
            raise ValidationError(f"load_mbps must be >= 0, got {load}")
        if self.per_class_mbps is not None:
            parts = tuple(float(x) for x in self.per_class_mbps)
            if abs(math.fsum(parts) - load) > EPS_MHZ * max(1.0, load):
                raise ValidationError("load_mbps does not match its per-class breakdown")
            object.__setattr__(self, "per_class_mbps", parts)
        object.__setattr__(self, "load_mbps", load)
