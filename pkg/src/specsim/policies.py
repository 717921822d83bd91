"""Spectrum coordination policies: FR, CS and PR (inter- and intra-slice).

The public functions take domain types. Each delegates to a float-level core
(``*_core``) that the simulation engine calls directly, because the intra-slice
pool (whatever SI-II was granted) may legitimately be 0 MHz.

PR surplus transfer uses the amount the light entities leave unused,
sum(guarantee_j - demand_j) over light j, so that grants add up to the pool.
"""

from __future__ import annotations

import math
from typing import Sequence

from .model import (
    EPS_MHZ,
    AllocationResult,
    DemandVector,
    EntityCountMismatch,
    NegativePool,
    ShareProfile,
    SpectrumPool,
    ValidationError,
    normalize_priorities,
    normalize_shares,
    validate_profile,
)

C_I, C_II, C_III = "C-I", "C-II", "C-III"


def classify_core(demands: Sequence[float], guarantees: Sequence[float]) -> str:
    excess = [d - g for d, g in zip(demands, guarantees)]
    if all(e <= 0 for e in excess) or sum(excess) <= 0:
        return C_I
    if all(e > 0 for e in excess):
        return C_II
    return C_III


def classify_case(demands: DemandVector, profile: ShareProfile, pool: SpectrumPool) -> str:
    vp = validate_profile(profile, pool, len(demands))
    return classify_core(demands.demands_mhz, vp.guaranteed_mhz())


def allocate_fr(demands: DemandVector, psi: Sequence[float], pool: SpectrumPool) -> AllocationResult:
    """Static split of the pool; demands are ignored."""
    psi = check_fr_shares(psi)
    if len(psi) != len(demands):
        raise EntityCountMismatch(f"{len(psi)} FR shares for {len(demands)} entities")
    return AllocationResult.from_grants(fr_core(psi, pool.total_mhz), pool.total_mhz, "FR")


def check_fr_shares(psi: Sequence[float]) -> tuple[float, ...]:
    psi = tuple(float(x) for x in psi)
    if not psi or any(not (x > 0) for x in psi):
        raise ValidationError(f"FR shares must all be > 0, got {psi}")
    if abs(math.fsum(psi) - 1.0) > 1e-12:
        raise ValidationError(f"FR shares must sum to 1, sum to {math.fsum(psi)!r}")
    return psi


def fr_core(psi: Sequence[float], total: float) -> list[float]:
    return [p * total for p in psi]


def allocate_cs(demands: DemandVector, pool: SpectrumPool) -> AllocationResult:
    grants, label = cs_core(demands.demands_mhz, pool.total_mhz)
    return AllocationResult.from_grants(grants, pool.total_mhz, label)


def cs_core(demands: Sequence[float], total: float) -> tuple[list[float], str]:
    dsum = sum(demands)
    if dsum <= 0:
        return [total / len(demands)] * len(demands), "CS-degenerate"
    return [d / dsum * total for d in demands], "CS"


def allocate_pr_inter(demands: DemandVector, profile: ShareProfile, pool: SpectrumPool) -> AllocationResult:
    """Two-slice PR mode: guaranteed principal shares plus surplus and reserve transfer."""
    if len(demands) != 2 or len(profile) != 2:
        raise EntityCountMismatch(
            f"inter-slice PR needs exactly 2 entities, got {len(demands)} demands "
            f"and {len(profile)} shares")
    vp = validate_profile(profile, pool, 2)
    grants, label = pr_inter_core(demands.demands_mhz, vp.guaranteed_mhz(),
                                  vp.norm_priorities, pool.reserved_mhz)
    return AllocationResult.from_grants(grants, pool.total_mhz, label)


def pr_inter_core(demands, guarantees, norm_priorities, reserved) -> tuple[list[float], str]:
    d = list(demands)
    g = list(guarantees)
    excess = [d[0] - g[0], d[1] - g[1]]
    total_excess = excess[0] + excess[1]
    if (excess[0] <= 0 and excess[1] <= 0) or total_excess <= 0:
        return d, C_I
    if excess[0] > 0 and excess[1] > 0:
        if reserved == 0:
            return g, C_II
        if total_excess <= reserved:
            return d, C_II
        return [g[0] + reserved * norm_priorities[0], g[1] + reserved * norm_priorities[1]], C_II
    if reserved > 0 and total_excess <= reserved:
        return d, C_III
    light, heavy = (0, 1) if excess[0] <= 0 else (1, 0)
    pot = g[light] - d[light]
    if reserved > 0:
        pot = pot + reserved
    grants = [0.0, 0.0]
    grants[light] = d[light]
    grants[heavy] = g[heavy] + pot
    return grants, C_III


def allocate_pr_intra(demands: DemandVector, profile: ShareProfile, pool: SpectrumPool,
                      caps: Sequence[float | None] | None = None) -> AllocationResult:
    """N-operator PR mode inside one slice; ``pool`` is that slice's grant."""
    if len(profile) != len(demands):
        raise EntityCountMismatch(f"{len(profile)} shares for {len(demands)} operators")
    vp = validate_profile(profile, pool, len(demands))
    grants, label = pr_intra_core(demands.demands_mhz, vp.norm_shares, vp.norm_priorities,
                                  pool.total_mhz, pool.reserved_mhz, caps)
    return AllocationResult.from_grants(grants, pool.total_mhz, label)


def pr_intra_core(demands, norm_shares, norm_priorities, total, reserved=0.0,
                  caps=None) -> tuple[list[float], str]:
    if total < 0 or reserved < 0:
        raise NegativePool(f"pool must be >= 0 MHz, got total={total}, reserved={reserved}")
    n = len(demands)
    if n == 0 or len(norm_shares) != n or len(norm_priorities) != n:
        raise EntityCountMismatch(
            f"{n} demands, {len(norm_shares)} shares, {len(norm_priorities)} priorities")
    d = list(demands)
    if n == 1:
        grants = [min(d[0], total)]
        label = C_I if d[0] <= norm_shares[0] * total else C_II
        return _apply_caps(grants, caps), label
    g = [x * total for x in norm_shares]
    excess = [d[i] - g[i] for i in range(n)]
    total_excess = sum(excess)
    label = classify_core(d, g)
    if label == C_I:
        grants = d
    elif reserved > 0 and total_excess <= reserved:
        grants = d
    elif label == C_II:
        grants = g if reserved == 0 else [g[i] + reserved * norm_priorities[i] for i in range(n)]
    else:
        light = [i for i in range(n) if excess[i] <= 0]
        heavy = [i for i in range(n) if excess[i] > 0]
        pot = sum(g[j] - d[j] for j in light)
        if reserved > 0:
            pot = pot + reserved
        extra = water_fill(pot, [norm_priorities[i] for i in heavy], [excess[i] for i in heavy])
        grants = list(d)
        for i, x in zip(heavy, extra):
            grants[i] = g[i] + x
    return _apply_caps(grants, caps), label


def water_fill(pot: float, weights: Sequence[float], needs: Sequence[float]) -> list[float]:
    """Split ``pot`` proportionally to ``weights``, never giving anyone more than its need.

    Whatever a saturated receiver cannot absorb is re-split over the rest.
    """
    out = [0.0] * len(weights)
    open_ = list(range(len(weights)))
    left = pot
    while open_ and left > 0:
        wsum = sum(weights[i] for i in open_)
        share = {i: left * (weights[i] / wsum) for i in open_}
        full = [i for i in open_ if share[i] >= needs[i]]
        if not full:
            for i in open_:
                out[i] = share[i]
            break
        for i in full:
            out[i] = needs[i]
            left -= needs[i]
        open_ = [i for i in open_ if i not in full]
    return out


def _apply_caps(grants: list[float], caps) -> list[float]:
    if caps is None:
        return grants
    if len(caps) != len(grants):
        raise EntityCountMismatch(f"{len(caps)} caps for {len(grants)} operators")
    return [g if c is None else min(g, c) for g, c in zip(grants, caps)]


def guaranteed_minimum_ok(demands, grants, guarantees) -> bool:
    return all(gr >= min(d, g) - EPS_MHZ for d, gr, g in zip(demands, grants, guarantees))


__all__ = [
    "allocate_cs", "allocate_fr", "allocate_pr_inter", "allocate_pr_intra",
    "classify_case", "classify_core", "cs_core", "fr_core", "pr_inter_core",
    "pr_intra_core", "water_fill", "normalize_priorities", "normalize_shares",
]
