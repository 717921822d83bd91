"""Traffic sampling, load calculation and load-to-spectrum mapping.

Scalar functions take any object with a ``random(size)`` method (a numpy
``Generator`` or a :class:`~specsim.streams.CounterStream`). The ``*_batch``
variants evaluate many windows at once from counter-based uniforms and return
exactly what the scalar functions return for the matching streams.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .model import CLASS_LABELS, DemandVector, LoadReport, MnoProfile, ServiceClass, Si1TrafficModel, ValidationError
from .streams import counter_uniform

# guards floor(u * alpha) against products like 100 * 0.29 = 28.999999999999996
_FLOOR_SLACK = 1e-9


def check_eta(eta: float) -> float:
    eta = float(eta)
    if not (math.isfinite(eta) and eta > 0):
        raise ValidationError(f"spectral efficiency must be > 0 bps/Hz, got {eta}")
    return eta


def active_users(users, activity: float):
    return np.floor(np.asarray(users, dtype=float) * activity + _FLOOR_SLACK).astype(np.int64)


def draw_users(profile: MnoProfile, uniform) -> np.ndarray:
    """Map a uniform variate to a user count in 1..user_max."""
    u = np.floor(np.asarray(uniform) * profile.user_max).astype(np.int64) + 1
    return np.minimum(u, profile.user_max)


def _class_index(pattern: Sequence[float], uniforms: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(pattern)
    idx = np.searchsorted(cdf, uniforms, side="right")
    # cdf[-1] can land a hair under 1; fall back to the last class in use
    last = max(i for i, p in enumerate(pattern) if p > 0)
    return np.minimum(idx, last)


def sample_si1_load(model: Si1TrafficModel, rng) -> LoadReport:
    u = rng.random()
    extra = model.uniform_low_mbps + (model.uniform_high_mbps - model.uniform_low_mbps) * u
    return LoadReport("SI-I", model.fixed_mbps + extra)


def si1_load_batch(model: Si1TrafficModel, uniforms: np.ndarray) -> np.ndarray:
    extra = model.uniform_low_mbps + (model.uniform_high_mbps - model.uniform_low_mbps) * uniforms
    return model.fixed_mbps + extra


def mno_class_load(profile: MnoProfile, service: ServiceClass, users: float | None = None,
                   share: float | None = None) -> float:
    """Load one service class puts on one MNO, in Mbps.

    ``share`` is the usage-pattern entry for the class; pass it explicitly when
    the class is not one of the profile's six positional classes.
    """
    if users is None:
        users = expected_users(profile)
    if share is None:
        share = profile.usage_pattern[_label_index(service)]
    return (users * profile.activity_factor) * share * service.rate_mbps


def _label_index(service: ServiceClass) -> int:
    return CLASS_LABELS.index(service.label)


def expected_users(profile: MnoProfile) -> float:
    if profile.is_range:
        return (1 + profile.user_max) / 2
    return float(profile.user_count)


def mno_load(profile: MnoProfile, classes: Sequence[ServiceClass], users: float | None = None,
             entity_id: str = "MNO") -> LoadReport:
    """Closed-form priority-weighted load of an MNO."""
    if len(classes) != len(profile.usage_pattern):
        raise ValidationError(
            f"{len(classes)} service classes for a {len(profile.usage_pattern)}-entry usage pattern")
    parts = tuple(c.weight * mno_class_load(profile, c, users, share)
                  for c, share in zip(classes, profile.usage_pattern))
    return LoadReport(entity_id, sum(parts), parts)


def _weighted_rates(classes: Sequence[ServiceClass]) -> np.ndarray:
    return np.array([c.weight * c.rate_mbps for c in classes])


def sample_mno_load(profile: MnoProfile, classes: Sequence[ServiceClass], rng,
                    entity_id: str = "MNO") -> LoadReport:
    """Per-user sampled load: each active user picks a class from the usage pattern."""
    if len(classes) != len(profile.usage_pattern):
        raise ValidationError(
            f"{len(classes)} service classes for a {len(profile.usage_pattern)}-entry usage pattern")
    users = int(draw_users(profile, rng.random())) if profile.is_range else profile.user_count
    n_active = int(active_users(users, profile.activity_factor))
    counts = np.bincount(_class_index(profile.usage_pattern, rng.random(n_active)),
                         minlength=len(classes))
    parts = tuple(float(x) for x in _weighted_rates(classes) * counts)
    return LoadReport(entity_id, sum(parts), parts)


def mno_load_batch(profile: MnoProfile, classes: Sequence[ServiceClass], seed: int,
                   windows: np.ndarray, entity: int, stochastic: bool = True) -> np.ndarray:
    """Loads of one MNO over many windows, stream-identical to the scalar samplers."""
    windows = np.asarray(windows, dtype=np.int64)
    if profile.is_range:
        users = draw_users(profile, counter_uniform(seed, windows, entity, 0))
        first_class_draw = 1
    else:
        users = np.full(windows.shape, profile.user_count, dtype=np.int64)
        first_class_draw = 0
    wrates = _weighted_rates(classes)
    if not stochastic:
        # same operation order as mno_load
        parts = np.stack([
            classes[s].weight * ((users * profile.activity_factor) * profile.usage_pattern[s]
                                 * classes[s].rate_mbps)
            for s in range(len(classes))], axis=1)
        return _ordered_sum(parts)
    n_active = active_users(users, profile.activity_factor)
    width = int(n_active.max()) if n_active.size else 0
    counts = np.zeros((windows.size, len(classes)), dtype=np.int64)
    if width:
        draws = first_class_draw + np.arange(width, dtype=np.int64)
        u = counter_uniform(seed, windows[:, None], entity, draws[None, :])
        idx = _class_index(profile.usage_pattern, u)
        live = np.arange(width)[None, :] < n_active[:, None]
        for s in range(len(classes)):
            counts[:, s] = np.count_nonzero(live & (idx == s), axis=1)
    return _ordered_sum(wrates[None, :] * counts)


def _ordered_sum(parts: np.ndarray) -> np.ndarray:
    # left-to-right, matching the builtin sum() used by the scalar path
    total = np.zeros(parts.shape[0])
    for s in range(parts.shape[1]):
        total = total + parts[:, s]
    return total


def map_load_to_spectrum(load: LoadReport | float, eta: float) -> float:
    mbps = load.load_mbps if isinstance(load, LoadReport) else float(load)
    if mbps < 0:
        raise ValidationError(f"load must be >= 0, got {mbps}")
    return mbps / check_eta(eta)


def aggregate_si2_demand(reports: Sequence[LoadReport], eta: float) -> tuple[DemandVector, float]:
    per_mno = DemandVector(tuple(map_load_to_spectrum(r, eta) for r in reports))
    return per_mno, sum(per_mno.demands_mhz)
