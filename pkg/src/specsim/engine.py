"""Per-window pipeline: traffic sampling, demand mapping, inter-slice then
intra-slice allocation, one record per slice and per MNO.

``run_window`` walks a single window through the scalar functions.
``run_experiment`` and ``run_sweep`` evaluate all windows of a run at once
with the vectorized twins; both draw from the same counter-based streams, so
they agree on every record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import pandas as pd

from . import batch, demand, policies
from .model import (
    CASE_LABELS,
    DemandVector,
    MnoProfile,
    ServiceClass,
    ShareProfile,
    Si1TrafficModel,
    SpecSimError,
    SpectrumPool,
    ValidationError,
    make_classes,
    normalize_priorities,
    normalize_shares,
)
from .streams import WindowStreams, counter_uniform

POLICY_KINDS = ("FR", "PR", "CS")
RECORD_COLUMNS = ["run_id", "seed", "policy", "level", "entity", "axis_name", "axis_value",
                  "window", "demand_mhz", "grant_mhz", "deviation_mhz", "case_label"]
SWEEP_AXES = ("mno_user_count", "si1_uniform_low", "si1_principal_share", "policy_kind",
              "theta", "n_mno")
SI_ENTITIES = ("SI-I", "SI-II")
# batch case codes index CASE_LABELS; PR codes 0..2 line up with C-I..C-III
_FR, _CS, _CS_DEGENERATE = (CASE_LABELS.index(x) for x in ("FR", "CS", "CS-degenerate"))


class UnknownAxis(SpecSimError):
    pass


@dataclass(frozen=True)
class PolicySpec:
    kind: str
    profile: ShareProfile
    fr_shares: tuple[float, ...] | None = None

    def __post_init__(self):
        kind = str(self.kind).upper()
        if kind not in POLICY_KINDS:
            raise ValidationError(f"policy kind must be one of {POLICY_KINDS}, got {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.fr_shares is not None:
            object.__setattr__(self, "fr_shares", policies.check_fr_shares(self.fr_shares))
            if len(self.fr_shares) != len(self.profile):
                raise ValidationError(
                    f"{len(self.fr_shares)} FR shares for {len(self.profile)} entities")

    @property
    def psi(self) -> tuple[float, ...]:
        """FR split; defaults to the principal shares rescaled to sum to 1."""
        if self.fr_shares is not None:
            return self.fr_shares
        return normalize_shares(self.profile.principal_shares)

    def with_kind(self, kind: str) -> PolicySpec:
        return replace(self, kind=kind)


@dataclass(frozen=True)
class ScenarioConfig:
    pool: SpectrumPool = field(default_factory=lambda: SpectrumPool(30.0))
    si1: Si1TrafficModel = field(default_factory=Si1TrafficModel)
    si1_eta: float = 1.0
    si2_eta: float = 1.0
    mnos: tuple[MnoProfile, ...] = (MnoProfile(30), MnoProfile(30), MnoProfile(30))
    classes: tuple[ServiceClass, ...] = field(default_factory=make_classes)
    inter: PolicySpec = field(default_factory=lambda: PolicySpec("PR", ShareProfile((0.5, 0.5))))
    intra: PolicySpec = field(default_factory=lambda: PolicySpec("PR", ShareProfile.equal(3)))
    intra_reserved_mhz: float = 0.0
    intra_caps: tuple[float | None, ...] | None = None
    stochastic_load: bool = True
    windows: int = 1000
    seed: int = 0
    first_window: int = 0
    run_id: str = "run"

    def __post_init__(self):
        demand.check_eta(self.si1_eta)
        demand.check_eta(self.si2_eta)
        if int(self.windows) != self.windows or self.windows < 1:
            raise ValidationError(f"windows must be an integer >= 1, got {self.windows}")
        if self.first_window < 0:
            raise ValidationError("first_window must be >= 0")
        if not self.mnos:
            raise ValidationError("at least one MNO is required")
        if len(self.inter.profile) != 2:
            raise ValidationError("the inter-slice profile needs exactly 2 entries (SI-I, SI-II)")
        if len(self.intra.profile) != len(self.mnos):
            raise ValidationError(
                f"intra-slice profile has {len(self.intra.profile)} entries for {len(self.mnos)} MNOs")
        if self.intra_reserved_mhz < 0:
            raise ValidationError("intra_reserved_mhz must be >= 0")
        if self.intra_caps is not None:
            if len(self.intra_caps) != len(self.mnos):
                raise ValidationError(f"{len(self.intra_caps)} caps for {len(self.mnos)} MNOs")
            if any(c is not None and c < 0 for c in self.intra_caps):
                raise ValidationError("caps must be >= 0")
        if len(self.classes) != len(self.mnos[0].usage_pattern):
            raise ValidationError("usage patterns and service classes differ in length")

    @property
    def n_mno(self) -> int:
        return len(self.mnos)

    def entity_names(self) -> list[str]:
        return list(SI_ENTITIES) + [f"MNO-{q + 1}" for q in range(self.n_mno)]


@dataclass(frozen=True)
class WindowRecord:
    window_index: int
    level: str
    entity_id: str
    demand_mhz: float
    grant_mhz: float
    deviation_mhz: float
    case_label: str
    policy: str


# --- scalar path -------------------------------------------------------------

def _intra_pool(config: ScenarioConfig, si2_grant: float) -> tuple[float, float]:
    reserved = min(config.intra_reserved_mhz, si2_grant)
    return si2_grant, reserved


def allocate_window(config: ScenarioConfig, si1_demand: float, mno_demands: Sequence[float]):
    """Both allocation stages for one window of demands."""
    si2_demand = sum(mno_demands)
    inter_d = [si1_demand, si2_demand]
    pool = config.pool
    spec = config.inter
    if spec.kind == "FR":
        inter_g, inter_label = policies.fr_core(spec.psi, pool.total_mhz), "FR"
    elif spec.kind == "CS":
        inter_g, inter_label = policies.cs_core(inter_d, pool.total_mhz)
    else:
        xi = normalize_shares(spec.profile.principal_shares, pool.reserved_fraction)
        inter_g, inter_label = policies.pr_inter_core(
            inter_d, [x * pool.total_mhz for x in xi],
            normalize_priorities(spec.profile.priorities), pool.reserved_mhz)

    total, reserved = _intra_pool(config, inter_g[1])
    spec = config.intra
    if spec.kind == "FR":
        intra_g, intra_label = policies.fr_core(spec.psi, total), "FR"
    elif spec.kind == "CS":
        intra_g, intra_label = policies.cs_core(list(mno_demands), total)
    else:
        frac = reserved / total if total > 0 else 0.0
        intra_g, intra_label = policies.pr_intra_core(
            list(mno_demands), normalize_shares(spec.profile.principal_shares, frac),
            normalize_priorities(spec.profile.priorities), total, reserved, config.intra_caps)
    return (inter_d, list(inter_g), inter_label), (list(mno_demands), list(intra_g), intra_label)


def run_window(config: ScenarioConfig, window_index: int,
               streams: WindowStreams | None = None) -> list[WindowRecord]:
    streams = streams or WindowStreams(config.seed, window_index)
    si1 = demand.map_load_to_spectrum(demand.sample_si1_load(config.si1, streams.entity(0)),
                                      config.si1_eta)
    reports = []
    for q, mno in enumerate(config.mnos):
        stream = streams.entity(q + 1)
        if config.stochastic_load:
            reports.append(demand.sample_mno_load(mno, config.classes, stream, f"MNO-{q + 1}"))
        else:
            users = int(demand.draw_users(mno, stream.random())) if mno.is_range else mno.user_count
            reports.append(demand.mno_load(mno, config.classes, users, f"MNO-{q + 1}"))
    per_mno, _ = demand.aggregate_si2_demand(reports, config.si2_eta)
    (id_, ig, il), (md, mg, ml) = allocate_window(config, si1, per_mno.demands_mhz)
    names = config.entity_names()
    out = []
    for name, d, g in zip(names[:2], id_, ig):
        out.append(WindowRecord(window_index, "inter", name, d, g, abs(d - g), il, config.inter.kind))
    for name, d, g in zip(names[2:], md, mg):
        out.append(WindowRecord(window_index, "intra", name, d, g, abs(d - g), ml, config.intra.kind))
    return out


def records_to_frame(records: Sequence[WindowRecord], config: ScenarioConfig,
                     axis_name: str = "", axis_value: str = "") -> pd.DataFrame:
    return pd.DataFrame({
        "run_id": config.run_id,
        "seed": config.seed,
        "policy": [r.policy for r in records],
        "level": [r.level for r in records],
        "entity": [r.entity_id for r in records],
        "axis_name": axis_name,
        "axis_value": axis_value,
        "window": [r.window_index for r in records],
        "demand_mhz": [r.demand_mhz for r in records],
        "grant_mhz": [r.grant_mhz for r in records],
        "deviation_mhz": [r.deviation_mhz for r in records],
        "case_label": [r.case_label for r in records],
    }, columns=RECORD_COLUMNS)


# --- vectorized path ---------------------------------------------------------

@dataclass
class DemandBatch:
    windows: np.ndarray
    si1: np.ndarray
    mno: np.ndarray

    @property
    def si2(self) -> np.ndarray:
        return batch._rowsum(self.mno)


def sample_demands(config: ScenarioConfig, windows: np.ndarray | None = None) -> DemandBatch:
    """Demands of every window; depends on traffic parameters and seed only."""
    if windows is None:
        windows = np.arange(config.first_window, config.first_window + config.windows)
    windows = np.asarray(windows, dtype=np.int64)
    si1_load = demand.si1_load_batch(config.si1, counter_uniform(config.seed, windows, 0, 0))
    mno = np.stack([
        demand.mno_load_batch(m, config.classes, config.seed, windows, q + 1, config.stochastic_load)
        for q, m in enumerate(config.mnos)], axis=1)
    return DemandBatch(windows, si1_load / config.si1_eta, mno / config.si2_eta)


def _inter_batch(config: ScenarioConfig, d: np.ndarray):
    pool, spec = config.pool, config.inter
    w = d.shape[0]
    if spec.kind == "FR":
        return batch.fr_batch(spec.psi, np.full(w, pool.total_mhz)), np.full(w, _FR)
    if spec.kind == "CS":
        g, degenerate = batch.cs_batch(d, pool.total_mhz)
        return g, np.where(degenerate, _CS_DEGENERATE, _CS)
    xi = normalize_shares(spec.profile.principal_shares, pool.reserved_fraction)
    g, codes = batch.pr_batch(d, xi, normalize_priorities(spec.profile.priorities),
                              pool.total_mhz, pool.reserved_mhz)
    return g, codes


def _intra_batch(config: ScenarioConfig, d: np.ndarray, si2_grant: np.ndarray):
    spec = config.intra
    total = si2_grant
    reserved = np.minimum(config.intra_reserved_mhz, total)
    w = d.shape[0]
    if spec.kind == "FR":
        return batch.fr_batch(spec.psi, total), np.full(w, _FR)
    if spec.kind == "CS":
        g, degenerate = batch.cs_batch(d, total)
        return g, np.where(degenerate, _CS_DEGENERATE, _CS)
    frac = np.where(total > 0, reserved / np.where(total > 0, total, 1.0), 0.0)
    base = np.asarray(spec.profile.principal_shares, dtype=float)
    ssum = math.fsum(spec.profile.principal_shares)
    xi = (base / ssum)[None, :] * (1.0 - frac)[:, None]
    g, codes = batch.pr_batch(d, xi, normalize_priorities(spec.profile.priorities), total,
                              reserved, config.intra_caps)
    return g, codes


def allocate_batch(config: ScenarioConfig, demands: DemandBatch, axis_name: str = "",
                   axis_value: str = "") -> pd.DataFrame:
    return _frame([_batch_columns(config, demands, axis_name, axis_value)])


def _frame(parts: list[dict]) -> pd.DataFrame:
    """Assemble column parts into one table.

    Text columns arrive as (labels, codes) pairs and become categoricals;
    building object columns row by row is orders of magnitude slower.
    """
    cols = {}
    for c in RECORD_COLUMNS:
        if isinstance(parts[0][c], tuple):
            cats = sorted({lab for p in parts for lab in p[c][0]})
            pos = {lab: i for i, lab in enumerate(cats)}
            codes = np.concatenate([
                np.array([pos[lab] for lab in p[c][0]], dtype=np.int32)[p[c][1]] for p in parts])
            cols[c] = pd.Categorical.from_codes(codes, cats)
        else:
            cols[c] = np.concatenate([p[c] for p in parts])
    return pd.DataFrame(cols, columns=RECORD_COLUMNS)


def _coded(labels, codes) -> tuple[list[str], np.ndarray]:
    return list(labels), np.asarray(codes, dtype=np.int32)


def _batch_columns(config: ScenarioConfig, demands: DemandBatch, axis_name: str,
                   axis_value: str) -> dict:
    inter_d = np.stack([demands.si1, demands.si2], axis=1)
    inter_g, inter_l = _inter_batch(config, inter_d)
    intra_g, intra_l = _intra_batch(config, demands.mno, inter_g[:, 1])
    n_ent = 2 + config.n_mno
    w = demands.windows.size
    rows = w * n_ent
    dem = np.concatenate([inter_d, demands.mno], axis=1).ravel()
    gra = np.concatenate([inter_g, intra_g], axis=1).ravel()
    case_codes = np.concatenate([np.repeat(inter_l[:, None], 2, axis=1),
                                 np.repeat(intra_l[:, None], config.n_mno, axis=1)], axis=1).ravel()
    kinds = [config.inter.kind, config.intra.kind]
    per_entity = np.array([0, 0] + [1] * config.n_mno)
    zeros = np.zeros(rows, dtype=np.int32)
    return {
        "run_id": _coded([config.run_id], zeros),
        "seed": np.full(rows, config.seed, dtype=np.int64),
        "policy": _coded(kinds, np.tile(per_entity, w)),
        "level": _coded(["inter", "intra"], np.tile(per_entity, w)),
        "entity": _coded(config.entity_names(), np.tile(np.arange(n_ent), w)),
        "axis_name": _coded([axis_name], zeros),
        "axis_value": _coded([axis_value], zeros),
        "window": np.repeat(demands.windows, n_ent),
        "demand_mhz": dem,
        "grant_mhz": gra,
        "deviation_mhz": np.abs(dem - gra),
        "case_label": _coded(CASE_LABELS, case_codes),
    }


def run_experiment(config: ScenarioConfig, axis_name: str = "", axis_value: str = "") -> pd.DataFrame:
    return allocate_batch(config, sample_demands(config), axis_name, axis_value)


# --- sweeps ------------------------------------------------------------------

def format_axis_value(value) -> str:
    if isinstance(value, str):
        return value
    if float(value).is_integer() and not isinstance(value, float):
        return str(int(value))
    return format(float(value), ".9g")


def _resize(values: tuple, n: int) -> tuple:
    return tuple(values[:n]) + (values[0],) * max(0, n - len(values))


def with_axis(config: ScenarioConfig, axis: str, value) -> ScenarioConfig:
    """Copy of ``config`` with one sweep parameter substituted."""
    if axis == "mno_user_count":
        v = int(value)
        mnos = tuple(replace(m, user_max=v) if m.is_range else replace(m, user_count=v)
                     for m in config.mnos)
        return replace(config, mnos=mnos)
    if axis == "si1_uniform_low":
        return replace(config, si1=replace(config.si1, uniform_low_mbps=float(value)))
    if axis == "si1_principal_share":
        v = float(value)
        profile = ShareProfile((v, 1.0 - v), config.inter.profile.priorities)
        return replace(config, inter=replace(config.inter, profile=profile, fr_shares=None))
    if axis == "policy_kind":
        return replace(config, inter=config.inter.with_kind(str(value)))
    if axis == "theta":
        return replace(config, pool=SpectrumPool(config.pool.total_mhz, float(value)))
    if axis == "n_mno":
        n = int(value)
        if n < 1:
            raise ValidationError("n_mno must be >= 1")
        prof = config.intra.profile
        intra = replace(config.intra,
                        profile=ShareProfile(_resize(prof.principal_shares, n),
                                             _resize(prof.priorities, n)),
                        fr_shares=None)
        caps = _resize(config.intra_caps, n) if config.intra_caps is not None else None
        return replace(config, mnos=_resize(config.mnos, n), intra=intra, intra_caps=caps)
    raise UnknownAxis(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")


def run_sweep(base: ScenarioConfig, axis: str, values: Sequence,
              policies_: Sequence[str] | None = None) -> pd.DataFrame:
    """Run one experiment per axis value.

    With ``policies_`` each point's demands are sampled once and handed to
    every listed inter-slice policy; this gives the same records as separate
    runs because demands never depend on the policy.
    """
    if axis not in SWEEP_AXES:
        raise UnknownAxis(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")
    values = list(values)
    if not values:
        raise UnknownAxis(f"sweep over {axis!r} has no values")
    parts = []
    for value in values:
        cfg = with_axis(base, axis, value)
        label = format_axis_value(value)
        demands = sample_demands(cfg)
        for kind in policies_ or [cfg.inter.kind]:
            parts.append(_batch_columns(replace(cfg, inter=cfg.inter.with_kind(kind)), demands,
                                        axis, label))
    return _frame(parts)

