"""Scenario config files and the built-in figure presets.

Config files are INI-style::

    [run]       run_id, seed, windows, first_window, stochastic_load
    [pool]      total_mhz, reserved_mhz
    [si1]       fixed_mbps, uniform_low_mbps, uniform_high_mbps, eta
    [si2]       eta, n_mno, intra_reserved_mhz, intra_caps
    [classes]   rates_mbps, weights            (6 comma-separated values each)
    [mno]       user_count | user_max, activity_factor, usage_pattern
    [mno.N]     same keys, overriding [mno] for MNO N (1-based)
    [policy]    inter, shares, priorities, fr_shares, intra, intra_shares, intra_priorities

Every key is optional. Unknown sections and keys are rejected. The MNO count
is ``[si2] n_mno`` if given, else the highest N among the ``[mno.N]``
sections, else 3.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

from .engine import POLICY_KINDS, SWEEP_AXES, PolicySpec, ScenarioConfig, with_axis
from .model import (
    DESK_ACTIVITY,
    PAPER_RATES_MBPS,
    MnoProfile,
    ShareProfile,
    Si1TrafficModel,
    SpecSimError,
    SpectrumPool,
    ValidationError,
    make_classes,
)


class ParseError(SpecSimError):
    pass


class UnknownPreset(SpecSimError):
    pass


_KEYS = {
    "run": {"run_id", "seed", "windows", "first_window", "stochastic_load"},
    "pool": {"total_mhz", "reserved_mhz"},
    "si1": {"fixed_mbps", "uniform_low_mbps", "uniform_high_mbps", "eta"},
    "si2": {"eta", "n_mno", "intra_reserved_mhz", "intra_caps"},
    "classes": {"rates_mbps", "weights"},
    "mno": {"user_count", "user_max", "activity_factor", "usage_pattern"},
    "policy": {"inter", "shares", "priorities", "fr_shares", "intra", "intra_shares",
               "intra_priorities"},
}
_MNO_SECTION = re.compile(r"^mno\.([1-9][0-9]*)$")


def _line_of(text: str, section: str, key: str | None = None) -> int | None:
    current = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if key is None and current == section:
                return no
        elif key is not None and current == section:
            name = re.split(r"[=:]", line, maxsplit=1)[0].strip().lower()
            if name == key:
                return no
    return None


class _Reader:
    """Typed access to one parsed file, with line context in every error."""

    def __init__(self, text: str, source: str):
        self.text = text
        self.source = source
        self.cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
        try:
            self.cp.read_string(text, source=source)
        except configparser.Error as exc:
            raise ParseError(f"{source}: {exc}") from exc

    def where(self, section: str, key: str | None = None) -> str:
        line = _line_of(self.text, section, key)
        loc = f"{self.source}:{line}" if line else self.source
        return f"{loc} [{section}]" + (f" {key}" if key else "")

    def check_keys(self) -> None:
        for section in self.cp.sections():
            allowed = _KEYS["mno"] if _MNO_SECTION.match(section) else _KEYS.get(section)
            if allowed is None:
                raise ParseError(f"{self.where(section)}: unknown section")
            for key in self.cp[section]:
                if key not in allowed:
                    raise ParseError(f"{self.where(section, key)}: unknown key "
                                     f"(allowed: {', '.join(sorted(allowed))})")

    def get(self, section: str, key: str, conv: Callable[[str], Any], default=None):
        if not self.cp.has_option(section, key):
            return default
        raw = self.cp.get(section, key)
        try:
            return conv(raw)
        except (ValueError, TypeError) as exc:
            raise ParseError(f"{self.where(section, key)}: cannot parse {raw!r}: {exc}") from exc


def _floats(raw: str) -> tuple[float, ...]:
    items = [x.strip() for x in raw.split(",")]
    if not items or any(x == "" for x in items):
        raise ValueError("expected a comma-separated list of numbers")
    return tuple(float(x) for x in items)


def _int(raw: str) -> int:
    return int(raw.strip(), 0)


def _bool(raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true/false")


def _caps(raw: str) -> tuple[float | None, ...]:
    return tuple(None if x.strip().lower() in ("", "none", "inf") else float(x)
                 for x in raw.split(","))


def _kind(raw: str) -> str:
    k = raw.strip().upper()
    if k not in POLICY_KINDS:
        raise ValueError(f"expected one of {', '.join(POLICY_KINDS).lower()}")
    return k


def parse_config_text(text: str, source: str = "<config>") -> ScenarioConfig:
    r = _Reader(text, source)
    r.check_keys()
    try:
        return _build(r)
    except ParseError:
        raise
    except SpecSimError as exc:
        raise ValidationError(f"{source}: {exc}") from exc


def parse_config(path) -> ScenarioConfig:
    """Read and validate a scenario file. Raises ParseError or ValidationError."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from exc
    return parse_config_text(text, str(path))


def _mno_profile(r: _Reader, section: str, base: MnoProfile) -> MnoProfile:
    if not r.cp.has_section(section):
        return base
    kw = {}
    if r.cp.has_option(section, "user_count") and r.cp.has_option(section, "user_max"):
        raise ValidationError(f"{r.where(section)}: give user_count or user_max, not both")
    count = r.get(section, "user_count", _int)
    if count is not None:
        kw.update(user_count=count, user_max=None)
    umax = r.get(section, "user_max", _int)
    if umax is not None:
        kw.update(user_max=umax, user_count=0)
    alpha = r.get(section, "activity_factor", float)
    if alpha is not None:
        kw["activity_factor"] = alpha
    pattern = r.get(section, "usage_pattern", _floats)
    if pattern is not None:
        kw["usage_pattern"] = pattern
    return replace(base, **kw)


def _build(r: _Reader) -> ScenarioConfig:
    d = ScenarioConfig()
    pool = SpectrumPool(r.get("pool", "total_mhz", float, d.pool.total_mhz),
                        r.get("pool", "reserved_mhz", float, 0.0))
    si1 = Si1TrafficModel(r.get("si1", "fixed_mbps", float, d.si1.fixed_mbps),
                          r.get("si1", "uniform_low_mbps", float, d.si1.uniform_low_mbps),
                          r.get("si1", "uniform_high_mbps", float, d.si1.uniform_high_mbps))
    rates = r.get("classes", "rates_mbps", _floats)
    weights = r.get("classes", "weights", _floats)
    classes = make_classes(rates, weights) if rates is not None else make_classes(weights=weights)

    numbered = sorted(int(m.group(1)) for s in r.cp.sections() if (m := _MNO_SECTION.match(s)))
    n_mno = r.get("si2", "n_mno", _int)
    if n_mno is None:
        n_mno = max(numbered) if numbered else d.n_mno
    if n_mno < 1:
        raise ValidationError(f"{r.where('si2', 'n_mno')}: n_mno must be >= 1")
    if numbered and max(numbered) > n_mno:
        raise ValidationError(f"{r.where(f'mno.{max(numbered)}')}: MNO index exceeds n_mno={n_mno}")
    base_mno = _mno_profile(r, "mno", MnoProfile(30, DESK_ACTIVITY))
    mnos = tuple(_mno_profile(r, f"mno.{q}", base_mno) for q in range(1, n_mno + 1))

    inter_kind = r.get("policy", "inter", _kind, "PR")
    inter = PolicySpec(inter_kind,
                       ShareProfile(r.get("policy", "shares", _floats, (0.5, 0.5)),
                                    r.get("policy", "priorities", _floats, ())),
                       r.get("policy", "fr_shares", _floats))
    intra_kind = r.get("policy", "intra", _kind, "PR")
    if intra_kind != "PR":
        raise ValidationError(f"{r.where('policy', 'intra')}: only PR is defined inside SI-II")
    intra = PolicySpec("PR", ShareProfile(r.get("policy", "intra_shares", _floats, (1.0,) * n_mno),
                                          r.get("policy", "intra_priorities", _floats, ())))

    return ScenarioConfig(
        pool=pool, si1=si1,
        si1_eta=r.get("si1", "eta", float, 1.0),
        si2_eta=r.get("si2", "eta", float, 1.0),
        mnos=mnos, classes=classes, inter=inter, intra=intra,
        intra_reserved_mhz=r.get("si2", "intra_reserved_mhz", float, 0.0),
        intra_caps=r.get("si2", "intra_caps", _caps),
        stochastic_load=r.get("run", "stochastic_load", _bool, True),
        windows=r.get("run", "windows", _int, d.windows),
        seed=r.get("run", "seed", _int, d.seed),
        first_window=r.get("run", "first_window", _int, 0),
        run_id=r.get("run", "run_id", str, d.run_id).strip(),
    )


def strict_paper(config: ScenarioConfig) -> ScenarioConfig:
    """Literal rate table, every user active, unit weights, uniform usage."""
    mnos = tuple(replace(m, activity_factor=1.0, usage_pattern=(1 / 6,) * 6) for m in config.mnos)
    return replace(config, mnos=mnos, classes=make_classes(PAPER_RATES_MBPS))


# --- presets -----------------------------------------------------------------

@dataclass(frozen=True)
class Preset:
    """A base scenario plus the sweep it expands to.

    ``variants`` add an outer loop: each (label, axis, value) substitutes one
    more parameter and becomes its own ``run_id``. ``paper_values`` lists the
    parameters taken from the published setup, checked by ``selftest``.
    """

    name: str
    description: str
    base: ScenarioConfig
    axis: str
    values: tuple
    policies: tuple[str, ...]
    entities: tuple[str, ...]
    variants: tuple[tuple[str, str, Any], ...] = ()
    paper_values: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ValidationError(f"preset {self.name}: unknown axis {self.axis}")
        for _, axis, _ in self.variants:
            if axis not in SWEEP_AXES:
                raise ValidationError(f"preset {self.name}: unknown variant axis {axis}")

    def runs(self, windows: int | None = None, seed: int | None = None,
             paper: bool = False) -> list[tuple[str, ScenarioConfig]]:
        base = self.base
        if windows is not None:
            base = replace(base, windows=windows)
        if seed is not None:
            base = replace(base, seed=seed)
        if paper:
            base = strict_paper(base)
        if not self.variants:
            return [(self.name, replace(base, run_id=self.name))]
        return [(label, replace(with_axis(base, axis, value), run_id=label))
                for label, axis, value in self.variants]


def _paper_fields(cfg: ScenarioConfig) -> dict:
    return {
        "pool.total_mhz": cfg.pool.total_mhz,
        "pool.reserved_mhz": cfg.pool.reserved_mhz,
        "si1.fixed_mbps": cfg.si1.fixed_mbps,
        "si1.uniform_high_mbps": cfg.si1.uniform_high_mbps,
        "si1.eta": cfg.si1_eta,
        "si2.eta": cfg.si2_eta,
        "n_mno": cfg.n_mno,
        "policy.shares": cfg.inter.profile.principal_shares,
    }


def preset_paper_fields(preset: Preset) -> dict:
    """The current value of every field named in ``preset.paper_values``."""
    cfg = preset.base
    have = _paper_fields(cfg)
    have["si1.uniform_low_mbps"] = cfg.si1.uniform_low_mbps
    have["mno.user_count"] = tuple(m.user_count for m in cfg.mnos)
    have["policies"] = preset.policies
    return {k: have[k] for k in preset.paper_values}


_COMMON_PAPER = {
    "pool.total_mhz": 30.0,
    "pool.reserved_mhz": 0.0,
    "si1.fixed_mbps": 5.0,
    "si1.uniform_high_mbps": 20.0,
    "si1.eta": 1.0,
    "si2.eta": 1.0,
    "n_mno": 3,
    "policy.shares": (0.5, 0.5),
}

_RANGE_MNOS = (MnoProfile(user_max=30),) * 3
_WINDOWS = 10_000
_USER_POINTS = tuple(range(5, 36))
_LOW_POINTS = tuple(range(1, 21))
_SHARE_POINTS = tuple(round(0.1 + 0.05 * i, 2) for i in range(17))


def _base(**kw) -> ScenarioConfig:
    kw.setdefault("windows", _WINDOWS)
    return ScenarioConfig(**kw)


PRESETS: dict[str, Preset] = {
    "fig4": Preset(
        "fig4", "SI-I deviation vs users per MNO (each window draws 1..u users)",
        _base(mnos=_RANGE_MNOS), "mno_user_count", _USER_POINTS, POLICY_KINDS, ("SI-I",),
        paper_values={**_COMMON_PAPER, "si1.uniform_low_mbps": 1.0, "policies": POLICY_KINDS}),
    "fig5": Preset(
        "fig5", "SI-II deviation vs the lower limit of SI-I's uniform traffic",
        _base(mnos=(MnoProfile(user_max=20),) * 3), "si1_uniform_low", _LOW_POINTS,
        POLICY_KINDS, ("SI-II",),
        paper_values={**_COMMON_PAPER, "policies": POLICY_KINDS}),
    "fig6a": Preset(
        "fig6a", "deviation averaged over both SIs vs users per MNO",
        _base(mnos=_RANGE_MNOS), "mno_user_count", _USER_POINTS, POLICY_KINDS, ("SI-avg",),
        paper_values={**_COMMON_PAPER, "si1.uniform_low_mbps": 1.0, "policies": POLICY_KINDS}),
    "fig6b": Preset(
        "fig6b", "deviation averaged over both SIs vs the lower limit of SI-I's traffic",
        _base(mnos=(MnoProfile(user_max=20),) * 3), "si1_uniform_low", _LOW_POINTS,
        POLICY_KINDS, ("SI-avg",),
        paper_values={**_COMMON_PAPER, "policies": POLICY_KINDS}),
    "fig7": Preset(
        "fig7", "PR deviation of both SIs vs SI-I's principal share, 30 users per MNO",
        _base(mnos=(MnoProfile(30),) * 3), "si1_principal_share", _SHARE_POINTS, ("PR",),
        ("SI-I", "SI-II"),
        variants=tuple((f"low={v}", "si1_uniform_low", v) for v in (1, 5, 10)),
        paper_values={**{k: v for k, v in _COMMON_PAPER.items() if k != "policy.shares"},
                      "mno.user_count": (30, 30, 30), "policies": ("PR",)}),
    "fig8": Preset(
        "fig8", "PR deviation of both SIs vs SI-I's principal share for several user counts",
        _base(mnos=(MnoProfile(30),) * 3), "si1_principal_share", _SHARE_POINTS, ("PR",),
        ("SI-I", "SI-II"),
        variants=tuple((f"users={u}", "mno_user_count", u) for u in (10, 20, 30, 40)),
        paper_values={**{k: v for k, v in _COMMON_PAPER.items() if k != "policy.shares"},
                      "si1.uniform_low_mbps": 1.0, "policies": ("PR",)}),
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}") from None


def check_presets() -> list[str]:
    """Mismatches between each preset and its published parameters (empty when all agree)."""
    problems = []
    for preset in PRESETS.values():
        for key, got in preset_paper_fields(preset).items():
            want = preset.paper_values[key]
            if got != want:
                problems.append(f"{preset.name}: {key} is {got!r}, expected {want!r}")
    return problems
