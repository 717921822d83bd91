"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Figure-trend criteria run the built-in presets at full size (10^4 windows per
point), write the summary table to CSV and compute their statistics from the
file read back.
"""

import math
import time

import numpy as np
from scipy.stats import spearmanr

from specsim import batch
from specsim.config import PRESETS
from specsim.demand import mno_load, sample_mno_load
from specsim.engine import ScenarioConfig, format_axis_value, run_experiment, run_sweep
from specsim.metrics import read_records, read_summaries, summarize, write_csv
from specsim.model import (
    DemandVector,
    MnoProfile,
    ShareProfile,
    SpectrumPool,
    make_classes,
)
from specsim.policies import (
    allocate_cs,
    allocate_fr,
    allocate_pr_inter,
    allocate_pr_intra,
    classify_case,
)

TOL = 1e-9


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


# --- 1: golden table -----------------------------------------------------------

def _inter(d, shares, total=30.0, reserved=0.0, prios=()):
    return allocate_pr_inter(DemandVector(d), ShareProfile(shares, prios),
                             SpectrumPool(total, reserved))


def _intra(d, shares, total, prios=()):
    return allocate_pr_intra(DemandVector(d), ShareProfile(shares, prios), SpectrumPool(total))


# (name, thunk, expected grants, expected case label)
GOLDEN = [
    ("FR equal split ignores demand", lambda: allocate_fr(DemandVector((10, 25)), (0.5, 0.5), SpectrumPool(30)),
     (15, 15), "FR"),
    ("FR 0.3/0.7", lambda: allocate_fr(DemandVector((3, 40)), (0.3, 0.7), SpectrumPool(30)),
     (9, 21), "FR"),
    ("CS proportional", lambda: allocate_cs(DemandVector((20, 40)), SpectrumPool(30)),
     (10, 20), "CS"),
    ("CS zero demand", lambda: allocate_cs(DemandVector((0, 0)), SpectrumPool(30)),
     (15, 15), "CS-degenerate"),
    ("PR inter C-I", lambda: _inter((8, 12), (1, 1)), (8, 12), "C-I"),
    ("PR inter C-II reserve by priority", lambda: _inter((20, 20), (12, 12), 30, 6, (1, 1)),
     (15, 15), "C-II"),
    ("PR inter C-II excess within reserve", lambda: _inter((16, 16), (12, 12), 32, 8),
     (16, 16), "C-II"),
    ("PR inter C-III surplus transfer", lambda: _inter((5, 28), (1, 1)), (5, 25), "C-III"),
    ("PR inter C-III surplus plus reserve", lambda: _inter((5, 30), (13, 13), 30, 4),
     (5, 25), "C-III"),
    ("PR intra C-III equal priorities", lambda: _intra((2, 10, 12), (6, 6, 6), 18),
     (2, 8, 8), "C-III"),
    ("PR intra C-III priority 1:3", lambda: _intra((2, 10, 12), (6, 6, 6), 18, (1, 1, 3)),
     (2, 7, 9), "C-III"),
    ("PR intra C-III receiver exactly met", lambda: _intra((2, 7, 12), (6, 6, 6), 18, (1, 1, 3)),
     (2, 7, 9), "C-III"),
]


def test_c1_golden_table(report):
    failures = []
    with Timer() as t:
        for name, thunk, want, label in GOLDEN:
            res = thunk()
            err = max(abs(a - b) for a, b in zip(res.grants_mhz, want))
            if err >= TOL or res.case_label != label or len(res.grants_mhz) != len(want):
                failures.append(f"{name}: got {res.grants_mhz} {res.case_label}")
        pool = SpectrumPool(30)
        for d, label in (((8, 12), "C-I"), ((20, 20), "C-II"), ((5, 28), "C-III")):
            got = classify_case(DemandVector(d), ShareProfile((1, 1)), pool)
            if got != label:
                failures.append(f"classify {d}: {got}")
    ok = not failures and t.elapsed < 1.0
    report(1, "branch golden table", ok, "; ".join([f"{len(GOLDEN)} rows, {t.elapsed:.3f}s"] + failures))
    assert not failures
    assert t.elapsed < 1.0


# --- 2, 3: conservation and guaranteed minimum fuzz ------------------------------

N_FUZZ = 10**6
CHUNK = 10_000


def _random_demands(rng, n_rows, n, totals, g):
    """Demands in [0, 1.5 B], with exact zeros and exact-guarantee ties mixed in."""
    d = rng.random((n_rows, n)) * 1.5 * totals[:, None]
    pick = rng.random((n_rows, n))
    d = np.where(pick < 0.1, 0.0, d)
    d = np.where((pick >= 0.1) & (pick < 0.2), g, d)
    return d


def _pr_chunks(rng, n_entities):
    """Yield (demands, guarantees, grants, totals) for random PR inputs, one chunk at a time."""
    for _ in range(N_FUZZ // CHUNK):
        n = n_entities if n_entities else int(rng.integers(2, 7))
        totals = rng.uniform(1.0, 100.0, CHUNK)
        reserved = np.where(rng.random(CHUNK) < 0.5, 0.0, rng.random(CHUNK) * totals)
        xi = rng.uniform(0.01, 1.0, (CHUNK, n))
        # shares normalized over the non-reserved part of the pool
        norm = xi / xi.sum(axis=1, keepdims=True) * (1.0 - reserved / totals)[:, None]
        rho = rng.uniform(0.1, 5.0, n)
        rho = rho / rho.sum()
        g = norm * totals[:, None]
        d = _random_demands(rng, CHUNK, n, totals, g)
        grants, _ = batch.pr_batch(d, norm, rho, totals, reserved)
        yield d, g, grants, totals


def _scalar_spot_check(rng, count=2000):
    """The public allocators on a subsample, against the same invariants."""
    bad = 0
    for _ in range(count):
        n = int(rng.integers(2, 6))
        total = float(rng.uniform(1, 100))
        reserved = 0.0 if rng.random() < 0.5 else float(rng.random() * total)
        pool = SpectrumPool(total, reserved)
        prof = ShareProfile(tuple(rng.uniform(0.01, 1, n)), tuple(rng.uniform(0.1, 5, n)))
        d = DemandVector(tuple(rng.random(n) * 1.5 * total))
        results = [allocate_pr_intra(d, prof, pool), allocate_cs(d, pool),
                   allocate_fr(d, tuple(np.full(n, 1.0 / n)), pool)]
        if n == 2:
            results.append(allocate_pr_inter(d, prof, pool))
        for r in results:
            if sum(r.grants_mhz) > total + TOL:
                bad += 1
    return bad


def test_c2_conservation_fuzz(report):
    rng = np.random.default_rng(2)
    over = {"PR inter": 0, "PR intra": 0, "FR": 0, "CS": 0}
    not_equal = {"FR": 0, "CS": 0}
    with Timer() as t:
        for label, n in (("PR inter", 2), ("PR intra", 0)):
            for _, _, grants, totals in _pr_chunks(rng, n):
                over[label] += int(np.count_nonzero(batch._rowsum(grants) > totals + TOL))
        for _ in range(N_FUZZ // CHUNK):
            n = int(rng.integers(2, 7))
            totals = rng.uniform(1.0, 100.0, CHUNK)
            psi = rng.uniform(0.01, 1.0, n)
            psi = psi / psi.sum()
            fr = batch.fr_batch(psi, totals)
            s = batch._rowsum(fr)
            over["FR"] += int(np.count_nonzero(s > totals + TOL))
            not_equal["FR"] += int(np.count_nonzero(np.abs(s - totals) > TOL))
            d = _random_demands(rng, CHUNK, n, totals, totals[:, None] / n)
            cs, degenerate = batch.cs_batch(d, totals)
            s = batch._rowsum(cs)
            over["CS"] += int(np.count_nonzero(s > totals + TOL))
            live = ~degenerate
            not_equal["CS"] += int(np.count_nonzero(np.abs(s - totals)[live] > TOL))
        spot = _scalar_spot_check(rng)
    ok = not any(over.values()) and not any(not_equal.values()) and spot == 0 and t.elapsed < 30
    report(2, "conservation fuzz", ok,
           f"10^6 inputs per policy, over-grants {over}, FR/CS inequality {not_equal}, "
           f"scalar spot-check violations {spot}, {t.elapsed:.1f}s")
    assert not any(over.values()), over
    assert not any(not_equal.values()), not_equal
    assert spot == 0
    assert t.elapsed < 30


def test_c3_guaranteed_minimum_fuzz(report):
    rng = np.random.default_rng(3)
    violations = 0
    checked = 0
    with Timer() as t:
        # 10^6 two-entity inputs, then 10^6 with 2..6 entities
        for n in (2, 0):
            for d, g, grants, _ in _pr_chunks(rng, n):
                violations += int(np.count_nonzero(grants < np.minimum(d, g) - TOL))
                checked += d.shape[0]
    ok = violations == 0 and t.elapsed < 30
    report(3, "guaranteed-minimum fuzz", ok, f"{checked} PR inputs, {violations} violations, {t.elapsed:.1f}s")
    assert checked >= N_FUZZ
    assert violations == 0
    assert t.elapsed < 30


# --- 4: PR dominates FR pointwise ----------------------------------------------

def test_c4_pr_dominates_fr_pointwise(report):
    rng = np.random.default_rng(4)
    pool = SpectrumPool(30)
    prof = ShareProfile((0.5, 0.5))
    pairs = rng.random((10**5, 2)) * 45
    # boundary pairs: exactly at the share, zero demand, exactly the pool
    pairs[:300] = rng.choice([0.0, 15.0, 30.0], size=(300, 2))
    violations = 0
    with Timer() as t:
        for a, b in pairs:
            d = DemandVector((float(a), float(b)))
            pr = allocate_pr_inter(d, prof, pool).grants_mhz
            fr = allocate_fr(d, (0.5, 0.5), pool).grants_mhz
            for s in range(2):
                if abs(d.demands_mhz[s] - pr[s]) > abs(d.demands_mhz[s] - fr[s]) + TOL:
                    violations += 1
    ok = violations == 0
    report(4, "pointwise PR-dominates-FR", ok, f"10^5 pairs, {violations} violations, {t.elapsed:.1f}s")
    assert violations == 0


# --- 5, 6, 7: figure trends ----------------------------------------------------

def _sweep_summary(preset_name, tmp_path, variant=0):
    preset = PRESETS[preset_name]
    label, cfg = preset.runs()[variant]
    records = run_sweep(cfg, preset.axis, list(preset.values), list(preset.policies))
    path = write_csv(summarize(records), tmp_path / f"{preset_name}_{variant}_summary.csv")
    return preset, read_summaries(path), records


def _point(summaries, policy, entity, value):
    hits = [s for s in summaries if s.policy == policy and s.entity == entity
            and s.axis_value == value and s.level == "inter"]
    assert len(hits) == 1, (policy, entity, value)
    return hits[0]


def _margin_z(summaries, entity, value, other):
    """How many pooled standard errors ``other`` lies above PR."""
    pr = _point(summaries, "PR", entity, value)
    o = _point(summaries, other, entity, value)
    pooled = math.hypot(pr.std_error, o.std_error)
    diff = o.mean_deviation_mhz - pr.mean_deviation_mhz
    return diff / pooled if pooled > 0 else (math.inf if diff > 0 else -math.inf)


def _values(preset):
    return [format_axis_value(v) for v in preset.values]


def test_c5_fig4_trends(report, tmp_path):
    with Timer() as t:
        preset, S, records = _sweep_summary("fig4", tmp_path)
        values = _values(preset)
        assert min(s.window_count for s in S) >= 10**4

        fr = [_point(S, "FR", "SI-I", v) for v in values]
        means = [s.mean_deviation_mhz for s in fr]
        spread = max(means) - min(means)
        se = max(s.std_error for s in fr)
        ok_a = spread < 3 * se if se > 0 else spread == 0

        si2 = records[(records.entity == "SI-II") & (records.policy == "PR")]
        si2_mean = si2.groupby("axis_value", observed=True)["demand_mhz"].mean()
        heavy = [v for v in values if si2_mean[v] > 30.0]
        cs = [_point(S, "CS", "SI-I", v).mean_deviation_mhz for v in heavy]
        rho = spearmanr([float(v) for v in heavy], cs)[0] if len(heavy) >= 3 else float("nan")
        ok_b = rho > 0.9

        z = min(min(_margin_z(S, "SI-I", v, p) for p in ("FR", "CS")) for v in values)
        ok_c = z > 2
    ok_t = t.elapsed < 60
    report("5a", "fig4: FR SI-I deviation flat", ok_a, f"spread {spread:.2e} MHz vs 3 SE {3 * se:.3f}")
    report("5b", "fig4: CS SI-I deviation rising once SI-II is overloaded", ok_b,
           f"Spearman {rho:.3f} over {len(heavy)} points from u={heavy[0] if heavy else '-'}")
    report("5c", "fig4: PR SI-I below FR and CS", ok_c and ok_t,
           f"min margin {z:.1f} pooled SE, {t.elapsed:.1f}s")
    assert ok_a and ok_b and ok_c
    assert ok_t


def test_c6_fig6_average_deviation(report, tmp_path):
    worst = {}
    with Timer() as t:
        for name in ("fig6a", "fig6b"):
            preset, S, _ = _sweep_summary(name, tmp_path)
            worst[name] = min(min(_margin_z(S, "SI-avg", v, p) for p in ("FR", "CS"))
                              for v in _values(preset))
    ok = all(z > 2 for z in worst.values()) and t.elapsed < 120
    report(6, "fig6: PR lowest average deviation at every point", ok,
           ", ".join(f"{k} min margin {z:.1f} pooled SE" for k, z in worst.items())
           + f", {t.elapsed:.1f}s")
    assert all(z > 2 for z in worst.values()), worst
    assert t.elapsed < 120


def test_c7_fig7_share_monotonicity(report, tmp_path):
    with Timer() as t:
        preset, S, _ = _sweep_summary("fig7", tmp_path)
        values = _values(preset)
        shares = np.array([float(v) for v in values])
        si1 = [_point(S, "PR", "SI-I", v).mean_deviation_mhz for v in values]
        si2 = [_point(S, "PR", "SI-II", v).mean_deviation_mhz for v in values]
        rho1 = spearmanr(shares, si1)[0]
        rho2 = spearmanr(1.0 - shares, si2)[0]
    ok = rho1 < -0.9 and rho2 < -0.9 and t.elapsed < 60
    report(7, "fig7: deviation falls with own principal share", ok,
           f"Spearman SI-I {rho1:.3f}, SI-II {rho2:.3f}, {t.elapsed:.1f}s")
    assert rho1 < -0.9 and rho2 < -0.9
    assert t.elapsed < 60


# --- 8: sampled load vs closed form --------------------------------------------

def _random_profiles(rng, count=20):
    """Profiles whose active-user count u * alpha is a whole number."""
    out = []
    for _ in range(count):
        users = int(rng.integers(50, 201))
        active = int(rng.integers(20, users + 1))
        pattern = tuple(rng.dirichlet(np.ones(6)))
        weights = tuple(rng.uniform(0.5, 2.0, 6))
        out.append((MnoProfile(users, active / users, pattern), make_classes(weights=weights)))
    return out


def test_c8_sampled_load_matches_closed_form(report):
    rng = np.random.default_rng(8)
    errors = []
    with Timer() as t:
        for profile, classes in _random_profiles(rng):
            draws = np.array([sample_mno_load(profile, classes, rng).load_mbps for _ in range(10**4)])
            exact = mno_load(profile, classes).load_mbps
            errors.append(abs(draws.mean() - exact) / exact)
    worst = max(errors)
    ok = worst < 0.02 and t.elapsed < 10
    report(8, "sampled load matches closed form", ok,
           f"20 profiles, worst relative error {worst:.4f}, {t.elapsed:.1f}s")
    assert worst < 0.02
    assert t.elapsed < 10


# --- 9: determinism and round trip ---------------------------------------------

def test_c9_determinism_and_round_trip(report, tmp_path):
    cfg = ScenarioConfig(mnos=(MnoProfile(user_max=25),) * 3, windows=2000, seed=12345,
                         run_id="det")
    with Timer() as t:
        a = write_csv(run_experiment(cfg), tmp_path / "a" / "records.csv")
        b = write_csv(run_experiment(cfg), tmp_path / "b" / "records.csv")
        same_bytes = a.read_bytes() == b.read_bytes()
        original = run_experiment(cfg)
        back = read_records(a)
        cols_ok = list(back.columns) == list(original.columns)
        num_err = max(float(np.max(np.abs(back[c].to_numpy() - original[c].to_numpy())))
                      for c in ("demand_mhz", "grant_mhz", "deviation_mhz"))
        text_ok = all((back[c].astype(str).to_numpy() == original[c].astype(str).to_numpy()).all()
                      for c in ("run_id", "policy", "level", "entity", "case_label"))
        int_ok = (back["window"].to_numpy() == original["window"].to_numpy()).all()
    ok = same_bytes and cols_ok and num_err <= TOL and text_ok and int_ok and t.elapsed < 10
    report(9, "determinism and CSV round trip", ok,
           f"byte-identical {same_bytes}, max float error {num_err:.1e}, {t.elapsed:.1f}s")
    assert same_bytes
    assert cols_ok and text_ok and int_ok
    assert num_err <= TOL
    assert t.elapsed < 10


# --- 10: intra with two entities equals inter ------------------------------------

def test_c10_intra_matches_inter(report):
    rng = np.random.default_rng(10)
    mismatches = 0
    with Timer() as t:
        for _ in range(10**5):
            total = float(rng.uniform(1, 100))
            reserved = 0.0 if rng.random() < 0.5 else float(rng.random() * total)
            pool = SpectrumPool(total, reserved)
            prof = ShareProfile(tuple(rng.uniform(0.01, 1, 2)), tuple(rng.uniform(0.1, 5, 2)))
            d = DemandVector(tuple(rng.random(2) * 1.2 * total))
            a = allocate_pr_intra(d, prof, pool)
            b = allocate_pr_inter(d, prof, pool)
            if a.grants_mhz != b.grants_mhz or a.case_label != b.case_label:
                mismatches += 1
    ok = mismatches == 0 and t.elapsed < 10
    report(10, "intra PR with 2 entities equals inter PR", ok,
           f"10^5 inputs, {mismatches} mismatches, {t.elapsed:.1f}s")
    assert mismatches == 0
    assert t.elapsed < 10
