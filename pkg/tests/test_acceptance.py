"""Acceptance criteria 1-9, one pass/fail line each in the terminal summary."""

import json
import math

import numpy as np
import pytest

from conftest import ACCEPTANCE, ROOT
from fama_sim.channel import ChannelRealization, ScatteringEnvironment, channel_matrix, sample_paths
from fama_sim.cli import main
from fama_sim.config import load_config
from fama_sim.fama import DYNAMIC, STATIC, LinkBudget, select_ports, sinr_table
from fama_sim.montecarlo import Antenna, SimConfig, estimate, sweep
from fama_sim.patterns import (
    PatternSet,
    SyntheticProfile,
    make_synthetic_dcfa_set,
    make_synthetic_set,
    rpdr,
)
from fama_sim.ports import W_DCFA, W_SCFA, dcfa_grid, linear_ports

pytestmark = pytest.mark.slow

ENV = ScatteringEnvironment(20.0, 1.0, 5)
MEASURED = ROOT / "data" / "measured"


def record(n, ok, detail):
    ACCEPTANCE[n] = ("PASS" if ok else "FAIL", detail)
    assert ok, detail


def _omni_cfg(m, snr_db, strategy, n_trials, seed=0):
    return SimConfig(ENV, m, Antenna.omni(), LinkBudget.from_snr_db(snr_db), strategy,
                     n_trials, master_seed=seed)


def test_1_single_user_saturation():
    e = estimate(_omni_cfg(1, 15.0, DYNAMIC, 100_000, seed=1))
    record(1, e.mux_gain >= 0.99, f"mux_gain={e.mux_gain:.5f} (need >= 0.99)")


def test_2_two_user_symmetry():
    e = estimate(_omni_cfg(2, 40.0, STATIC, 1_000_000, seed=2))
    record(2, abs(e.outage_hat - 0.5) <= 0.005,
           f"outage={e.outage_hat:.5f} (need 0.500 +/- 0.005)")


def test_3_four_user_static_saturation():
    e = estimate(_omni_cfg(4, 30.0, STATIC, 1_000_000, seed=3))
    record(3, e.outage_hat >= 0.99, f"outage={e.outage_hat:.5f} (need >= 0.99)")


def test_4_channel_normalization():
    rng = np.random.default_rng(4)
    details, ok = [], True
    for k, np_ in ((0.0, 5), (20.0, 5), (20.0, 1)):
        env = ScatteringEnvironment(k, 1.0, np_)
        powers = []
        ratios = []
        for _ in range(10):
            paths = sample_paths(env, 1, rng, size=100_000)
            # a port away from the origin so the array phase is exercised
            g = channel_matrix(paths, env, linear_ports(2, 0.37))[..., 0, 0, 1]
            powers.append(np.abs(g) ** 2)
            ratios.append(np.sum(np.abs(paths.scat_coeff[..., 0, 0, :]) ** 2, axis=-1))
        mean = float(np.mean(np.concatenate(powers)))
        ok &= abs(mean - 1.0) <= 0.01
        msg = f"(K={k:g},Np={np_}) E|g|^2={mean:.4f}"
        if k > 0:
            ratio = env.los_amplitude ** 2 / float(np.mean(np.concatenate(ratios)))
            ok &= abs(ratio - k) <= 0.05 * k
            msg += f" K_hat={ratio:.3f}"
        details.append(msg)
    record(4, ok, "; ".join(details))


def _brute_force_ports(h, budget):
    """Per-port SINR from scalar-style loops and a strict '>' scan."""
    m, n = h.shape[-2], h.shape[-1]
    p = budget.powers(m)
    best_val = np.full(h.shape[:-3] + (m,), -np.inf)
    best_idx = np.zeros(h.shape[:-3] + (m,), dtype=int)
    for k in range(n):
        for i in range(m):
            sig = p[i] * np.abs(h[..., i, i, k]) ** 2
            intf = sum(p[j] * np.abs(h[..., j, i, k]) ** 2 for j in range(m) if j != i)
            s = sig / (intf + budget.noise_var)
            better = s > best_val[..., i]
            best_val[..., i] = np.where(better, s, best_val[..., i])
            best_idx[..., i] = np.where(better, k + 1, best_idx[..., i])
    return best_idx


def test_5_dynamic_equals_brute_force():
    rng = np.random.default_rng(5)
    budget = LinkBudget.from_snr_db(10.0)
    cases = {
        1: (linear_ports(1, 0.0), make_synthetic_set(1)),
        12: (linear_ports(12, W_SCFA), make_synthetic_set(12)),
        20: (linear_ports(20, W_SCFA), make_synthetic_set(20)),
        144: (dcfa_grid(12, 12, W_DCFA), make_synthetic_dcfa_set(12, 12)),
    }
    mismatches = {}
    for n, (ports, pats) in cases.items():
        bad = 0
        for _ in range(10):
            paths = sample_paths(ENV, 3, rng, size=1000)
            h = channel_matrix(paths, ENV, ports, pats)
            got = select_ports(ChannelRealization(ENV, paths, h), budget, DYNAMIC)
            bad += int(np.count_nonzero(got != _brute_force_ports(h, budget)))
        mismatches[n] = bad
    record(5, not any(mismatches.values()),
           "mismatches per N over 10^4 realizations: "
           + ", ".join(f"N={n}:{b}" for n, b in mismatches.items()))


def test_6_dominance_and_monotonicity():
    ant = Antenna("scfa", linear_ports(20, W_SCFA), make_synthetic_set(20))
    tmpl = SimConfig(ENV, 1, ant, LinkBudget(), DYNAMIC, 10_000, master_seed=6)
    snrs = [0.0, 6.0, 12.0, 18.0, 24.0, 30.0]
    ms = [1, 2, 3, 4]
    res = sweep(tmpl, snrs, ms, [DYNAMIC, STATIC], common_random_numbers=True)
    grid = {(e.config.strategy.kind, e.m_users, e.config.snr_db): e.outage_hat for e in res}
    violations = []
    for m in ms:
        for s in snrs:
            if grid[("dynamic-max-sinr", m, s)] > grid[("static-random-port", m, s)]:
                violations.append(f"dyn>static M={m} SNR={s:g}")
    for kind in ("dynamic-max-sinr", "static-random-port"):
        for m in ms:
            for a, b in zip(snrs, snrs[1:]):
                if grid[(kind, m, b)] > grid[(kind, m, a)]:
                    violations.append(f"{kind} rises with SNR M={m} {a:g}->{b:g}")
        for s in snrs:
            for a, b in zip(ms, ms[1:]):
                if grid[(kind, b, s)] < grid[(kind, a, s)]:
                    violations.append(f"{kind} falls with M SNR={s:g} {a}->{b}")

    # nested port subsets, same paths
    rng = np.random.default_rng(66)
    budget = LinkBudget.from_snr_db(12.0)
    nested = [[1], [1, 9], list(range(1, 21, 2)), list(range(1, 21))]
    nest_bad = 0
    for _ in range(10):
        paths = sample_paths(ENV, 4, rng, size=1000)
        prev = None
        for idx in nested:
            sub = ant.ports.subset(idx)
            cur = sinr_table(channel_matrix(paths, ENV, sub, ant.patterns), budget).max(-1)
            if prev is not None:
                nest_bad += int(np.count_nonzero(cur < prev))
            prev = cur
    if nest_bad:
        violations.append(f"{nest_bad} nested-subset SINR decreases")
    record(6, not violations,
           f"{len(res) // 2} points per strategy x 10^4 trials, violations: "
           + ("none" if not violations else "; ".join(violations)))


def test_7_thread_count_determinism(tmp_path):
    cfg = {"antenna": {"kind": "scfa"}, "sweep": {"snr_db": [0, 12], "m_users": [2, 3]},
           "strategy": ["dynamic", "static"], "trials": 5000, "seed": 77}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    outs = []
    for threads in ("1", "8"):
        out = tmp_path / f"t{threads}.csv"
        assert main(["run", "-c", str(path), "-o", str(out), "--threads", threads]) == 0
        outs.append(out.read_bytes())
    record(7, outs[0] == outs[1],
           f"1 vs 8 workers: {'identical' if outs[0] == outs[1] else 'different'} "
           f"({len(outs[0])} bytes)")


def test_8_rpdr_oracle():
    pset = make_synthetic_set(3, SyntheticProfile(null_drift_deg=50.0))
    grid = np.arange(8) * 45.0
    env = rpdr(pset, grid)
    upper, lower = [], []
    for a in grid:
        vals = [float(p.gain_db(a)) for p in pset]
        upper.append(max(vals))
        lower.append(min(vals))
    ranges = [u - lo for u, lo in zip(upper, lower)]
    avg = math.fsum(ranges) / len(ranges)
    exact = (env.upper_dbi.tolist() == upper and env.lower_dbi.tolist() == lower
             and env.range_db.tolist() == ranges and abs(env.avg_range_db - avg) <= 1e-15)
    single = rpdr(PatternSet((pset[1],)), grid)
    zero = not np.any(single.range_db) and single.avg_range_db == 0.0
    record(8, exact and zero,
           f"avg_range_db={env.avg_range_db:.6f} vs oracle {avg:.6f}; singleton zero={zero}")


# values read off the measured-pattern results; M=2/3 mux gain is the better of the two
PUBLISHED_TARGETS = {
    "scfa": {"outage_m2": 0.15, "mux_best": 1.7},
    "dcfa": {"outage_m2": 0.056, "mux_best": 2.27, "outage_m4": 0.43},
}
TARGET_SNR_DB = 30.0


def _measured_check(name):
    plan = load_config(ROOT / "configs" / f"measured_{name}.json", trials=200_000)
    picked = [c for c in plan.configs if c.antenna.name == name and c.snr_db == TARGET_SNR_DB
              and c.strategy.kind == "dynamic-max-sinr"]
    res = {c.m_users: estimate(c) for c in picked}
    tgt = PUBLISHED_TARGETS[name]
    errs = [abs(res[2].outage_hat - tgt["outage_m2"]) <= 0.03,
            abs(max(res[2].mux_gain, res[3].mux_gain) - tgt["mux_best"]) <= 0.1]
    if "outage_m4" in tgt:
        errs.append(abs(res[4].outage_hat - tgt["outage_m4"]) <= 0.03)
    return all(errs), {m: round(e.outage_hat, 4) for m, e in res.items()}


def test_9_synthetic_ordering():
    tmpl = SimConfig(ENV, 1, Antenna.omni(), LinkBudget(), DYNAMIC, 20_000, master_seed=7)
    ants = [Antenna.omni(),
            Antenna("scfa", linear_ports(20, W_SCFA), make_synthetic_set(20)),
            Antenna("dcfa", dcfa_grid(12, 12, W_DCFA), make_synthetic_dcfa_set(12, 12))]
    res = sweep(tmpl, [12.0], [1, 2, 3, 4], [DYNAMIC], ants, common_random_numbers=True)
    out = {(e.config.antenna.name, e.m_users): e.outage_hat for e in res}
    ok = True
    parts = []
    for m in (1, 2, 3, 4):
        o, s, d = out[("omni", m)], out[("scfa", m)], out[("dcfa", m)]
        ok &= (o <= s <= d) if m == 1 else (d <= s <= o)
        parts.append(f"M={m} omni/scfa/dcfa={o:.4f}/{s:.4f}/{d:.4f}")

    measured = [MEASURED / "scfa_patterns.csv", MEASURED / "dcfa_patterns.csv"]
    if all(p.exists() for p in measured):
        for name in ("scfa", "dcfa"):
            good, vals = _measured_check(name)
            ok &= good
            parts.append(f"measured {name} outage@{TARGET_SNR_DB:g}dB={vals}")
        record(9, ok, "; ".join(parts))
    else:
        record(9, ok, "synthetic ordering: " + "; ".join(parts)
               + " | measured-pattern reproduction skipped: data/measured/*.csv absent")
