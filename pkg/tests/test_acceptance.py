"""Exit criteria, each run as the single CLI invocation listed in the README.

Every criterion records one ``PASS``/``FAIL`` line (shown in the pytest
terminal summary, and printed directly when this file is run as a script)
before asserting.
"""
from __future__ import annotations

import json
import math
import sys
import time
from pathlib import Path

import pytest

from porositykit.cli import main

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # pragma: no cover
    ACCEPTANCE_LINES = []

pytestmark = pytest.mark.acceptance


def run_cli(argv: list[str], tmp: Path) -> tuple[int, dict, float]:
    path = tmp / "report.json"
    t0 = time.perf_counter()
    code = main([*argv, "--report", str(path)])
    elapsed = time.perf_counter() - t0
    return code, json.loads(path.read_text()), elapsed


def record(n: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def by_name(report: dict) -> dict[str, dict]:
    return {r["name"]: r for r in report["results"]}


def test_criterion_01_holder_step(tmp_path):
    code, rep, secs = run_cli(["certify", "--holder-trials", "100000"], tmp_path)
    r = by_name(rep)["holder_step_violations"]
    ok = code == 0 and r["trials"] == 100000 and r["value"] == 0 and secs < 10
    record(1, ok, f"{r['value']} violations in {r['trials']} power-mean steps "
                  f"(worst excess {r['worst_excess']:.2e}), {secs:.2f}s")


def test_criterion_02_certificate_oracle(tmp_path):
    code, rep, secs = run_cli(["certify", "--oracle-trials", "1000"], tmp_path)
    r = by_name(rep)["tree_recursion_vs_enumeration"]
    ok = code == 0 and r["trials"] == 1000 and r["value"] == 0 and secs < 10
    record(2, ok, f"{r['value']} mismatches in {r['trials']} trees of depth <= 3, {secs:.2f}s")


def test_criterion_03_known_dimension(tmp_path):
    Ds = ["0.87", "0.95", "1.0", "0.70", "0.76"]
    expect = ["certified"] * 3 + ["refuted-at-depth"] * 2
    code, rep, secs = run_cli(["certify", "--measure", "bernoulli", "--q", "0.25",
                               "--D", ",".join(Ds), "--depth", "30", "--tau", "half",
                               "--expect", ",".join(expect)], tmp_path)
    verdicts = [r["verdict"] for r in rep["results"]]
    ok = code == 0 and verdicts == expect and secs < 60
    detail = ", ".join(f"D={d}:{v}" for d, v in zip(Ds, verdicts))
    record(3, ok, f"{detail} (expected {', '.join(expect)}), {secs:.2f}s")


def test_criterion_04_constants_engine(tmp_path):
    code, rep, secs = run_cli(["bound", "--d", "1", "--alpha-approach", "50", "--check"],
                              tmp_path)
    res = rep["results"]
    alphas = [r for r in res if r["name"].startswith("bound_alpha_")]
    kchk = [r for r in res if r["name"].startswith("k_minimal_")]
    eps = [r for r in res if r["name"].startswith("eps0_residual_")]
    gain = [r for r in res if r["name"].startswith("porosity_gain_")]
    worst = max(r["value"] for r in eps)
    ok = (code == 0 and len(alphas) == 50 and all(r["pass"] for r in kchk + eps + gain)
          and len(kchk) == len(eps) == len(gain) == 50 and worst <= 1e-12
          and all(r["K"] > 1 for r in gain) and secs < 1)
    record(4, ok, f"{len(alphas)} alphas, k checks {sum(r['pass'] for r in kchk)}/50, "
                  f"max eps0 residual {worst:.1e}, gain checks {sum(r['pass'] for r in gain)}/50, "
                  f"{secs:.2f}s")


def test_criterion_05_claim1(tmp_path):
    code, rep, secs = run_cli(["claim1"], tmp_path)
    res = rep["results"]
    held = sum(bool(r["pass"]) for r in res)
    ok = code == 0 and len(res) >= 20 and held == len(res) and secs < 300
    record(5, ok, f"claim holds on {held}/{len(res)} instances, {secs:.2f}s")


def test_criterion_06_comb_family(tmp_path):
    code, rep, secs = run_cli(["dimension", "--comb-family", "4:8", "--samples", "200",
                               "--depth", "400"], tmp_path)
    res = rep["results"]
    ratios = [r["value"] for r in res]
    ok = (code == 0 and len(res) == 5 and all(r["pass"] for r in res)
          and all(1 <= x <= 12 for x in ratios) and secs < 120)
    record(6, ok, "bound/estimate ratios " + ", ".join(f"{x:.2f}" for x in ratios)
           + f" for k=4..8, {secs:.2f}s")


def test_criterion_07_example_scale_density(tmp_path):
    code, rep, secs = run_cli(["porosity", "--set", "example", "--param", "m=1",
                               "--param", "k=2", "--param", "n=1", "--param", "l_max=4",
                               "--samples", "50", "--resolution", "30", "--analytic"],
                              tmp_path)
    r = by_name(rep)
    count = r["porous_scale_count"]
    agree = r["engine_vs_analytic_agreement"]
    ok = (code == 0 and count["value"] == 380 and abs(count["density"] - 380 / 924) < 1e-15
          and agree["value"] >= 0.95 and secs < 300)
    record(7, ok, f"porous scales {count['value']}/924 (density {count['value'] / 924:.4f}), "
                  f"engine/analytic agreement {agree['value']:.4f} (need >= 0.95), {secs:.2f}s")


def test_criterion_08_mean_porosity(tmp_path):
    code, rep, secs = run_cli(["mean-porosity", "--measure", "counterexample",
                               "--alpha", "0.4", "--eps", "0.01", "--samples", "200",
                               "--depth", "30", "--checkpoints", "10,20,30"], tmp_path)
    r = by_name(rep)
    medians = [r[f"median_fraction_depth_{d}"]["value"] for d in (10, 20, 30)]
    mono = all(a <= b for a, b in zip(medians, medians[1:]))
    ok = code == 0 and min(medians) >= 0.8 and mono and secs < 600
    record(8, ok, f"median porous fractions {', '.join(f'{m:.3f}' for m in medians)} at depths "
                  f"10, 20, 30 (need >= 0.8, nondecreasing), {secs:.2f}s")


def test_criterion_09_counterexample_mass(tmp_path):
    code, rep, secs = run_cli(["counterexample", "verify", "--depth", "24",
                               "--mass-depth", "40"], tmp_path)
    r = by_name(rep)
    product = math.prod(1 - 1 / math.log(j + 2) for j in range(2, 41, 2))
    mass = r["mass_of_E_40"]
    osa2 = [x for n, x in r.items() if n.startswith("osa2")]
    chains = r["eta_product_within_c_bound"]
    ok = (code == 0 and mass["value"] < 0.01 and abs(mass["value"] - product) <= 1e-10
          and len(osa2) == 8 and all(x["value"] <= 1 + 1e-10 for x in osa2)
          and chains["pass"] and chains["value"] == 0 and secs < 120)
    record(9, ok, f"mass {mass['value']:.4e} vs product {product:.4e}, max osa2 sum "
                  f"{max(x['value'] for x in osa2):.4f}, chains within c_bound "
                  f"{chains['chains'] - chains['value']}/{chains['chains']}, {secs:.2f}s")


def test_criterion_10_digit_frequency(tmp_path):
    code, rep, secs = run_cli(["counterexample", "digits", "--i", "1000000",
                               "--i-short", "1000", "--seeds", "100"], tmp_path)
    r = by_name(rep)
    dev = r["digit_fraction_deviation"]["value"]
    frac = r["digit_fraction_decreases"]["value"]
    ok = code == 0 and dev <= 0.01 and frac >= 0.95 and secs < 120
    record(10, ok, f"max deviation {dev:.4f} (need <= 0.01), decreasing for {frac:.0%} of seeds, "
                   f"{secs:.2f}s")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
