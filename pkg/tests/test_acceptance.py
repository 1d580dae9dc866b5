"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are repeated in the
terminal summary.
"""

import math
import time

import numpy as np

from qrms.cli import main as cli_main
from qrms.counterexample import OBSERVABLE_A, PSI0
from qrms.errors import (
    _check_conservation,
    _check_correspondence,
    _check_dominating,
    _stream,
    dilation_noise_norm,
    eps_bar,
    eps_no,
    profile,
    random_instance,
)
from qrms.polarimeter import BeamConfig, run_experiment
from qrms.povm import is_accurate, pi1_sharp, pi2_unsharp
from qrms.threestate import assemble, decompose

P1 = pi1_sharp()
P2 = pi2_unsharp()
ALPHAS_17 = np.linspace(0.0, 2 * math.pi, 17)


def _record(report_line, number, ok, detail):
    report_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
    assert ok, detail


def test_1_counterexample_exactness(report_line):
    e1 = eps_no(OBSERVABLE_A, P1, PSI0)
    e2 = eps_no(OBSERVABLE_A, P2, PSI0)
    ok = abs(e1) < 1e-12 and abs(e2 - math.sqrt(2)) < 1e-12
    _record(report_line, 1, ok, f"eps_no(Pi1)={e1:.3e}, eps_no(Pi2)-sqrt2={e2 - math.sqrt(2):.3e}")


def test_2_profiles(report_line):
    alphas = np.linspace(0.0, 2 * math.pi, 2048)
    t0 = time.perf_counter()
    e1 = profile(OBSERVABLE_A, P1, PSI0, alphas)
    e2 = profile(OBSERVABLE_A, P2, PSI0, alphas)
    elapsed = time.perf_counter() - t0
    d1 = float(np.max(np.abs(e1 - 2 * np.abs(np.sin(alphas / 2)))))
    d2 = float(np.max(np.abs(e2 - np.sqrt(4 - 2 * np.cos(alphas)))))
    ok = d1 < 1e-10 and d2 < 1e-10 and elapsed < 1.0
    _record(report_line, 2, ok, f"max dev {d1:.2e} / {d2:.2e}, {elapsed:.3f} s")


def test_3_locally_uniform_errors(report_line):
    b1, a1 = eps_bar(OBSERVABLE_A, P1, PSI0)
    b2, a2 = eps_bar(OBSERVABLE_A, P2, PSI0)
    ok = (
        abs(b1 - 2) < 1e-6
        and abs(b2 - math.sqrt(6)) < 1e-6
        and abs(a1 - math.pi) < 1e-6
        and abs(a2 - math.pi) < 1e-6
    )
    _record(report_line, 3, ok, f"eps_bar {b1:.9f}, {b2:.9f}; argmax {a1:.9f}, {a2:.9f}")


def test_4_incompleteness_vs_completeness(report_line):
    accurate = is_accurate(OBSERVABLE_A, P1, PSI0)
    no = eps_no(OBSERVABLE_A, P1, PSI0)
    bar, _ = eps_bar(OBSERVABLE_A, P1, PSI0)
    ok = (not accurate) and no < 1e-12 and abs(bar - 2) < 1e-6
    _record(report_line, 4, ok, f"is_accurate={accurate}, eps_no={no:.1e}, eps_bar={bar:.6f}")


def test_5_equivalence_oracles(report_line):
    rng = np.random.default_rng(np.random.SeedSequence(5, spawn_key=(5,)))
    t0 = time.perf_counter()
    worst_three = worst_dil = 0.0
    for _ in range(1000):
        a, p, psi = random_instance(2, rng)
        ref = eps_no(a, p, psi)
        worst_three = max(worst_three, abs(assemble(decompose(a, p, psi)).epsilon - ref))
        worst_dil = max(worst_dil, abs(dilation_noise_norm(a, p, psi) - ref))
    elapsed = time.perf_counter() - t0
    ok = worst_three < 1e-10 and worst_dil < 1e-9 and elapsed < 10.0
    _record(report_line, 5, ok, f"three-state {worst_three:.2e}, dilation {worst_dil:.2e}, {elapsed:.2f} s")


def test_6_requirement_properties(report_line):
    dom = _check_dominating(1000, 2, _stream(6, 4))
    con = _check_conservation(500, 2, _stream(6, 5))
    cor = _check_correspondence(500, 2, _stream(6, 1))
    ok = dom.passed and con.passed and cor.passed
    _record(
        report_line,
        6,
        ok,
        f"dominating max(eps_no-eps_bar)={dom.max_violation:.1e}, "
        f"conservation {con.max_violation:.1e}, correspondence {cor.max_violation:.1e}",
    )


def test_7_monte_carlo(report_line):
    cfg = BeamConfig(seed=0)
    t0 = time.perf_counter()
    sharp = run_experiment("sharp", ALPHAS_17, cfg)
    unsharp = run_experiment("unsharp", ALPHAS_17, cfg)
    elapsed = time.perf_counter() - t0

    exact_s = 2 * np.abs(np.sin(ALPHAS_17 / 2))
    exact_u = np.sqrt(4 - 2 * np.cos(ALPHAS_17))
    z_s = np.max(np.abs(sharp.z_scores(exact_s)))
    z_u = np.max(np.abs(unsharp.z_scores(exact_u)))
    chi_s = sharp.reduced_chi2(exact_s)
    chi_u = unsharp.reduced_chi2(exact_u)

    t_un = np.array([t.t_unsharp for t in unsharp.terms])
    s_un = np.array([t.sigma("t_unsharp") for t in unsharp.terms])
    z_un = float(np.max(np.abs(t_un - 2) / s_un))

    ama = sharp.terms[0]
    z_ama = abs(ama.t_AMA - 2) / ama.sigma("t_AMA")
    s_ama = ama.sigma("t_AMA")

    ok = (
        z_s < 5
        and z_u < 5
        and 0.5 <= chi_s <= 2
        and 0.5 <= chi_u <= 2
        and z_un < 5
        and z_ama < 5
        and 0.002 <= s_ama <= 0.2
        and elapsed < 30.0
    )
    _record(
        report_line,
        7,
        ok,
        f"max|z| {z_s:.2f}/{z_u:.2f}, chi2_red {chi_s:.2f}/{chi_u:.2f}, "
        f"t_unsharp max|z| {z_un:.2f}, t_AMA={ama.t_AMA:.4f}({s_ama:.4f}), {elapsed:.2f} s",
    )


def test_8_determinism(report_line, tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    codes = [cli_main(["simulate", "--measurement", "unsharp", "--seed", "7", "--out", str(p)]) for p in paths]
    capsys.readouterr()
    same = paths[0].read_bytes() == paths[1].read_bytes()
    ok = codes == [0, 0] and same and len(paths[0].read_bytes()) > 0
    _record(report_line, 8, ok, f"exit codes {codes}, byte-identical={same}")
