"""Command-line front end.

    qrms counterexample
    qrms profile  --measurement sharp --alpha-steps 17 --out profile.csv
    qrms simulate --measurement unsharp --seed 3 --out sim.csv
    qrms check    --trials 1000 --dim 2
    qrms dilate

Exit codes: 0 success, 1 validation error, 2 property-check failure.
CSV goes to ``--out`` (with a JSON summary next to it, same stem) or to
stdout with the summary on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .counterexample import MOMENT_M, OBSERVABLE_A, PSI0
from .errors import (
    check_requirements,
    dilation_noise_norm,
    eps_bar,
    eps_no,
    error_profile,
    profile,
    random_instance,
)
from .linalg import expectation, spectral_decompose
from .polarimeter import BeamConfig, run_experiment
from .povm import (
    InvalidPovmError,
    Povm,
    dilation_residuals,
    naimark_dilate,
    outcome_distribution,
    pi2_unsharp,
    sharp_from_observable,
)
from .threestate import TERM_NAMES, assemble, decompose

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PROPERTY = 2

SIMULATE_COLUMNS = ("alpha_rad", "eps_est", "eps_sigma") + TERM_NAMES


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _int_at_least(lo: int):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if value < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}")
        return value

    return parse


def _fmt(x: float) -> str:
    return repr(float(x))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(csv_text: str, summary: dict, out: str | None) -> None:
    summary_text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(csv_text)
        sys.stderr.write(summary_text)
        return
    path = Path(out)
    try:
        path.write_text(csv_text, encoding="utf-8", newline="")
        path.with_suffix(".json").write_text(summary_text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from None
    sys.stdout.write(summary_text)


def _write_json(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc}") from None


def _povm(kind: str) -> Povm:
    return sharp_from_observable(MOMENT_M) if kind == "sharp" else pi2_unsharp()


def _alpha_grid(steps: int) -> np.ndarray:
    return np.linspace(0.0, 2 * math.pi, steps)


def cmd_counterexample(args) -> int:
    p1 = sharp_from_observable(MOMENT_M)
    p2 = pi2_unsharp()
    out = sys.stdout
    np.set_printoptions(precision=6, suppress=True)
    out.write(f"A =\n{OBSERVABLE_A.real}\nM =\n{MOMENT_M.real}\n|psi> = {PSI0.real}\n\n")

    rows = []
    for name, p in (("Pi1 (sharp)", p1), ("Pi2 (unsharp)", p2)):
        no = eps_no(OBSERVABLE_A, p, PSI0)
        bar, arg = eps_bar(OBSERVABLE_A, p, PSI0)
        rows.append({"povm": name, "eps_no": no, "eps_bar": bar, "argmax_alpha": arg})
        out.write(f"{name:14s} eps_NO = {no:.12f}   eps_bar = {bar:.12f} (alpha = {arg:.9f})\n")

    out.write("\naccuracy in |psi>:\n")
    spec_a = spectral_decompose(OBSERVABLE_A)
    dist1 = dict(outcome_distribution(p1, PSI0))
    table = []
    for lam, proj in zip(spec_a.eigenvalues, spec_a.projectors):
        born = expectation(PSI0, proj)
        pi1 = sum(prob for x, prob in dist1.items() if abs(x - lam) <= 1e-9)
        table.append({"value": float(lam), "born_A": born, "pi1": pi1})
        out.write(f"  outcome {lam:+.6f}: <psi|P_A|psi> = {born:.6f}   Pi1 probability = {pi1:.6f}\n")
    for x, prob in dist1.items():
        out.write(f"  Pi1 outcome {x:+.6f} carries probability {prob:.6f}\n")

    if args.out:
        _write_json({"errors": rows, "accuracy": table}, args.out)
    return EXIT_OK


def cmd_profile(args) -> int:
    p = _povm(args.measurement)
    alphas = _alpha_grid(args.alpha_steps)
    eps = profile(OBSERVABLE_A, p, PSI0, alphas)
    full = error_profile(OBSERVABLE_A, p, PSI0)
    summary = {
        "measurement": args.measurement,
        "alpha_steps": args.alpha_steps,
        "eps_bar": full.eps_bar,
        "argmax_alpha": full.argmax_alpha,
    }
    _emit(_csv_text(("alpha_rad", "epsilon"), zip(alphas, eps)), summary, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        cfg = BeamConfig(rate=args.rate, duration=args.time, slice_hz=args.slice_hz, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    alphas = _alpha_grid(args.alpha_steps)
    result = run_experiment(args.measurement, alphas, cfg)
    rows = []
    for alpha, est, term in zip(alphas, result.estimates, result.terms):
        rows.append((alpha, est.epsilon, est.sigma) + term.as_tuple())
    exact = profile(OBSERVABLE_A, _povm(args.measurement), PSI0, alphas)
    summary = {
        "measurement": args.measurement,
        "alpha_steps": args.alpha_steps,
        "seed": args.seed,
        "config": cfg.to_dict(),
        "eps_bar_est": result.profile.eps_bar,
        "argmax": result.profile.argmax_alpha,
        "sigma_on_square_rows": [int(i) for i in np.flatnonzero(result.on_square)],
        "reduced_chi2_vs_exact": result.reduced_chi2(exact),
    }
    _emit(_csv_text(SIMULATE_COLUMNS, rows), summary, args.out)
    return EXIT_OK


def _equivalence(trials: int, seed: int, dim: int) -> tuple[dict, dict]:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(100,)))
    worst_dil = 0.0
    worst_three = 0.0
    for _ in range(trials):
        a, p, psi = random_instance(dim, rng)
        ref = eps_no(a, p, psi)
        worst_dil = max(worst_dil, abs(dilation_noise_norm(a, p, psi) - ref))
        worst_three = max(worst_three, abs(assemble(decompose(a, p, psi)).epsilon - ref))
    dil = {"trials": trials, "max_abs_diff": worst_dil, "tolerance": 1e-9, "passed": worst_dil <= 1e-9}
    three = {"trials": trials, "max_abs_diff": worst_three, "tolerance": 1e-10, "passed": worst_three <= 1e-10}
    return dil, three


def _broken_povm_validation() -> dict:
    half = np.eye(2) / 2
    try:
        Povm((1.0, -1.0), (half, half / 2))
    except InvalidPovmError as exc:
        return {"passed": False, "error": str(exc)}
    return {"passed": True, "error": None}


def cmd_check(args) -> int:
    report = check_requirements(args.trials, args.seed, args.dim)
    dil, three = _equivalence(args.trials, args.seed, args.dim)
    out = {
        "trials": args.trials,
        "seed": args.seed,
        "dim": args.dim,
        "requirements": report.to_dict(),
        "dilation_equivalence": dil,
        "three_state_equivalence": three,
    }
    if args.inject_broken_povm:
        out["validation"] = _broken_povm_validation()
    ok_props = report.passed and dil["passed"] and three["passed"]
    ok_valid = out.get("validation", {"passed": True})["passed"]
    out["passed"] = ok_props and ok_valid
    _write_json(out, args.out)
    if not ok_valid:
        return EXIT_VALIDATION
    return EXIT_OK if ok_props else EXIT_PROPERTY


def cmd_dilate(args) -> int:
    kinds = [args.measurement] if args.measurement else ["sharp", "unsharp"]
    rng = np.random.default_rng(np.random.SeedSequence(args.seed, spawn_key=(200,)))
    report = {}
    ok = True
    for kind in kinds:
        p = _povm(kind)
        dil = naimark_dilate(p)
        res = dilation_residuals(dil, p)
        worst_dist = 0.0
        worst_noise = 0.0
        states = [PSI0] + [rng.normal(size=2) + 1j * rng.normal(size=2) for _ in range(args.trials)]
        for psi in states:
            psi = psi / np.linalg.norm(psi)
            target = np.array([prob for _, prob in outcome_distribution(p, psi)])
            worst_dist = max(worst_dist, float(np.max(np.abs(dil.probabilities(psi) - target))))
            worst_noise = max(worst_noise, abs(dil.noise_norm(OBSERVABLE_A, psi) - eps_no(OBSERVABLE_A, p, psi)))
        res.update({"distribution": worst_dist, "noise_vs_eps_no": worst_noise, "states": len(states)})
        res["passed"] = res["isometry"] <= 1e-10 and res["effects"] <= 1e-9 and worst_dist <= 1e-9 and worst_noise <= 1e-9
        ok = ok and res["passed"]
        report[kind] = res
    _write_json(report, args.out)
    return EXIT_OK if ok else EXIT_PROPERTY


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qrms", description="Noise-operator q-rms error toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("counterexample", help="noise-operator error vs locally uniform error on the two-level example")
    p.add_argument("--out", help="also write a JSON report here")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("profile", help="exact error profile on a uniform alpha grid over [0, 2 pi]")
    p.add_argument("--measurement", choices=("sharp", "unsharp"), default="sharp")
    p.add_argument("--alpha-steps", type=_int_at_least(2), default=17)
    p.add_argument("--out")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("simulate", help="Monte Carlo polarimeter run with the three-state method")
    p.add_argument("--measurement", choices=("sharp", "unsharp"), default="sharp")
    p.add_argument("--rate", type=_positive_float, default=350.0, help="counts per second (default 350)")
    p.add_argument("--time", type=_positive_float, default=100.0, help="seconds per setting (default 100)")
    p.add_argument("--slice-hz", type=_positive_float, default=10.0, help="randomization frequency (default 10)")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--alpha-steps", type=_int_at_least(2), default=17)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check", help="randomized requirement and equivalence checks")
    p.add_argument("--trials", type=_int_at_least(1), default=1000)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--dim", type=int, choices=(2, 3, 4), default=2)
    p.add_argument("--out")
    p.add_argument("--inject-broken-povm", action="store_true", help="also validate a POVM whose effects do not sum to 1")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("dilate", help="Naimark dilation residuals for the sharp and unsharp POVMs")
    p.add_argument("--measurement", choices=("sharp", "unsharp"))
    p.add_argument("--trials", type=_int_at_least(0), default=1000)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dilate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"qrms: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
