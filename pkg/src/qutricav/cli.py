"""Command-line front end.

Subcommands: ``verify`` (self-checks of the pulse algebra and stage states),
``ideal`` (dissipation-free run for given weights), ``evolve`` (one Lindblad
run), ``sweep`` (fidelity over the (T, kappa_inv) grid), and ``schedule``
(segment listing plus the timing budget).

Exit codes: 0 success, 1 verification failure, 2 input error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .config import ConfigError, LoadedConfig, load_config
from .dynamics import IntegrationError, density_from_state, reduced_diagnostics
from .experiments import (
    run_single,
    run_sweep,
    single_run_record,
    sweep_record,
    timing_report,
    write_csv,
    write_heatmap,
    write_json,
)
from .hilbert import SubsystemLayout
from .protocol import (
    ProtocolError,
    PulseSegment,
    Schedule,
    WeightVector,
    build_schedule,
    closed_form_oracle_check,
    format_schedule,
    ideal_run,
    stage_states,
    state_mismatch,
    target_state,
    verify_pulse_chains,
)
from .tolerances import DEFAULT, Tolerances

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_NUMERICAL = 3


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

@dataclass
class CheckRow:
    name: str
    error: float
    limit: float

    def __post_init__(self) -> None:
        self.error = float(self.error)
        self.limit = float(self.limit)

    @property
    def passed(self) -> bool:
        return self.error <= self.limit


def _drop_stage7_pulse(schedule: Schedule) -> Schedule:
    """Fault hook: remove stage 7's sign-fixing pulse (checkpoint 7 must fail)."""
    blocks = tuple(
        b
        for b in schedule.blocks
        if not (
            b.stage == 7
            and any(isinstance(s, PulseSegment) for tr in b.tracks for s in tr)
        )
    )
    return Schedule(schedule.mode, blocks)


_FAULTS = {"stage7-pulse-drop": _drop_stage7_pulse}


def run_verification(
    seed: int = 42,
    fault: str | None = None,
    tol: Tolerances = DEFAULT,
    n_weights: int = 10,
    n_equivalence: int = 200,
) -> list[CheckRow]:
    """All protocol self-checks as one pass/fail row list."""
    layout = SubsystemLayout()
    rows: list[CheckRow] = []

    chains = verify_pulse_chains(layout, tol)
    per_chain: dict[str, float] = {}
    for arrow in chains.arrows:
        per_chain[arrow.chain] = max(per_chain.get(arrow.chain, 0.0), arrow.error)
    for name, err in per_chain.items():
        rows.append(CheckRow(f"pulse chain: {name}", err, tol.chain))

    equiv = closed_form_oracle_check(layout, n_equivalence, seed, tol)
    rows.append(
        CheckRow("closed form vs propagator: cavity windows",
                 equiv.max_cavity_error, tol.oracle)
    )
    rows.append(
        CheckRow("closed form vs propagator: pulses", equiv.max_pulse_error, tol.oracle)
    )

    schedule = build_schedule("serial")
    if fault is not None:
        schedule = _FAULTS[fault](schedule)

    rng = np.random.default_rng(seed)
    weights = [WeightVector.random(rng) for _ in range(n_weights)]
    for path in ("closed_form", "oracle"):
        worst_stage = 0.0
        worst_overlap = 0.0
        worst_vacuum = 0.0
        for w in weights:
            result = ideal_run(w, layout, path=path, schedule=schedule, check=False, tol=tol)
            refs = stage_states(w, layout)
            for stage, state in result.checkpoints.items():
                worst_stage = max(worst_stage, state_mismatch(state, refs[stage]))
            worst_overlap = max(
                worst_overlap, 1.0 - result.overlap_with(target_state(w, layout, tol))
            )
            vacuum = sum(
                abs(result.final[i]) ** 2
                for i in range(layout.dim)
                if layout.label_of(i)[2] == 0
            )
            worst_vacuum = max(worst_vacuum, 1.0 - vacuum)
        label = "closed form" if path == "closed_form" else "propagator"
        rows.append(
            CheckRow(f"stage checkpoints, {n_weights} random weights ({label})",
                     worst_stage, tol.checkpoint)
        )
        rows.append(
            CheckRow(f"final overlap deficit ({label})", worst_overlap, tol.overlap)
        )
        rows.append(
            CheckRow(f"cavity vacuum deficit ({label})", worst_vacuum, tol.overlap)
        )
    return rows


def _cmd_verify(args: argparse.Namespace) -> int:
    rows = run_verification(seed=args.seed, fault=args.inject_fault)
    ok = all(r.passed for r in rows)
    if args.json:
        payload = {
            "seed": args.seed,
            "passed": ok,
            "checks": [
                {"name": r.name, "error": r.error, "limit": r.limit, "passed": r.passed}
                for r in rows
            ],
        }
        print(json.dumps(payload, indent=2))
    else:
        width = max(len(r.name) for r in rows)
        print(f"{'check':<{width}}  {'max error':>12}  {'limit':>9}  result")
        for r in rows:
            verdict = "pass" if r.passed else "FAIL"
            print(f"{r.name:<{width}}  {r.error:>12.3e}  {r.limit:>9.0e}  {verdict}")
        print(f"seed = {args.seed}")
        print("all checks passed" if ok else "VERIFICATION FAILED")
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


# ---------------------------------------------------------------------------
# ideal
# ---------------------------------------------------------------------------

def _parse_weight(text: str, name: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise ConfigError(f"--{name}: cannot parse complex number {text!r}") from None


def _cmd_ideal(args: argparse.Namespace) -> int:
    raw = WeightVector(
        _parse_weight(args.alpha, "alpha"),
        _parse_weight(args.beta, "beta"),
        _parse_weight(args.gamma, "gamma"),
    )
    deviation = raw.norm_error
    try:
        w = raw.normalized()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if deviation > 1e-9:
        print(f"note: weights normalized (squared-norm deviation {deviation:.3e})",
              file=sys.stderr)

    layout = SubsystemLayout(args.n_cavity)
    result = ideal_run(w, layout, path="closed_form")
    overlap = result.overlap_with(target_state(w, layout))
    diag = reduced_diagnostics(density_from_state(result.final), layout)

    if args.json:
        amps = [
            {"q1": l1, "q2": l2, "n": n, "re": result.final[i].real,
             "im": result.final[i].imag}
            for i in range(layout.dim)
            for (l1, l2, n) in [layout.label_of(i)]
            if abs(result.final[i]) > 1e-9
        ]
        print(json.dumps({
            "weights": {k: {"re": getattr(w, k).real, "im": getattr(w, k).imag}
                        for k in ("alpha", "beta", "gamma")},
            "amplitudes": amps,
            "overlap_with_target": overlap,
            "cavity_vacuum_population": diag.cavity_vacuum_population,
            "purities": {"q1": diag.purity_q1, "q2": diag.purity_q2,
                         "cavity": diag.purity_cavity},
        }, indent=2))
        return EXIT_OK

    print("final state amplitudes (|q1 q2 n>, entries above 1e-9):")
    for i in range(layout.dim):
        amp = result.final[i]
        if abs(amp) > 1e-9:
            l1, l2, n = layout.label_of(i)
            print(f"  |{l1}{l2}{n}>  {amp.real:+.10f}{amp.imag:+.10f}j")
    print(f"overlap with entangled target: {overlap:.6f}")
    print(f"cavity vacuum population:      {diag.cavity_vacuum_population:.10f}")
    print(f"qutrit 1 populations: {[round(p, 10) for p in diag.qutrit1_populations]}")
    print(f"qutrit 2 populations: {[round(p, 10) for p in diag.qutrit2_populations]}")
    print(f"reduced purities: q1={diag.purity_q1:.6f} q2={diag.purity_q2:.6f} "
          f"cavity={diag.purity_cavity:.6f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# evolve / sweep / schedule
# ---------------------------------------------------------------------------

def _load(args: argparse.Namespace) -> LoadedConfig:
    overrides = list(args.set or ())
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    return load_config(args.config, tuple(overrides))


def _cmd_evolve(args: argparse.Namespace) -> int:
    loaded = _load(args)
    cfg = loaded.sim
    result = run_single(cfg, tol=loaded.tolerances)
    record = single_run_record(cfg, result)
    out = args.out or "qutricav_evolve.json"
    write_json(record, out)
    if args.json:
        print(json.dumps(record, indent=2, sort_keys=True))
    else:
        print(f"T = {cfg.t_us:g} us, kappa_inv = {cfg.kappa_inv_us:g} us")
        print(f"fidelity = {result.fidelity:.10f}")
        d = result.diagnostics
        print(f"cavity vacuum population = {d.cavity_vacuum_population:.10f}")
        print(f"worst trace error  = {result.run.worst_trace_error:.3e}")
        print(f"worst herm error   = {result.run.worst_herm_error:.3e}")
        print(f"min eigenvalue     = {result.run.min_eigenvalue:.3e}")
        print(f"record written to {out}")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    loaded = _load(args)
    result = run_sweep(loaded.sim)
    prefix = args.out or "qutricav_sweep"
    write_csv(result, f"{prefix}.csv")
    write_heatmap(result, f"{prefix}.dat")
    write_json(sweep_record(result), f"{prefix}.json")
    if args.json:
        print(json.dumps(sweep_record(result), indent=2, sort_keys=True))
    else:
        for r in result.rows:
            print(f"T={r.t_us:g} kappa_inv={r.kappa_inv_us:g} "
                  f"fidelity={r.fidelity:.10f}")
        grid = result.fidelity_grid()
        print(f"{len(result.rows)} grid points; fidelity range "
              f"[{grid.min():.10f}, {grid.max():.10f}]")
        print(f"files written: {prefix}.csv {prefix}.dat {prefix}.json")
    return EXIT_OK


def _cmd_schedule(args: argparse.Namespace) -> int:
    loaded = _load(args)
    cfg = loaded.sim
    schedule = cfg.schedule()
    report = timing_report(cfg)
    if args.json:
        print(json.dumps({
            "mode": schedule.mode,
            "segments": format_schedule(schedule).splitlines(),
            "terms_ns": list(report.terms_ns),
            "total_ns": report.total * 1e9,
            "lifetime_ratios": report.lifetime_ratios,
        }, indent=2))
        return EXIT_OK
    print(f"# mode={schedule.mode}")
    sys.stdout.write(format_schedule(schedule))
    t = report.terms_ns
    print(f"pulses 0-1: {t[0]:.2f} ns, pulses 1-2: {t[1]:.2f} ns, "
          f"cavity q1: {t[2]:.2f} ns, cavity q2: {t[3]:.2f} ns, "
          f"retuning: {t[4]:.2f} ns")
    for name, ratio in report.lifetime_ratios.items():
        print(f"{name} / total = {ratio:.1f}")
    print(f"total {report.total * 1e9:.2f} ns")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser / entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qutricav",
        description="Two-qutrit cavity entanglement simulator",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="path to a key = value config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config entry (repeatable)")
        p.add_argument("--out", help="output path (or prefix for sweep)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--json", action="store_true",
                       help="machine-readable output")

    p_verify = sub.add_parser("verify", help="run the protocol self-checks")
    p_verify.add_argument("--seed", type=int, default=42)
    p_verify.add_argument("--json", action="store_true")
    p_verify.add_argument("--inject-fault", choices=sorted(_FAULTS),
                          help=argparse.SUPPRESS)
    p_verify.set_defaults(func=_cmd_verify)

    p_ideal = sub.add_parser("ideal", help="dissipation-free run for given weights")
    p_ideal.add_argument("--alpha", required=True)
    p_ideal.add_argument("--beta", required=True)
    p_ideal.add_argument("--gamma", required=True)
    p_ideal.add_argument("--n-cavity", type=int, default=3)
    p_ideal.add_argument("--json", action="store_true")
    p_ideal.set_defaults(func=_cmd_ideal)

    p_evolve = sub.add_parser("evolve", help="single Lindblad run")
    common(p_evolve)
    p_evolve.set_defaults(func=_cmd_evolve)

    p_sweep = sub.add_parser("sweep", help="fidelity over the (T, kappa_inv) grid")
    common(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_schedule = sub.add_parser("schedule", help="print the segment list and timing")
    common(p_schedule)
    p_schedule.set_defaults(func=_cmd_schedule)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except (IntegrationError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ProtocolError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
