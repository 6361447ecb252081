"""Batch experiment driver.

Subcommands:
  run       execute configured protocol runs; emit transcripts and an
            outcome-frequency summary
  detect    forgery-detection estimates against the closed forms
  fairness  ideal-vs-hybrid total-variation audits for abort cases
  nash      per-deviation expected-utility verdicts and gamma bounds

Configuration lives in an INI file (see README); command-line flags
override the [experiment] section.  Exit status is 0 when every pass/fail
column passes, 1 when any fails, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from pathlib import Path

from . import analysis, reports
from .adversary import (
    AbortAt,
    AbortAtRevelation,
    AbortIfCertain,
    AdversaryStrategy,
    ForgeArbitraryQubit,
    Honest,
    SwapShares,
)
from .analysis import (
    AT_R,
    BEFORE_R,
    DETECTION_MP_VARIANT_NOTE,
    MpAbortCase,
    Utilities,
    XorAbortCase,
)
from .protocols import (
    QEP,
    QEP2,
    QMP,
    QRMP,
    ConfigurationError,
    GreaterThanInputs,
    MillionaireInputs,
    XorInputs,
)
from .quantum import P1, P2, PureQubitSpec

DEFAULT_TRIALS = 100_000
DEFAULT_SEED = 1729


class CliConfigError(Exception):
    """Configuration problem; message names the offending field."""


def _load_config(path: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise CliConfigError(f"config file not found: {path}")
    return parser


def _experiment(cfg: configparser.ConfigParser, args) -> dict:
    section = cfg["experiment"] if cfg.has_section("experiment") else {}
    exp = {
        "protocol": section.get("protocol", ""),
        "trials": args.trials if args.trials is not None else int(section.get("trials", DEFAULT_TRIALS)),
        "seed": args.seed if args.seed is not None else int(section.get("seed", DEFAULT_SEED)),
        "gamma": section.get("gamma"),
        "workers": int(section.get("workers", 1)),
        "tv_threshold": float(section.get("tv_threshold", 0.02)),
        "transcript_trials": int(section.get("transcript_trials", 100)),
    }
    if exp["protocol"] not in (QMP, QRMP, QEP, QEP2):
        raise CliConfigError(
            f"experiment.protocol must be one of qmp/qrmp/qep/qep2, got {exp['protocol']!r}"
        )
    if exp["trials"] < 1:
        raise CliConfigError("experiment.trials must be >= 1")
    if exp["protocol"] != QMP:
        if exp["gamma"] is None:
            raise CliConfigError("experiment.gamma is required for protocol "
                                 f"{exp['protocol']} (field: gamma)")
        exp["gamma"] = float(exp["gamma"])
        if not 0.0 < exp["gamma"] < 1.0:
            raise CliConfigError(f"experiment.gamma must be in (0, 1), got {exp['gamma']}")
    else:
        exp["gamma"] = float(exp["gamma"]) if exp["gamma"] is not None else None
    return exp


def _inputs(cfg: configparser.ConfigParser, protocol: str):
    section = cfg["inputs"] if cfg.has_section("inputs") else {}
    try:
        if protocol == QMP:
            return MillionaireInputs(
                int(section["i"]), int(section["j"]), int(section["m"])
            )
        if protocol == QRMP:
            return GreaterThanInputs(int(section["i"]), int(section["j"]))
        if section.get("distribution", "") == "uniform":
            return "uniform"
        return XorInputs(int(section["x"]), int(section["y"]))
    except KeyError as missing:
        raise CliConfigError(f"inputs section is missing field {missing}") from None


def _parse_spec(text: str):
    text = text.strip()
    if text == "haar":
        return "haar"
    parts = text.split(",")
    if len(parts) != 2:
        raise CliConfigError(f"strategy.spec must be 'haar' or 'alpha,beta', got {text!r}")
    return PureQubitSpec(complex(parts[0]), complex(parts[1]))


def _parse_round(text: str):
    text = text.strip()
    return text if text == "uniform" else int(text)


def _strategy(cfg: configparser.ConfigParser, party: str) -> AdversaryStrategy:
    name = f"strategy.{party.lower()}"
    if not cfg.has_section(name):
        return Honest()
    section = cfg[name]
    kind = section.get("kind", "honest")
    if kind == "honest":
        return Honest()
    if kind == "forge":
        return ForgeArbitraryQubit(
            round=_parse_round(section.get("round", "uniform")),
            spec=_parse_spec(section.get("spec", "haar")),
        )
    if kind == "swap":
        return SwapShares(round=_parse_round(section.get("round", "uniform")))
    if kind == "abort_at":
        return AbortAt(round=_parse_round(section.get("round", "uniform")))
    if kind == "abort_at_revelation":
        return AbortAtRevelation()
    if kind == "abort_if_certain":
        return AbortIfCertain()
    raise CliConfigError(f"{name}.kind unknown: {kind!r}")


def _utilities(cfg: configparser.ConfigParser, party: str) -> Utilities:
    name = f"utilities.{party.lower()}"
    if not cfg.has_section(name):
        raise CliConfigError(f"section [{name}] is required for rational analyses")
    section = cfg[name]
    try:
        return Utilities(
            tn=float(section["tn"]),
            tt=float(section["tt"]),
            nn=float(section["nn"]),
            nt=float(section["nt"]),
        )
    except KeyError as missing:
        raise CliConfigError(f"[{name}] is missing field {missing}") from None


def _digest(cfg: configparser.ConfigParser, exp: dict) -> str:
    merged = {sect: dict(cfg[sect]) for sect in cfg.sections()}
    merged["_effective"] = {k: str(v) for k, v in exp.items()}
    return reports.config_digest(merged)


def _header(exp: dict, digest: str) -> list[str]:
    return [
        f"config_sha256 = {digest}",
        f"seed = {exp['seed']}",
        f"trials = {exp['trials']}",
    ]


def _write(out_dir: str, name: str, text: str) -> Path:
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    target = path / name
    target.write_text(text)
    return target


# ---------------------------------------------------------------------------
# subcommands


def cmd_run(cfg, args) -> int:
    exp = _experiment(cfg, args)
    protocol = exp["protocol"]
    inputs = _inputs(cfg, protocol)
    if inputs == "uniform":
        raise CliConfigError("run requires fixed inputs (field: inputs.distribution)")
    s1 = _strategy(cfg, P1)
    s2 = _strategy(cfg, P2)
    digest = _digest(cfg, exp)
    trials, seed = exp["trials"], exp["seed"]

    from collections import Counter

    counts = Counter()
    transcript_lines: list[str] = []
    keep = min(trials, exp["transcript_trials"])
    for t in range(trials):
        outcome, transcript, _schedule, _f = analysis.simulate_run(
            protocol, s1, s2, inputs, exp["gamma"], seed, t
        )
        counts[outcome] += 1
        if t < keep:
            transcript_lines.extend(transcript.to_lines(t))

    rows = [
        {
            "outcome": reports.world_outcome_label(outcome),
            "count": counts[outcome],
            "frequency": counts[outcome] / trials,
        }
        for outcome in sorted(counts, key=reports.world_outcome_label)
    ]
    text = reports.render_rows(
        rows, ["outcome", "count", "frequency"], _header(exp, digest), args.format
    )
    summary = _write(args.out, f"summary.{_ext(args.format)}", text)
    log = _write(args.out, "transcripts.log", "\n".join(transcript_lines) + "\n")
    print(text, end="")
    print(f"wrote {summary} and {log}")
    return 0


def _ext(fmt_name: str) -> str:
    return "csv" if fmt_name == "csv" else "txt"


def _detect_points(cfg, exp, inputs):
    """(label, inputs, gamma, strategy, forger, closed_form, note) rows."""
    protocol = exp["protocol"]
    section = cfg["detect"] if cfg.has_section("detect") else {}
    forger = section.get("forger", P1)
    if forger not in (P1, P2):
        raise CliConfigError(f"detect.forger must be P1 or P2, got {forger!r}")
    specs = [_parse_spec(s) for s in section.get("specs", "haar").split(";")]
    base = _strategy(cfg, forger)
    if isinstance(base, Honest):
        base = ForgeArbitraryQubit()
    if not isinstance(base, (ForgeArbitraryQubit, SwapShares)):
        raise CliConfigError(
            "detect requires a forging strategy for the forger (kind forge or swap)"
        )
    points = []
    if protocol == QMP:
        if isinstance(inputs, MillionaireInputs):
            jm_pairs = [(inputs.j, inputs.m)] if forger == P1 else [(inputs.i, inputs.m)]
        else:
            raise CliConfigError("detect on qmp needs inputs i, j, m")
        for spec in specs:
            strategy = (
                base
                if isinstance(base, SwapShares)
                else ForgeArbitraryQubit(round=base.round, spec=spec)
            )
            for idx, m in jm_pairs:
                closed = analysis.detection_prob_mp_nonrational(idx, m)
                note = DETECTION_MP_VARIANT_NOTE if forger == P2 else ""
                points.append(
                    (f"qmp(k={idx},m={m})", inputs, None, strategy, forger, closed, note)
                )
        return points
    gammas = [float(g) for g in section.get("gammas", str(exp["gamma"])).split(",")]
    closed = (
        analysis.detection_prob_rational_mp()
        if protocol == QRMP
        else analysis.detection_prob_xor()
    )
    for spec in specs:
        strategy = (
            base
            if isinstance(base, SwapShares)
            else ForgeArbitraryQubit(round=base.round, spec=spec)
        )
        spec_label = "haar" if spec == "haar" else "fixed"
        for gamma in gammas:
            points.append(
                (f"{protocol}(gamma={gamma},spec={spec_label})", inputs, gamma,
                 strategy, forger, closed, "")
            )
    return points


def cmd_detect(cfg, args) -> int:
    exp = _experiment(cfg, args)
    inputs = _inputs(cfg, exp["protocol"])
    if inputs == "uniform":
        inputs = XorInputs(2, 1)
    digest = _digest(cfg, exp)
    rows = []
    all_pass = True
    for label, pt_inputs, gamma, strategy, forger, closed, note in _detect_points(cfg, exp, inputs):
        est = analysis.estimate_detection(
            exp["protocol"],
            strategy,
            pt_inputs,
            exp["trials"],
            exp["seed"],
            gamma=gamma,
            forger=forger,
            workers=exp["workers"],
        )
        z = abs(est.estimate - closed) / est.stderr if est.stderr > 0 else 0.0
        ok = abs(est.estimate - closed) <= 3.0 * est.stderr if est.stderr > 0 else (
            est.estimate == closed
        )
        all_pass = all_pass and ok
        rows.append(
            {
                "experiment": label,
                "estimate": est.estimate,
                "stderr": est.stderr,
                "closed_form": closed,
                "z": z,
                "pass": "pass" if ok else "FAIL",
                "note": note,
            }
        )
    text = reports.render_rows(
        rows,
        ["experiment", "estimate", "stderr", "closed_form", "z", "pass", "note"],
        _header(exp, digest),
        args.format,
    )
    _write(args.out, f"detect.{_ext(args.format)}", text)
    print(text, end="")
    return 0 if all_pass else 1


def _fairness_cases(cfg, exp, inputs):
    section = cfg["fairness"] if cfg.has_section("fairness") else {}
    aborter = section.get("aborter", P1)
    if aborter not in (P1, P2):
        raise CliConfigError(f"fairness.aborter must be P1 or P2, got {aborter!r}")
    if exp["protocol"] == QMP:
        if not isinstance(inputs, MillionaireInputs):
            raise CliConfigError("fairness on qmp needs inputs i, j, m")
        rounds = [int(v) for v in section.get("rounds", "1").split(",")]
        return [
            MpAbortCase(inputs.i, inputs.j, inputs.m, aborter, l) for l in rounds
        ]
    if exp["protocol"] in (QEP, QEP2):
        positions = [p.strip() for p in section.get("positions", f"{AT_R},{BEFORE_R}").split(",")]
        for p in positions:
            if p not in (AT_R, BEFORE_R):
                raise CliConfigError(f"fairness.positions entries must be at_r/before_r, got {p!r}")
        xin = inputs if isinstance(inputs, XorInputs) else "uniform"
        return [
            XorAbortCase(p, aborter, exp["gamma"], xin, exp["protocol"]) for p in positions
        ]
    raise CliConfigError("fairness audits cover qmp and qep/qep2")


def cmd_fairness(cfg, args) -> int:
    exp = _experiment(cfg, args)
    inputs = _inputs(cfg, exp["protocol"])
    digest = _digest(cfg, exp)
    threshold = exp["tv_threshold"]
    rows = []
    all_pass = True
    for case in _fairness_cases(cfg, exp, inputs):
        audit = analysis.fairness_audit(case, exp["trials"], exp["seed"], exp["workers"])
        ok = audit.tv < threshold
        all_pass = all_pass and ok
        if isinstance(case, MpAbortCase):
            label = f"qmp(i={case.i},j={case.j},m={case.m},{case.aborter}@{case.abort_round})"
        else:
            label = f"{case.variant}({case.aborter}@{case.position})"
        rows.append(
            {
                "case": label,
                "tv_distance": audit.tv,
                "threshold": threshold,
                "pass": "pass" if ok else "FAIL",
            }
        )
    text = reports.render_rows(
        rows, ["case", "tv_distance", "threshold", "pass"], _header(exp, digest), args.format
    )
    _write(args.out, f"fairness.{_ext(args.format)}", text)
    print(text, end="")
    return 0 if all_pass else 1


def cmd_nash(cfg, args) -> int:
    exp = _experiment(cfg, args)
    if exp["protocol"] not in (QRMP, QEP2):
        raise CliConfigError("nash analyses cover the rational protocols qrmp and qep2")
    u1 = _utilities(cfg, P1)
    u2 = _utilities(cfg, P2)
    for party, u in ((P1, u1), (P2, u2)):
        violation = u.r1_violation()
        if violation is not None:
            raise CliConfigError(f"utilities.{party.lower()}: {violation}")
    inputs = _inputs(cfg, exp["protocol"]) if cfg.has_section("inputs") else None
    digest = _digest(cfg, exp)
    report = analysis.nash_check(
        exp["protocol"],
        u1,
        u2,
        exp["gamma"],
        exp["trials"],
        exp["seed"],
        inputs=inputs,
        workers=exp["workers"],
    )
    rows = []
    all_pass = not report.precondition_violations
    for party in (P1, P2):
        rows.append(
            {
                "party": party,
                "deviation": "gamma_bound",
                "estimate": report.gamma_bound[party],
                "stderr": 0.0,
                "honest_utility": "",
                "verdict": "gamma_ok" if report.gamma_ok[party] else "gamma_too_large",
            }
        )
        all_pass = all_pass and report.gamma_ok[party]
    for row in report.rows:
        rows.append(
            {
                "party": row.party,
                "deviation": row.deviation,
                "estimate": row.estimate,
                "stderr": row.stderr,
                "honest_utility": row.honest_utility,
                "verdict": row.verdict,
            }
        )
        all_pass = all_pass and row.verdict == analysis.STRICTLY_DOMINATED
    header = _header(exp, digest)
    header.append(f"gamma = {exp['gamma']}")
    for note in report.notes:
        header.append(f"note: {note}")
    for violation in report.precondition_violations:
        header.append(f"precondition violation: {violation}")
    text = reports.render_rows(
        rows,
        ["party", "deviation", "estimate", "stderr", "honest_utility", "verdict"],
        header,
        args.format,
    )
    _write(args.out, f"nash.{_ext(args.format)}", text)
    print(text, end="")
    return 0 if all_pass else 1


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qfairsim",
        description="Simulator and analysis harness for fair two-party quantum protocols",
    )
    parser.add_argument("command", choices=["run", "detect", "fairness", "nash"])
    parser.add_argument("--config", required=True, help="INI experiment configuration")
    parser.add_argument("--seed", type=int, default=None, help="override experiment.seed")
    parser.add_argument("--trials", type=int, default=None, help="override experiment.trials")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--format", choices=["csv", "structured"], default="csv")
    args = parser.parse_args(argv)

    try:
        cfg = _load_config(args.config)
        handler = {
            "run": cmd_run,
            "detect": cmd_detect,
            "fairness": cmd_fairness,
            "nash": cmd_nash,
        }[args.command]
        return handler(cfg, args)
    except (CliConfigError, ConfigurationError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
