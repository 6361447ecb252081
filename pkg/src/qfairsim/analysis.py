"""Closed forms, ideal-world oracles, Monte Carlo estimators and
rational-setting checkers for the fair two-party protocols.

Estimators distribute trials over workers by index range; every trial
derives its four RNG streams (heap, dealer, per-party strategy) plus an
ideal-world stream from (seed, trial index), and all aggregation is over
integer counts, so results are bit-identical for any worker count.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Union

from .adversary import (
    UNIFORM_ROUND,
    AbortAt,
    AbortAtRevelation,
    AdversaryStrategy,
    ForgeArbitraryQubit,
    Honest,
    SwapShares,
)
from .protocols import (
    QEP,
    QEP2,
    QMP,
    QRMP,
    ConfigurationError,
    GreaterThanInputs,
    MillionaireInputs,
    OUT_NULL,
    PartyOutcome,
    RoundSchedule,
    Transcript,
    WorldOutcome,
    XorInputs,
    eval_embedded_xor,
    eval_greater_than,
    qeshare_gen,
    qrshare_gen,
    qshare_gen,
    run_qep_fair,
    run_qmp_fair,
    run_qrmp_fair,
    sample_geometric,
    sample_schedule,
    value_outcome,
)
from .quantum import P1, P2, QuantumHeap
from .rng import StreamRng

BEFORE_R = "before_r"
AT_R = "at_r"

STRICTLY_DOMINATED = "strictly-dominated"
INCONCLUSIVE = "inconclusive-at-this-sample-size"

# The counterpart closed form for a corrupted P2 is sometimes quoted with
# denominator m instead of 4m; that variant is not a probability for
# i > m/3 and the Monte Carlo estimate rejects it.
DETECTION_MP_VARIANT_NOTE = (
    "closed form (3k-1)/(4m); the variant (3k-1)/m is not a probability "
    "for k > m/3 and disagrees with the estimate"
)

# The abort-utility condition is used in the derived form
# gamma*U_TN + (1-gamma)*U_NN < U_TT; the stricter printed variant
# U_TN + (1-gamma)*U_NN < U_TT is not used.
ABORT_BOUND_VARIANT_NOTE = (
    "fairness bound from gamma*U_TN + (1-gamma)*U_NN < U_TT, i.e. "
    "gamma < (U_TT-U_NN)/(U_TN-U_NN)"
)


class UtilityOrderError(ValueError):
    """The utility values violate the required preference ordering."""


class NoValidGammaError(ValueError):
    """No gamma in (0, 1) satisfies the fairness condition."""


@dataclass(frozen=True)
class Utilities:
    """One party's payoffs: tn = alone-learns, tt = both-learn,
    nn = nobody-learns, nt = alone-excluded."""

    tn: float
    tt: float
    nn: float
    nt: float

    def r1_violation(self) -> Optional[str]:
        if not self.tn > self.tt:
            return f"U^TN > U^TT violated ({self.tn} <= {self.tt})"
        if not self.tt > self.nn:
            return f"U^TT > U^NN violated ({self.tt} <= {self.nn})"
        if not self.nn > self.nt:
            return f"U^NN > U^NT violated ({self.nn} <= {self.nt})"
        return None

    def require_r1(self) -> None:
        violation = self.r1_violation()
        if violation is not None:
            raise UtilityOrderError(violation)


@dataclass(frozen=True)
class OutcomeDistribution:
    """Empirical distribution over world outcomes."""

    support: dict
    trials: int

    @classmethod
    def from_counter(cls, counts: Counter, trials: int) -> "OutcomeDistribution":
        support = {outcome: n / trials for outcome, n in counts.items()}
        total = sum(support.values())
        if abs(total - 1.0) > 1e-9:
            raise AssertionError(f"outcome frequencies sum to {total}")
        return cls(support, trials)


def tv_distance(a: OutcomeDistribution, b: OutcomeDistribution) -> float:
    """Total variation distance, half the L1 gap over the joint support."""
    keys = set(a.support) | set(b.support)
    return 0.5 * sum(abs(a.support.get(k, 0.0) - b.support.get(k, 0.0)) for k in keys)


# ---------------------------------------------------------------------------
# closed forms


def detection_prob_mp_nonrational(secret_index: int, m: int) -> float:
    """Probability that the honest party catches a uniform-round forger in
    the fixed-revelation protocol before or at its own revelation round
    ``secret_index``: off-round rounds detect with 3/4, the revelation round
    with 1/2, and rounds past it do not count."""
    if not 1 <= secret_index <= m:
        raise ConfigurationError(
            f"secret index must be in [1, m={m}], got {secret_index}"
        )
    return (3.0 * secret_index - 1.0) / (4.0 * m)


def detection_prob_rational_mp() -> float:
    """Per-round forgery detection probability in the hidden-schedule
    greater-than protocol (only the fourth Bell outcome is evidence)."""
    return 0.25


def detection_prob_xor() -> float:
    """Per-round forgery detection probability in the embedded-XOR protocol
    (two of four Bell outcomes are evidence)."""
    return 0.5


def expected_abort_utility_rational_mp(u: Utilities, gamma: float) -> float:
    """Expected utility of declaring an abort in the hidden-schedule
    greater-than protocol: the declared round is the revelation round with
    probability gamma (alone-learns), otherwise nobody learns."""
    u.require_r1()
    _require_gamma(gamma)
    return u.nn * (1.0 - gamma) + u.tn * gamma


def gamma_bound_rational_mp(u: Utilities) -> float:
    """Largest gamma for which aborting the hidden-schedule greater-than
    protocol is unprofitable: gamma < (U_TT - U_NN)/(U_TN - U_NN)."""
    u.require_r1()
    return (u.tt - u.nn) / (u.tn - u.nn)


def expected_abort_utility_xor(u: Utilities, gamma: float, case: str) -> float:
    """Expected utility of the first party aborting the rational
    embedded-XOR protocol, conditioned on its input row.  Rows x1 and x2
    give the same expression; row x3 makes both outputs correct."""
    u.require_r1()
    _require_gamma(gamma)
    if case == "x3":
        return u.tt
    if case != "x1_or_x2":
        raise ConfigurationError(f"case must be 'x1_or_x2' or 'x3', got {case!r}")
    return (1.0 + gamma) / 4.0 * (u.tn + u.tt) + (1.0 - gamma) / 4.0 * (u.nn + u.nt)


def fairness_gamma_bound_xor(u: Utilities) -> float:
    """Largest gamma for which aborting the rational embedded-XOR protocol
    is unprofitable:
    gamma < (3*U_TT - U_TN - U_NN - U_NT) / (U_TN + U_TT - U_NN - U_NT).
    Always < 1 when defined; raises when no gamma in (0, 1) works."""
    u.require_r1()
    numerator = 3.0 * u.tt - u.tn - u.nn - u.nt
    denominator = u.tn + u.tt - u.nn - u.nt
    if numerator < 0.0:
        raise NoValidGammaError(
            f"3*U_TT - U_TN - U_NN - U_NT = {numerator} < 0: no valid gamma"
        )
    return numerator / denominator


def _require_gamma(gamma: float) -> None:
    if not 0.0 < gamma < 1.0:
        raise ConfigurationError(f"gamma must be in (0, 1), got {gamma}")


# ---------------------------------------------------------------------------
# ideal-world oracles


def ideal_world_mp(
    i: int, j: int, abort: Optional[tuple[str, int]] = None
) -> WorldOutcome:
    """Trusted-party outcome for the fixed-revelation greater-than game.

    With no abort both parties receive the output.  When the corrupted
    party aborts in round l, the trusted party sends the honest party the
    function evaluated at the corrupted party's last completed round, and
    the aborter keeps its output only when its own revelation round has
    passed."""
    f = eval_greater_than(i, j)
    if abort is None:
        return WorldOutcome(value_outcome(f), value_outcome(f))
    party, l = abort
    if l < 1:
        raise ConfigurationError(f"abort round must be >= 1, got {l}")
    if party == P1:
        p1 = value_outcome(f) if l >= i else OUT_NULL
        p2 = value_outcome(f) if l > j else value_outcome(0)
    elif party == P2:
        p1 = value_outcome(f) if l > i else value_outcome(1)
        p2 = value_outcome(f) if l > j else OUT_NULL
    else:
        raise ConfigurationError(f"abort party must be P1 or P2, got {party!r}")
    return WorldOutcome(p1, p2)


def ideal_world_xor(
    x: int,
    y: int,
    abort: Optional[tuple[str, str]] = None,
    rng: Optional[random.Random] = None,
) -> WorldOutcome:
    """Trusted-party outcome for the embedded-XOR game.

    Before the revelation round the trusted party hands out decoy values
    f(x, y_hat) and f(x_hat, y) with fresh uniform hats; at the revelation
    round the aborting first party already holds the true output while the
    honest second party still gets a decoy."""
    f = eval_embedded_xor(x, y)
    if abort is None:
        return WorldOutcome(value_outcome(f), value_outcome(f))
    party, position = abort
    if position not in (BEFORE_R, AT_R):
        raise ConfigurationError(
            f"abort position must be '{BEFORE_R}' or '{AT_R}', got {position!r}"
        )
    if rng is None:
        raise ConfigurationError("aborting ideal-world runs need an rng for the hats")
    y_hat = 1 + rng.randrange(2)
    x_hat = 1 + rng.randrange(3)
    a_decoy = eval_embedded_xor(x, y_hat)
    b_decoy = eval_embedded_xor(x_hat, y)
    if party == P1:
        p1 = value_outcome(f) if position == AT_R else value_outcome(a_decoy)
        p2 = value_outcome(b_decoy)
    elif party == P2:
        p1 = value_outcome(a_decoy)
        p2 = value_outcome(b_decoy)
    else:
        raise ConfigurationError(f"abort party must be P1 or P2, got {party!r}")
    return WorldOutcome(p1, p2)


# ---------------------------------------------------------------------------
# trial plumbing

_STREAMS = 6
_HEAP, _DEALER, _STRAT1, _STRAT2, _IDEAL, _INPUTS = range(_STREAMS)


def trial_rng(seed: int, trial: int, stream: int) -> StreamRng:
    """Independent stream for one trial; reproducible for any chunking."""
    return StreamRng(((seed << 24) + trial) * _STREAMS + stream)


def _chunk_ranges(trials: int, workers: int) -> list[tuple[int, int]]:
    size = (trials + workers - 1) // workers
    return [(lo, min(lo + size, trials)) for lo in range(0, trials, size)]


def _run_chunks(fn, payload, trials: int, seed: int, workers: int) -> list:
    if workers <= 1:
        return [fn(payload, seed, 0, trials)]
    ranges = _chunk_ranges(trials, workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, payload, seed, lo, hi) for lo, hi in ranges]
        return [f.result() for f in futures]


def _strategies_for(deviant: str, strategy: AdversaryStrategy):
    if deviant == P1:
        return strategy, Honest()
    if deviant == P2:
        return Honest(), strategy
    raise ConfigurationError(f"deviant party must be P1 or P2, got {deviant!r}")


def _play(
    protocol: str,
    s1: AdversaryStrategy,
    s2: AdversaryStrategy,
    inputs,
    gamma: Optional[float],
    seed: int,
    t: int,
    schedule: Optional[RoundSchedule] = None,
    dealer_rng: Optional[random.Random] = None,
    rng1: Optional[random.Random] = None,
    rng2: Optional[random.Random] = None,
) -> tuple[WorldOutcome, Transcript, Optional[RoundSchedule], int]:
    """One protocol execution with trial-derived streams.  Returns the
    outcome, transcript, schedule (None for qmp) and the true output.
    Callers that pre-consume dealer or strategy draws (schedule
    conditioning, round resolution) pass those streams back in so the
    in-run draws continue them."""
    heap = QuantumHeap(trial_rng(seed, t, _HEAP))
    dealer = dealer_rng if dealer_rng is not None else trial_rng(seed, t, _DEALER)
    if rng1 is None and not isinstance(s1, Honest):
        rng1 = trial_rng(seed, t, _STRAT1)
    if rng2 is None and not isinstance(s2, Honest):
        rng2 = trial_rng(seed, t, _STRAT2)
    if protocol == QMP:
        lists = qshare_gen(inputs, heap)
        out, tr = run_qmp_fair(lists, heap, s1, s2, inputs, rng1, rng2)
        return out, tr, None, eval_greater_than(inputs.i, inputs.j)
    if protocol == QRMP:
        if schedule is None:
            schedule = sample_schedule(gamma, dealer)
        lists = qrshare_gen(inputs, schedule, heap)
        out, tr = run_qrmp_fair(lists, heap, s1, s2, schedule, rng1, rng2)
        return out, tr, schedule, eval_greater_than(inputs.i, inputs.j)
    if protocol in (QEP, QEP2):
        if schedule is None:
            schedule = sample_schedule(gamma, dealer)
        lists = qeshare_gen(inputs, schedule, heap, dealer)
        out, tr = run_qep_fair(
            lists, heap, s1, s2, schedule, inputs, protocol, rng1, rng2
        )
        return out, tr, schedule, eval_embedded_xor(inputs.x, inputs.y)
    raise ConfigurationError(f"unknown protocol {protocol!r}")


def simulate_run(
    protocol: str,
    s1: AdversaryStrategy,
    s2: AdversaryStrategy,
    inputs,
    gamma: Optional[float],
    seed: int,
    trial: int,
) -> tuple[WorldOutcome, Transcript, Optional[RoundSchedule], int]:
    """Public single-run entry point with trial-derived streams; returns
    (outcome, transcript, schedule, true output)."""
    return _play(protocol, s1, s2, inputs, gamma, seed, trial)


# ---------------------------------------------------------------------------
# forgery-detection estimation


class DetectionEstimate(NamedTuple):
    estimate: float
    stderr: float
    successes: int
    scope_trials: int
    total_trials: int


def _resolve_manipulation_round(strategy: AdversaryStrategy, m: int, rng: random.Random):
    """Fix a uniform manipulation round before the run so the estimator can
    scope the trial; consumes the same stream the in-run driver would."""
    if isinstance(strategy, ForgeArbitraryQubit):
        if strategy.round == UNIFORM_ROUND:
            l = 1 + rng.randrange(m)
            return replace(strategy, round=l), l
        return strategy, int(strategy.round)
    if isinstance(strategy, SwapShares):
        if m == 1:
            return strategy, None
        if strategy.round == UNIFORM_ROUND:
            l = 1 + rng.randrange(m)
            return replace(strategy, round=l), l
        return strategy, int(strategy.round)
    raise ConfigurationError(
        f"detection estimation needs a forging strategy, got {type(strategy).__name__}"
    )


def _detection_chunk(payload, seed: int, lo: int, hi: int) -> tuple[int, int]:
    protocol, strategy, forger, inputs, gamma = payload
    successes = 0
    scope = 0
    for t in range(lo, hi):
        forger_rng = trial_rng(seed, t, _STRAT1 if forger == P1 else _STRAT2)
        dealer = trial_rng(seed, t, _DEALER)
        if protocol == QMP:
            m = inputs.m
            schedule = None
        else:
            schedule = sample_schedule(gamma, dealer)
            m = schedule.m
        resolved, forge_round = _resolve_manipulation_round(strategy, m, forger_rng)
        s1, s2 = _strategies_for(forger, resolved)
        out, tr, schedule, _f = _play(
            protocol,
            s1,
            s2,
            inputs,
            gamma,
            seed,
            t,
            schedule=schedule,
            dealer_rng=dealer,
            rng1=forger_rng if forger == P1 else None,
            rng2=forger_rng if forger == P2 else None,
        )
        if protocol == QMP:
            horizon = inputs.j if forger == P1 else inputs.i
            scope += 1
            report = tr.forgery_report_round()
            if report is not None and report <= horizon:
                successes += 1
        else:
            if forge_round is not None and forge_round <= schedule.r:
                scope += 1
                report = tr.forgery_report_round()
                if report is not None and report <= schedule.r:
                    successes += 1
    return successes, scope


def estimate_detection(
    protocol: str,
    strategy: AdversaryStrategy,
    inputs,
    trials: int,
    seed: int,
    gamma: Optional[float] = None,
    forger: str = P1,
    workers: int = 1,
) -> DetectionEstimate:
    """Frequency with which the honest party reports forgery within its
    incentive horizon (its own revelation round when that is fixed, the
    hidden revelation round otherwise).

    In the fixed-revelation protocol every trial counts and late detections
    are failures, matching the uniform average over manipulation rounds.
    In the hidden-schedule protocols the frequency is taken over trials
    whose manipulation round is at most r.
    """
    if trials < 1:
        raise ConfigurationError("trials must be >= 1")
    if protocol != QMP and gamma is None:
        raise ConfigurationError("gamma is required for hidden-schedule protocols")
    payload = (protocol, strategy, forger, inputs, gamma)
    parts = _run_chunks(_detection_chunk, payload, trials, seed, workers)
    successes = sum(p[0] for p in parts)
    scope = sum(p[1] for p in parts)
    if scope == 0:
        return DetectionEstimate(0.0, 0.0, 0, 0, trials)
    p_hat = successes / scope
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / scope)
    return DetectionEstimate(p_hat, stderr, successes, scope, trials)


# ---------------------------------------------------------------------------
# fairness audits (ideal vs hybrid outcome distributions)


class MpAbortCase(NamedTuple):
    i: int
    j: int
    m: int
    aborter: str
    abort_round: int


class XorAbortCase(NamedTuple):
    position: str  # before_r | at_r
    aborter: str
    gamma: float
    inputs: Union[XorInputs, str] = "uniform"
    variant: str = QEP


class FairnessAudit(NamedTuple):
    tv: float
    hybrid: OutcomeDistribution
    ideal: OutcomeDistribution


def _conditional_schedule(position: str, gamma: float, rng: random.Random) -> RoundSchedule:
    """Schedule conditioned on where a round-1 abort lands: at the
    revelation round (r = 1) or strictly before it (r >= 2).  Geometric
    memorylessness makes the shifted draw the exact conditional."""
    if position == AT_R:
        r = 1
    else:
        r = 1 + sample_geometric(gamma, rng)
    return RoundSchedule(r, sample_geometric(gamma, rng), gamma)


def _audit_mp_chunk(payload, seed: int, lo: int, hi: int) -> tuple[Counter, Counter]:
    case: MpAbortCase = payload
    inputs = MillionaireInputs(case.i, case.j, case.m)
    strategy = AbortAt(case.abort_round)
    hybrid = Counter()
    ideal = Counter()
    s1, s2 = _strategies_for(case.aborter, strategy)
    for t in range(lo, hi):
        out, _tr, _sch, _f = _play(QMP, s1, s2, inputs, None, seed, t)
        hybrid[out] += 1
        ideal[ideal_world_mp(case.i, case.j, (case.aborter, case.abort_round))] += 1
    return hybrid, ideal


def _audit_xor_chunk(payload, seed: int, lo: int, hi: int) -> tuple[Counter, Counter]:
    case: XorAbortCase = payload
    strategy = AbortAt(1)
    hybrid = Counter()
    ideal = Counter()
    s1, s2 = _strategies_for(case.aborter, strategy)
    for t in range(lo, hi):
        input_rng = trial_rng(seed, t, _INPUTS)
        if case.inputs == "uniform":
            inputs = XorInputs(1 + input_rng.randrange(3), 1 + input_rng.randrange(2))
        else:
            inputs = case.inputs
        dealer = trial_rng(seed, t, _DEALER)
        schedule = _conditional_schedule(case.position, case.gamma, dealer)
        out, _tr, _sch, _f = _play(
            case.variant, s1, s2, inputs, case.gamma, seed, t,
            schedule=schedule, dealer_rng=dealer,
        )
        hybrid[out] += 1
        ideal_rng = trial_rng(seed, t, _IDEAL)
        ideal[ideal_world_xor(inputs.x, inputs.y, (case.aborter, case.position), ideal_rng)] += 1
    return hybrid, ideal


def fairness_audit(
    case: Union[MpAbortCase, XorAbortCase],
    trials: int,
    seed: int,
    workers: int = 1,
) -> FairnessAudit:
    """Total-variation distance between the hybrid protocol's outcome
    distribution under the case's abort and the matching trusted-party
    distribution, both estimated from ``trials`` runs."""
    if trials < 1:
        raise ConfigurationError("trials must be >= 1")
    if isinstance(case, MpAbortCase):
        fn = _audit_mp_chunk
    elif isinstance(case, XorAbortCase):
        fn = _audit_xor_chunk
    else:
        raise ConfigurationError(f"unknown audit case type {type(case).__name__}")
    parts = _run_chunks(fn, case, trials, seed, workers)
    hybrid = Counter()
    ideal = Counter()
    for h, i in parts:
        hybrid.update(h)
        ideal.update(i)
    dist_h = OutcomeDistribution.from_counter(hybrid, trials)
    dist_i = OutcomeDistribution.from_counter(ideal, trials)
    return FairnessAudit(tv_distance(dist_h, dist_i), dist_h, dist_i)


# ---------------------------------------------------------------------------
# expected-utility estimation and equilibrium checks


class UtilityEstimate(NamedTuple):
    estimate: float
    stderr: float
    class_counts: dict  # {"tt": n, "tn": n, "nt": n, "nn": n}
    trials: int


def _classify(outcome: PartyOutcome, f_true: int) -> bool:
    return outcome.kind == "value" and outcome.value == f_true


def _draw_inputs(inputs, seed: int, t: int):
    """Fixed inputs pass through; "uniform" draws both embedded-XOR indices
    uniformly, ("uniform_y", x) fixes the row and draws the column."""
    if isinstance(inputs, tuple) and len(inputs) == 2 and inputs[0] == "uniform_y":
        rng = trial_rng(seed, t, _INPUTS)
        return XorInputs(inputs[1], 1 + rng.randrange(2))
    if inputs == "uniform":
        rng = trial_rng(seed, t, _INPUTS)
        return XorInputs(1 + rng.randrange(3), 1 + rng.randrange(2))
    return inputs


def _utility_chunk(payload, seed: int, lo: int, hi: int) -> Counter:
    protocol, deviant, strategy, inputs, gamma = payload
    s1, s2 = _strategies_for(deviant, strategy)
    counts = Counter()
    for t in range(lo, hi):
        trial_inputs = _draw_inputs(inputs, seed, t)
        out, _tr, _sch, f_true = _play(protocol, s1, s2, trial_inputs, gamma, seed, t)
        mine, other = (out.p1, out.p2) if deviant == P1 else (out.p2, out.p1)
        key = ("t" if _classify(mine, f_true) else "n") + (
            "t" if _classify(other, f_true) else "n"
        )
        counts[key] += 1
    return counts


def estimate_deviation_utility(
    protocol: str,
    deviant: str,
    strategy: AdversaryStrategy,
    u: Utilities,
    inputs,
    trials: int,
    seed: int,
    gamma: Optional[float] = None,
    workers: int = 1,
) -> UtilityEstimate:
    """Monte Carlo expected utility of ``deviant`` playing ``strategy``
    against an honest counterparty.  A party scores T when it ends holding
    the true output value; forgery reports and null outputs score N, so a
    detected forger lands at U_NN."""
    if trials < 1:
        raise ConfigurationError("trials must be >= 1")
    payload = (protocol, deviant, strategy, inputs, gamma)
    parts = _run_chunks(_utility_chunk, payload, trials, seed, workers)
    counts = Counter()
    for part in parts:
        counts.update(part)
    values = {"tt": u.tt, "tn": u.tn, "nt": u.nt, "nn": u.nn}
    n = sum(counts.values())
    mean = sum(counts[k] * values[k] for k in counts) / n
    second = sum(counts[k] * values[k] ** 2 for k in counts) / n
    variance = max(second - mean * mean, 0.0)
    stderr = math.sqrt(variance / n) if n > 1 else 0.0
    return UtilityEstimate(mean, stderr, dict(counts), n)


DEFAULT_NASH_CATALOG: tuple[AdversaryStrategy, ...] = (
    AbortAt(UNIFORM_ROUND),
    AbortAtRevelation(),
    ForgeArbitraryQubit(),
)


def strategy_label(strategy: AdversaryStrategy) -> str:
    if isinstance(strategy, Honest):
        return "honest"
    if isinstance(strategy, AbortAt):
        return f"abort_at({strategy.round})"
    if isinstance(strategy, AbortAtRevelation):
        return "abort_at_revelation"
    if isinstance(strategy, ForgeArbitraryQubit):
        spec = "haar" if isinstance(strategy.spec, str) else "fixed"
        return f"forge({strategy.round},{spec})"
    if isinstance(strategy, SwapShares):
        return f"swap({strategy.round})"
    return type(strategy).__name__


class NashRow(NamedTuple):
    party: str
    deviation: str
    estimate: float
    stderr: float
    honest_utility: float
    verdict: str


class NashReport(NamedTuple):
    rows: list
    gamma: float
    gamma_bound: dict  # per party
    gamma_ok: dict
    precondition_violations: list
    notes: tuple


def nash_check(
    protocol: str,
    u1: Utilities,
    u2: Utilities,
    gamma: float,
    trials: int,
    seed: int,
    catalog: tuple[AdversaryStrategy, ...] = DEFAULT_NASH_CATALOG,
    inputs=None,
    workers: int = 1,
) -> NashReport:
    """Estimate each party's expected utility for every catalog deviation
    against an honest counterparty and compare with honest play (which
    yields U_TT exactly).  A deviation whose estimate plus three standard
    errors stays below U_TT is strictly dominated; anything else is
    inconclusive at this sample size.

    Detection-threshold preconditions (detection probability below U_TT)
    and utility-ordering violations are reported, never silently ignored.
    """
    if protocol not in (QRMP, QEP2):
        raise ConfigurationError(
            f"equilibrium checks cover the rational protocols, got {protocol!r}"
        )
    _require_gamma(gamma)
    violations = []
    for party, u in ((P1, u1), (P2, u2)):
        problem = u.r1_violation()
        if problem is not None:
            violations.append(f"{party}: {problem}")
    threshold = detection_prob_rational_mp() if protocol == QRMP else detection_prob_xor()
    for party, u in ((P1, u1), (P2, u2)):
        if not threshold < u.tt:
            violations.append(
                f"{party}: detection threshold {threshold} < U^TT violated (U^TT={u.tt})"
            )
    if inputs is None:
        inputs = GreaterThanInputs(2, 3) if protocol == QRMP else "uniform"
    if protocol == QRMP:
        bound = {P1: gamma_bound_rational_mp(u1), P2: gamma_bound_rational_mp(u2)}
    else:
        bound = {P1: fairness_gamma_bound_xor(u1), P2: fairness_gamma_bound_xor(u2)}
    rows = []
    for party, u in ((P1, u1), (P2, u2)):
        for strategy in catalog:
            est = estimate_deviation_utility(
                protocol, party, strategy, u, inputs, trials, seed, gamma, workers
            )
            verdict = (
                STRICTLY_DOMINATED
                if est.estimate + 3.0 * est.stderr < u.tt
                else INCONCLUSIVE
            )
            rows.append(
                NashRow(party, strategy_label(strategy), est.estimate, est.stderr, u.tt, verdict)
            )
    notes = (ABORT_BOUND_VARIANT_NOTE,) if protocol == QRMP else ()
    return NashReport(
        rows=rows,
        gamma=gamma,
        gamma_bound=bound,
        gamma_ok={p: gamma < bound[p] for p in bound},
        precondition_violations=violations,
        notes=notes,
    )
