"""Dealer share generation and round-driven two-party reconstruction.

Four protocols share one round structure: each round has two sub-rounds,
ordered P2-sends, P1-measures, P1-sends, P2-measures.  A party "aborts in
round l" by skipping its own send of that round, i.e. after P1 has measured
round l but before P2 has, which is the timing the fairness analyses rely
on.

In the hidden-schedule protocols (qrmp, qep, qep2) the revelation round is
a dealer secret.  For qrmp an abort is a declaration made blind to the
current round's measurement: the engine masks that measurement from the
strategy's view, performs it regardless (the party physically holds both
qubits), and records a disclosure event stating whether the declared round
was the revelation round.  The declaring party cannot revise.
"""

from __future__ import annotations

import math
import random
from typing import NamedTuple, Optional

from .adversary import (
    ABORT,
    SEND_FORGED,
    AdversaryStrategy,
    Honest,
    PartyView,
    StrategyDriver,
)
from .quantum import (
    DEALER,
    FIRST,
    P1,
    P2,
    SECOND,
    BellLabel,
    QuantumHeap,
    QubitHandle,
)

QMP = "qmp"
QRMP = "qrmp"
QEP = "qep"
QEP2 = "qep2"

PROTOCOLS = (QMP, QRMP, QEP, QEP2)

SENT = "sent"
MEASURED = "measured"
ABORTED = "aborted"
REPORTED_FORGERY = "reported_forgery"
CONCLUDED_NULL = "concluded_null"
CONCLUDED_VALUE = "concluded_value"
TOLD_REVELATION = "told_revelation"


class InvalidInputsError(ValueError):
    """A party's input is outside its declared domain."""


class ConfigurationError(ValueError):
    """Malformed run configuration (lists, strategies, parameters)."""


# ---------------------------------------------------------------------------
# inputs, schedules, outcomes


class MillionaireInputs(NamedTuple):
    i: int
    j: int
    m: int

    def validate(self) -> None:
        if self.m < 1:
            raise InvalidInputsError(f"m must be >= 1, got {self.m}")
        if not 1 <= self.i <= self.m:
            raise InvalidInputsError(f"i must be in [1, m={self.m}], got {self.i}")
        if not 1 <= self.j <= self.m:
            raise InvalidInputsError(f"j must be in [1, m={self.m}], got {self.j}")


class GreaterThanInputs(NamedTuple):
    i: int
    j: int

    def validate(self) -> None:
        if self.i < 1 or self.j < 1:
            raise InvalidInputsError(f"secrets must be >= 1, got i={self.i}, j={self.j}")


class XorInputs(NamedTuple):
    x: int
    y: int

    def validate(self) -> None:
        if self.x not in (1, 2, 3):
            raise InvalidInputsError(f"x index must be in {{1,2,3}}, got {self.x}")
        if self.y not in (1, 2):
            raise InvalidInputsError(f"y index must be in {{1,2}}, got {self.y}")


class RoundSchedule(NamedTuple):
    r: int
    d: int
    gamma: float

    @property
    def m(self) -> int:
        return self.r + self.d

    def validate(self) -> None:
        if self.r < 1 or self.d < 1:
            raise ConfigurationError(f"r and d must be >= 1, got r={self.r}, d={self.d}")
        if not 0.0 < self.gamma < 1.0:
            raise ConfigurationError(f"gamma must be in (0, 1), got {self.gamma}")


class ShareList(NamedTuple):
    party: str
    rounds: tuple  # m entries of (first: QubitHandle, second: QubitHandle)


class PartyOutcome(NamedTuple):
    kind: str
    value: Optional[int] = None


OUT_NULL = PartyOutcome("null")
OUT_FORGERY = PartyOutcome("forgery_reported")
OUT_UNDECIDED = PartyOutcome("undecided")
OUT_VALUE0 = PartyOutcome("value", 0)
OUT_VALUE1 = PartyOutcome("value", 1)


def value_outcome(bit: int) -> PartyOutcome:
    return OUT_VALUE1 if bit else OUT_VALUE0


def _value_or_null(bit: Optional[int]) -> PartyOutcome:
    if bit is None:
        return OUT_NULL
    return OUT_VALUE1 if bit else OUT_VALUE0


class WorldOutcome(NamedTuple):
    p1: PartyOutcome
    p2: PartyOutcome


class Transcript:
    """Ordered event log of one run.  Events are tuples
    (round, sub_round, actor, action, detail)."""

    __slots__ = ("events",)

    def __init__(self):
        self.events: list[tuple] = []

    def append(self, round: int, sub: int, actor: str, action: str, detail=None) -> None:
        self.events.append((round, sub, actor, action, detail))

    def to_lines(self, run_id) -> list[str]:
        out = []
        for rnd, sub, actor, action, detail in self.events:
            shown = "" if detail is None else detail
            out.append(f"{run_id},{rnd},{sub},{actor},{action},{shown}")
        return out

    def forgery_report_round(self) -> Optional[int]:
        for rnd, _sub, _actor, action, _detail in self.events:
            if action == REPORTED_FORGERY:
                return rnd
        return None

    def value_conclusions(self, actor: str) -> list[tuple[int, int]]:
        return [
            (rnd, detail)
            for rnd, _sub, act, action, detail in self.events
            if act == actor and action == CONCLUDED_VALUE
        ]


# ---------------------------------------------------------------------------
# the functions being computed


def eval_greater_than(i: int, j: int) -> int:
    """Greater-than output shared by both parties: 1 iff i > j."""
    if i < 1 or j < 1:
        raise InvalidInputsError(f"secrets must be >= 1, got i={i}, j={j}")
    return 1 if i > j else 0


def eval_embedded_xor(x: int, y: int) -> int:
    """Embedded-XOR table over {x1,x2,x3} x {y1,y2}: 1 iff the indices differ."""
    if x not in (1, 2, 3):
        raise InvalidInputsError(f"x index must be in {{1,2,3}}, got {x}")
    if y not in (1, 2):
        raise InvalidInputsError(f"y index must be in {{1,2}}, got {y}")
    return 1 if x != y else 0


def sample_schedule(gamma: float, rng: random.Random) -> RoundSchedule:
    """Draw the revelation round r and the padding d independently from the
    geometric distribution P(k) = gamma * (1-gamma)**(k-1) on {1, 2, ...}."""
    return RoundSchedule(
        sample_geometric(gamma, rng), sample_geometric(gamma, rng), gamma
    )


def sample_geometric(gamma: float, rng: random.Random) -> int:
    """One draw from P(k) = gamma * (1-gamma)**(k-1), k = 1, 2, ..."""
    if not 0.0 < gamma < 1.0:
        raise ConfigurationError(f"gamma must be in (0, 1), got {gamma}")
    u = rng.random()
    return 1 + int(math.log(1.0 - u) / math.log(1.0 - gamma))


# ---------------------------------------------------------------------------
# dealer share generation


def qshare_gen(
    inputs: MillionaireInputs, heap: QuantumHeap
) -> tuple[ShareList, ShareList]:
    """Greater-than shares: round i's first slot and round j's second slot
    carry the output pair (G0 for 0, G1 for 1); every other slot carries a
    G2 pair.  P1 holds left halves, P2 right halves, 2m handles each."""
    inputs.validate()
    f = eval_greater_than(inputs.i, inputs.j)
    rev = BellLabel.G1 if f else BellLabel.G0
    rounds1 = []
    rounds2 = []
    for l in range(1, inputs.m + 1):
        first = rev if l == inputs.i else BellLabel.G2
        second = rev if l == inputs.j else BellLabel.G2
        f1, f2 = heap.alloc_bell(first, P1, P2, l, FIRST)
        s1, s2 = heap.alloc_bell(second, P1, P2, l, SECOND)
        rounds1.append((f1, s1))
        rounds2.append((f2, s2))
    return ShareList(P1, tuple(rounds1)), ShareList(P2, tuple(rounds2))


def qrshare_gen(
    inputs: GreaterThanInputs, schedule: RoundSchedule, heap: QuantumHeap
) -> tuple[ShareList, ShareList]:
    """Hidden-schedule greater-than shares: both slots of round r carry the
    output pair, all other rounds carry G2 pairs."""
    inputs.validate()
    schedule.validate()
    f = eval_greater_than(inputs.i, inputs.j)
    rev = BellLabel.G1 if f else BellLabel.G0
    rounds1 = []
    rounds2 = []
    for l in range(1, schedule.m + 1):
        label = rev if l == schedule.r else BellLabel.G2
        f1, f2 = heap.alloc_bell(label, P1, P2, l, FIRST)
        s1, s2 = heap.alloc_bell(label, P1, P2, l, SECOND)
        rounds1.append((f1, s1))
        rounds2.append((f2, s2))
    return ShareList(P1, tuple(rounds1)), ShareList(P2, tuple(rounds2))


def qeshare_gen(
    inputs: XorInputs,
    schedule: RoundSchedule,
    heap: QuantumHeap,
    rng: random.Random,
) -> tuple[ShareList, ShareList]:
    """Embedded-XOR shares.  Before the revelation round the first slot
    encodes f(x, y_hat) and the second slot f(x_hat, y) with fresh uniform
    hats per round; from round r on both encode the true output.  Values are
    carried as G0 (bit 0) or G1 (bit 1) pairs."""
    inputs.validate()
    schedule.validate()
    f = eval_embedded_xor(inputs.x, inputs.y)
    rounds1 = []
    rounds2 = []
    for l in range(1, schedule.m + 1):
        if l < schedule.r:
            y_hat = 1 + rng.randrange(2)
            x_hat = 1 + rng.randrange(3)
            a_l = eval_embedded_xor(inputs.x, y_hat)
            b_l = eval_embedded_xor(x_hat, inputs.y)
        else:
            a_l = b_l = f
        f1, f2 = heap.alloc_bell(BellLabel.G1 if a_l else BellLabel.G0, P1, P2, l, FIRST)
        s1, s2 = heap.alloc_bell(BellLabel.G1 if b_l else BellLabel.G0, P1, P2, l, SECOND)
        rounds1.append((f1, s1))
        rounds2.append((f2, s2))
    return ShareList(P1, tuple(rounds1)), ShareList(P2, tuple(rounds2))


# ---------------------------------------------------------------------------
# shared runner machinery


def _check_run_config(
    list1: ShareList, list2: ShareList, m: int, s1: AdversaryStrategy, s2: AdversaryStrategy
) -> None:
    if not isinstance(s1, Honest) and not isinstance(s2, Honest):
        raise ConfigurationError("at most one party may be corrupted")
    if len(list1.rounds) != m or len(list2.rounds) != m:
        raise ConfigurationError(
            f"share lists carry {len(list1.rounds)}/{len(list2.rounds)} rounds, expected {m}"
        )


def _resolve_send(
    driver: StrategyDriver,
    heap: QuantumHeap,
    plan: list[QubitHandle],
    l: int,
    slot: str,
    view: Optional[PartyView],
) -> tuple[Optional[QubitHandle], bool]:
    """Returns (qubit to send, aborted)."""
    if driver.is_honest or view is None:
        return plan[l - 1], False
    act = driver.decide(view)
    if act.kind == ABORT:
        return None, True
    if act.kind == SEND_FORGED:
        return heap.alloc_pure(act.spec, driver.party, l, slot), False
    return plan[l - 1], False


# ---------------------------------------------------------------------------
# greater-than reconstruction, fixed revelation rounds


def run_qmp_fair(
    lists: tuple[ShareList, ShareList],
    heap: QuantumHeap,
    s1: AdversaryStrategy,
    s2: AdversaryStrategy,
    inputs: MillionaireInputs,
    rng1: Optional[random.Random] = None,
    rng2: Optional[random.Random] = None,
) -> tuple[WorldOutcome, Transcript]:
    """Run the greater-than protocol with per-party revelation rounds i, j.

    Off-revelation measurements other than G2 and revelation-round
    measurements of G2/G3 are reported as forgery and end the run.  An
    abort by P2 in round l <= i makes P1 output 1; an abort by P1 in round
    l <= j makes P2 output 0; later aborts leave the determined values.
    """
    list1, list2 = lists
    inputs.validate()
    m, i, j = inputs.m, inputs.i, inputs.j
    _check_run_config(list1, list2, m, s1, s2)
    d1 = StrategyDriver(s1, P1, QMP, rng1)
    d2 = StrategyDriver(s2, P2, QMP, rng2)
    sends1 = d1.plan_sends([r[1] for r in list1.rounds])
    sends2 = d2.plan_sends([r[0] for r in list2.rounds])
    ev1: Optional[list] = None if d1.is_honest else []
    ev2: Optional[list] = None if d2.is_honest else []
    t = Transcript()
    concl1: Optional[int] = None
    concl2: Optional[int] = None

    for l in range(1, m + 1):
        view2 = None if d2.is_honest else PartyView(P2, QMP, l, 1, m, j, tuple(ev2))
        q, aborted = _resolve_send(d2, heap, sends2, l, FIRST, view2)
        if aborted:
            t.append(l, 1, P2, ABORTED)
            p1 = OUT_VALUE1 if l <= i else _value_or_null(concl1)
            return WorldOutcome(p1, _value_or_null(concl2)), t
        t.append(l, 1, P2, SENT)
        if ev2 is not None:
            ev2.append((l, 1, SENT, None))

        label = heap.measure_bell(list1.rounds[l - 1][0], q)
        t.append(l, 1, P1, MEASURED, label.name)
        if l != i:
            if label != BellLabel.G2:
                t.append(l, 1, P1, REPORTED_FORGERY)
                return WorldOutcome(OUT_FORGERY, OUT_NULL), t
            t.append(l, 1, P1, CONCLUDED_NULL)
        else:
            if label == BellLabel.G0 or label == BellLabel.G1:
                concl1 = int(label)
                t.append(l, 1, P1, CONCLUDED_VALUE, concl1)
            else:
                t.append(l, 1, P1, REPORTED_FORGERY)
                return WorldOutcome(OUT_FORGERY, OUT_NULL), t
        if ev1 is not None:
            ev1.append((l, 1, MEASURED, label))

        view1 = None if d1.is_honest else PartyView(P1, QMP, l, 2, m, i, tuple(ev1))
        q, aborted = _resolve_send(d1, heap, sends1, l, SECOND, view1)
        if aborted:
            t.append(l, 2, P1, ABORTED)
            p2 = OUT_VALUE0 if l <= j else _value_or_null(concl2)
            return WorldOutcome(_value_or_null(concl1), p2), t
        t.append(l, 2, P1, SENT)
        if ev1 is not None:
            ev1.append((l, 2, SENT, None))

        label = heap.measure_bell(list2.rounds[l - 1][1], q)
        t.append(l, 2, P2, MEASURED, label.name)
        if l != j:
            if label != BellLabel.G2:
                t.append(l, 2, P2, REPORTED_FORGERY)
                return WorldOutcome(OUT_NULL, OUT_FORGERY), t
            t.append(l, 2, P2, CONCLUDED_NULL)
        else:
            if label == BellLabel.G0 or label == BellLabel.G1:
                concl2 = int(label)
                t.append(l, 2, P2, CONCLUDED_VALUE, concl2)
            else:
                t.append(l, 2, P2, REPORTED_FORGERY)
                return WorldOutcome(OUT_NULL, OUT_FORGERY), t
        if ev2 is not None:
            ev2.append((l, 2, MEASURED, label))

    return WorldOutcome(_value_or_null(concl1), _value_or_null(concl2)), t


# ---------------------------------------------------------------------------
# greater-than reconstruction, hidden revelation round


def run_qrmp_fair(
    lists: tuple[ShareList, ShareList],
    heap: QuantumHeap,
    s1: AdversaryStrategy,
    s2: AdversaryStrategy,
    schedule: RoundSchedule,
    rng1: Optional[random.Random] = None,
    rng2: Optional[random.Random] = None,
) -> tuple[WorldOutcome, Transcript]:
    """Run the hidden-schedule greater-than protocol.

    Only G3 is evidence of forgery; G0/G1 conclude the output bit and G2
    concludes null.  Abort declarations are blind to the declaring party's
    current-round measurement; the dealer then discloses whether the round
    was the revelation round (recorded in the transcript) and the decision
    stands.  An abort in round l <= r leaves the counterparty at null.
    """
    list1, list2 = lists
    schedule.validate()
    m, r = schedule.m, schedule.r
    _check_run_config(list1, list2, m, s1, s2)
    d1 = StrategyDriver(s1, P1, QRMP, rng1)
    d2 = StrategyDriver(s2, P2, QRMP, rng2)
    sends1 = d1.plan_sends([rd[1] for rd in list1.rounds])
    sends2 = d2.plan_sends([rd[0] for rd in list2.rounds])
    ev1: Optional[list] = None if d1.is_honest else []
    ev2: Optional[list] = None if d2.is_honest else []
    t = Transcript()
    concl1: Optional[int] = None
    concl2: Optional[int] = None

    for l in range(1, m + 1):
        view2 = None if d2.is_honest else PartyView(P2, QRMP, l, 1, m, 0, tuple(ev2))
        q, aborted = _resolve_send(d2, heap, sends2, l, FIRST, view2)
        if aborted:
            t.append(l, 1, P2, ABORTED)
            t.append(l, 1, DEALER, TOLD_REVELATION, "yes" if l == r else "no")
            return WorldOutcome(_value_or_null(concl1), _value_or_null(concl2)), t
        t.append(l, 1, P2, SENT)
        if ev2 is not None:
            ev2.append((l, 1, SENT, None))

        label = heap.measure_bell(list1.rounds[l - 1][0], q)
        t.append(l, 1, P1, MEASURED, label.name)
        if label == BellLabel.G3:
            t.append(l, 1, P1, REPORTED_FORGERY)
            return WorldOutcome(OUT_FORGERY, OUT_NULL), t
        if label == BellLabel.G2:
            t.append(l, 1, P1, CONCLUDED_NULL)
        else:
            concl1 = int(label)
            t.append(l, 1, P1, CONCLUDED_VALUE, concl1)

        # P1's declaration view excludes the measurement he just made.
        view1 = None if d1.is_honest else PartyView(P1, QRMP, l, 2, m, 0, tuple(ev1))
        q, aborted = _resolve_send(d1, heap, sends1, l, SECOND, view1)
        if ev1 is not None:
            ev1.append((l, 1, MEASURED, label))
        if aborted:
            t.append(l, 2, P1, ABORTED)
            t.append(l, 2, DEALER, TOLD_REVELATION, "yes" if l == r else "no")
            return WorldOutcome(_value_or_null(concl1), _value_or_null(concl2)), t
        t.append(l, 2, P1, SENT)
        if ev1 is not None:
            ev1.append((l, 2, SENT, None))

        label = heap.measure_bell(list2.rounds[l - 1][1], q)
        t.append(l, 2, P2, MEASURED, label.name)
        if label == BellLabel.G3:
            t.append(l, 2, P2, REPORTED_FORGERY)
            return WorldOutcome(OUT_NULL, OUT_FORGERY), t
        if label == BellLabel.G2:
            t.append(l, 2, P2, CONCLUDED_NULL)
        else:
            concl2 = int(label)
            t.append(l, 2, P2, CONCLUDED_VALUE, concl2)
        if ev2 is not None:
            ev2.append((l, 2, MEASURED, label))

    return WorldOutcome(_value_or_null(concl1), _value_or_null(concl2)), t


# ---------------------------------------------------------------------------
# embedded-XOR reconstruction


def run_qep_fair(
    lists: tuple[ShareList, ShareList],
    heap: QuantumHeap,
    s1: AdversaryStrategy,
    s2: AdversaryStrategy,
    schedule: RoundSchedule,
    inputs: XorInputs,
    variant: str = QEP,
    rng1: Optional[random.Random] = None,
    rng2: Optional[random.Random] = None,
) -> tuple[WorldOutcome, Transcript]:
    """Run the embedded-XOR protocol (variant "qep" or "qep2").

    Every round concludes a bit: G0 means 0, G1 means 1, while G2/G3 are
    reported as forgery.  Parties keep their last-seen bit.  On a P1 abort
    in round l <= r, P2 outputs its previous-round bit under "qep" (a fresh
    f(x_hat, y) sample when l = 1, drawn from the heap stream) and the
    constant 1 under "qep2"; aborts after round r leave the determined
    values.  P2 aborts are symmetric and identical across variants.
    """
    list1, list2 = lists
    schedule.validate()
    inputs.validate()
    if variant not in (QEP, QEP2):
        raise ConfigurationError(f"variant must be 'qep' or 'qep2', got {variant!r}")
    m, r = schedule.m, schedule.r
    _check_run_config(list1, list2, m, s1, s2)
    d1 = StrategyDriver(s1, P1, variant, rng1)
    d2 = StrategyDriver(s2, P2, variant, rng2)
    sends1 = d1.plan_sends([rd[1] for rd in list1.rounds])
    sends2 = d2.plan_sends([rd[0] for rd in list2.rounds])
    ev1: Optional[list] = None if d1.is_honest else []
    ev2: Optional[list] = None if d2.is_honest else []
    t = Transcript()
    a_seen: Optional[int] = None
    b_seen: Optional[int] = None

    for l in range(1, m + 1):
        view2 = None if d2.is_honest else PartyView(P2, variant, l, 1, m, inputs.y, tuple(ev2))
        q, aborted = _resolve_send(d2, heap, sends2, l, FIRST, view2)
        if aborted:
            t.append(l, 1, P2, ABORTED)
            if a_seen is not None:
                p1 = value_outcome(a_seen)
            else:
                y_hat = 1 + heap.rng.randrange(2)
                p1 = value_outcome(eval_embedded_xor(inputs.x, y_hat))
            return WorldOutcome(p1, _value_or_null(b_seen)), t
        t.append(l, 1, P2, SENT)
        if ev2 is not None:
            ev2.append((l, 1, SENT, None))

        label = heap.measure_bell(list1.rounds[l - 1][0], q)
        t.append(l, 1, P1, MEASURED, label.name)
        if label == BellLabel.G2 or label == BellLabel.G3:
            t.append(l, 1, P1, REPORTED_FORGERY)
            return WorldOutcome(OUT_FORGERY, OUT_NULL), t
        a_seen = int(label)
        t.append(l, 1, P1, CONCLUDED_VALUE, a_seen)
        if ev1 is not None:
            ev1.append((l, 1, MEASURED, label))

        view1 = None if d1.is_honest else PartyView(P1, variant, l, 2, m, inputs.x, tuple(ev1))
        q, aborted = _resolve_send(d1, heap, sends1, l, SECOND, view1)
        if aborted:
            t.append(l, 2, P1, ABORTED)
            if variant == QEP2 and l <= r:
                p2 = OUT_VALUE1
            elif b_seen is not None:
                p2 = value_outcome(b_seen)
            else:
                x_hat = 1 + heap.rng.randrange(3)
                p2 = value_outcome(eval_embedded_xor(x_hat, inputs.y))
            return WorldOutcome(value_outcome(a_seen), p2), t
        t.append(l, 2, P1, SENT)
        if ev1 is not None:
            ev1.append((l, 2, SENT, None))

        label = heap.measure_bell(list2.rounds[l - 1][1], q)
        t.append(l, 2, P2, MEASURED, label.name)
        if label == BellLabel.G2 or label == BellLabel.G3:
            t.append(l, 2, P2, REPORTED_FORGERY)
            return WorldOutcome(OUT_NULL, OUT_FORGERY), t
        b_seen = int(label)
        t.append(l, 2, P2, CONCLUDED_VALUE, b_seen)
        if ev2 is not None:
            ev2.append((l, 2, MEASURED, label))

    return WorldOutcome(_value_or_null(a_seen), _value_or_null(b_seen)), t
