"""Deviation strategies for a corrupted party.

Strategies are immutable plans; the protocol engine consults them at each
send decision point through a :class:`StrategyDriver`, which holds the
per-run state (the strategy's own RNG stream and any lazily resolved
choices such as a uniformly drawn round).

A strategy sees only its own party's view: current round and slot, the
list length m, the party's own secret input, and the party's own past
events.  It never sees the opponent's input or the dealer's schedule.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import NamedTuple, Union

from .quantum import P1, PureQubitSpec, QubitHandle, haar_qubit

UNIFORM_ROUND = "uniform"
HAAR_SPEC = "haar"

SEND_HONEST = "send_honest"
SEND_FORGED = "send_forged"
SEND_SWAPPED = "send_swapped"
ABORT = "abort"


class Action(NamedTuple):
    kind: str
    spec: PureQubitSpec | None = None


_HONEST_ACTION = Action(SEND_HONEST)
_ABORT_ACTION = Action(ABORT)


class PartyView(NamedTuple):
    """One party's observable context at a decision point.  Contains no
    opponent input and no dealer schedule."""

    party: str
    protocol: str
    round: int
    sub_round: int
    m: int
    own_input: int
    events: tuple


@dataclass(frozen=True)
class Honest:
    pass


@dataclass(frozen=True)
class ForgeArbitraryQubit:
    """Send a fresh arbitrary qubit instead of the scheduled share in one
    round.  ``round`` is a fixed round number or ``"uniform"``; ``spec`` is a
    fixed amplitude pair or ``"haar"`` for a random pure state per run."""

    round: Union[int, str] = UNIFORM_ROUND
    spec: Union[PureQubitSpec, tuple, str] = HAAR_SPEC


@dataclass(frozen=True)
class SwapShares:
    """Send, in place of the scheduled round's share, the share of another
    round of the own list (the two list positions are exchanged)."""

    round: Union[int, str] = UNIFORM_ROUND


@dataclass(frozen=True)
class AbortAt:
    """Stop participating at a fixed or uniformly drawn round."""

    round: Union[int, str] = UNIFORM_ROUND


@dataclass(frozen=True)
class AbortAtRevelation:
    """Aim the abort at the revelation round of a hidden-schedule protocol.

    Abort declarations are made before the declaring party can inspect the
    current round's share, so the best any strategy can do is declare at its
    first opportunity and hit the revelation round with probability gamma.
    This strategy declares in round 1.
    """


@dataclass(frozen=True)
class AbortIfCertain:
    """Abort immediately when the own input alone already determines the
    output (the all-ones row of the embedded-XOR table)."""


AdversaryStrategy = Union[
    Honest, ForgeArbitraryQubit, SwapShares, AbortAt, AbortAtRevelation, AbortIfCertain
]

_RANDOMIZED = (ForgeArbitraryQubit, SwapShares, AbortAt)


class AdversaryState:
    """Per-run mutable companion of a strategy: its RNG stream plus memoised
    resolutions of random choices."""

    __slots__ = ("rng", "memo")

    def __init__(self, rng: random.Random | None):
        self.rng = rng
        self.memo: dict = {}

    def _require_rng(self) -> random.Random:
        if self.rng is None:
            raise ValueError("strategy requires an RNG stream but none was provided")
        return self.rng

    def resolve_round(self, key: str, configured, m: int) -> int:
        value = self.memo.get(key)
        if value is None:
            if configured == UNIFORM_ROUND:
                value = 1 + self._require_rng().randrange(m)
            else:
                value = int(configured)
            self.memo[key] = value
        return value

    def resolve_spec(self, configured) -> PureQubitSpec:
        value = self.memo.get("spec")
        if value is None:
            if configured == HAAR_SPEC:
                value = haar_qubit(self._require_rng())
            elif isinstance(configured, PureQubitSpec):
                value = configured
            else:
                value = PureQubitSpec(complex(configured[0]), complex(configured[1]))
            self.memo["spec"] = value
        return value


def decide_action(strategy: AdversaryStrategy, view: PartyView, state: AdversaryState) -> Action:
    """The action a strategy takes at a send decision point.  Deterministic
    given the strategy, the view, and the strategy's RNG stream."""
    if isinstance(strategy, Honest):
        return _HONEST_ACTION
    if isinstance(strategy, ForgeArbitraryQubit):
        target = state.resolve_round("forge_round", strategy.round, view.m)
        if view.round == target:
            return Action(SEND_FORGED, state.resolve_spec(strategy.spec))
        return _HONEST_ACTION
    if isinstance(strategy, SwapShares):
        if view.m == 1:
            return _HONEST_ACTION
        target = state.resolve_round("swap_round", strategy.round, view.m)
        if view.round == target:
            return Action(SEND_SWAPPED)
        return _HONEST_ACTION
    if isinstance(strategy, AbortAt):
        target = state.resolve_round("abort_round", strategy.round, view.m)
        return _ABORT_ACTION if view.round == target else _HONEST_ACTION
    if isinstance(strategy, AbortAtRevelation):
        return _ABORT_ACTION if view.round == 1 else _HONEST_ACTION
    if isinstance(strategy, AbortIfCertain):
        certain = (
            view.protocol in ("qep", "qep2")
            and view.party == P1
            and view.own_input == 3
        )
        return _ABORT_ACTION if (certain and view.round == 1) else _HONEST_ACTION
    raise TypeError(f"unknown strategy type: {type(strategy).__name__}")


def swap_effect(
    send_handles: list[QubitHandle], round: int, rng: random.Random
) -> tuple[list[QubitHandle], int | None]:
    """Exchange the round's send share with that of a uniformly chosen other
    round.  Returns the new send order and the partner round, or the
    unchanged order and ``None`` when there is no alternative round."""
    m = len(send_handles)
    if m == 1:
        return list(send_handles), None
    other = 1 + rng.randrange(m - 1)
    if other >= round:
        other += 1
    swapped = list(send_handles)
    swapped[round - 1], swapped[other - 1] = swapped[other - 1], swapped[round - 1]
    return swapped, other


class StrategyDriver:
    """Engine-side adapter around one party's strategy."""

    __slots__ = ("strategy", "party", "protocol", "state", "is_honest")

    def __init__(
        self,
        strategy: AdversaryStrategy,
        party: str,
        protocol: str,
        rng: random.Random | None = None,
    ):
        self.strategy = strategy
        self.party = party
        self.protocol = protocol
        self.state = AdversaryState(rng)
        self.is_honest = isinstance(strategy, Honest)

    def plan_sends(self, send_handles: list[QubitHandle]) -> list[QubitHandle]:
        """Resolve the send order for the whole run.  Only SwapShares
        permutes it; the swap is fixed before the first round so both
        affected rounds send a share the party still holds."""
        if not isinstance(self.strategy, SwapShares) or len(send_handles) == 1:
            return list(send_handles)
        target = self.state.resolve_round(
            "swap_round", self.strategy.round, len(send_handles)
        )
        swapped, other = swap_effect(send_handles, target, self.state._require_rng())
        self.state.memo["swap_partner"] = other
        return swapped

    def decide(self, view: PartyView) -> Action:
        return decide_action(self.strategy, view, self.state)

    def forge_round(self, m: int) -> int | None:
        """The round this driver forges or swaps in, if any (for scoping
        detection estimates)."""
        if isinstance(self.strategy, ForgeArbitraryQubit):
            return self.state.resolve_round("forge_round", self.strategy.round, m)
        if isinstance(self.strategy, SwapShares) and m > 1:
            return self.state.resolve_round("swap_round", self.strategy.round, m)
        return None
