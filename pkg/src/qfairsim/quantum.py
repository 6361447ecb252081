"""Exact finite-dimensional quantum state engine.

A :class:`QuantumHeap` tracks joint states (density matrices over one to
four qubits) addressed by qubit handles.  It supports allocation of Bell
pairs and arbitrary pure qubits, Bell-basis measurement with collapse, and
analytic outcome-probability queries.  All measurement randomness comes
from the heap's seeded stream, so a fixed seed and call sequence yields an
identical outcome sequence.

States allocated as Bell pairs or pure qubits are stored symbolically
(a label or amplitude pair) and only materialised into a dense matrix when
an operation needs one; eigenstate measurements therefore never touch the
numeric kernels.
"""

from __future__ import annotations

import enum
import math
from typing import NamedTuple

import numpy as np

from . import backend
from .kernels import BELL_VECTORS
from .rng import StreamRng

P1 = "P1"
P2 = "P2"
DEALER = "dealer"

FIRST = "first"
SECOND = "second"

MAX_QUBITS_PER_NODE = 4

# Outcomes with probability below this are unphysical numerical residue; a
# sample landing on one is re-drawn among the others.
_PROB_FLOOR = 1e-14


class HeapError(Exception):
    """Misuse of the heap API (dead handles, same-handle queries, ...)."""


class ConsumedHandleError(HeapError):
    pass


class SameHandleError(HeapError):
    pass


class NormalizationError(ValueError):
    """Amplitudes do not describe a unit-norm state."""


class BellLabel(enum.IntEnum):
    """The four Bell states, in the fixed sign convention of
    :data:`qfairsim.kernels.BELL_VECTORS`."""

    G0 = 0  # (|00> + |11>)/sqrt2
    G1 = 1  # (|00> - |11>)/sqrt2
    G2 = 2  # (|01> + |10>)/sqrt2
    G3 = 3  # (|01> - |10>)/sqrt2


class QubitHandle(NamedTuple):
    id: int
    owner: str
    round: int
    slot: str


class PureQubitSpec(NamedTuple):
    alpha: complex
    beta: complex

    def norm_error(self) -> float:
        return abs(abs(self.alpha) ** 2 + abs(self.beta) ** 2 - 1.0)


def haar_qubit(rng) -> PureQubitSpec:
    """A single-qubit pure state drawn from the Haar measure (uniform on the
    Bloch sphere, global phase fixed)."""
    z = 1.0 - 2.0 * rng.random()
    phi = 2.0 * math.pi * rng.random()
    alpha = complex(math.sqrt((1.0 + z) / 2.0))
    beta = math.sqrt((1.0 - z) / 2.0) * complex(math.cos(phi), math.sin(phi))
    return PureQubitSpec(alpha, beta)


def bell_state_vector(label: BellLabel) -> np.ndarray:
    """Unit amplitude vector of the given Bell state over |00>,|01>,|10>,|11>."""
    return BELL_VECTORS[int(label)].copy()


class JointState(NamedTuple):
    """Materialised view of one heap node: ordered handles and their joint
    density matrix (2**k x 2**k for k handles)."""

    handles: tuple[QubitHandle, ...]
    rho: np.ndarray


def partial_trace(state: JointState, keep: tuple[QubitHandle, ...] | list[QubitHandle]) -> np.ndarray:
    """Reduced density matrix of ``state`` on the ``keep`` subsystem."""
    if not keep:
        raise ValueError("keep must be a non-empty subset of the state's handles")
    positions = []
    for h in keep:
        try:
            positions.append(state.handles.index(h))
        except ValueError:
            raise ValueError(f"handle {h.id} is not part of this state") from None
    positions.sort()
    if len(positions) == len(state.handles):
        return state.rho.copy()
    return backend.ptrace(state.rho, tuple(positions))


class _Node:
    """One joint state.  Exactly one of (label, amps, rho) is set; label and
    amps are symbolic forms materialised on demand."""

    __slots__ = ("handles", "label", "amps", "rho")

    def __init__(self, handles, label=None, amps=None, rho=None):
        self.handles = handles
        self.label = label
        self.amps = amps
        self.rho = rho

    def dense(self) -> np.ndarray:
        if self.rho is not None:
            return self.rho
        if self.label is not None:
            v = BELL_VECTORS[self.label]
            return np.outer(v, v.conj())
        return backend.pure_rho(*self.amps)

    def marginal(self, position: int) -> np.ndarray:
        """2x2 reduced state of one qubit of this node."""
        if self.label is not None:
            return np.eye(2, dtype=np.complex128) / 2.0
        if self.amps is not None:
            return backend.pure_rho(*self.amps)
        if len(self.handles) == 1:
            return self.rho.copy()
        return backend.ptrace(self.rho, (position,))


class QuantumHeap:
    """Registry of joint quantum states addressed by qubit handles.

    Single-threaded: one Monte Carlo trial owns one heap.  Independent
    trials use independent heaps with independently seeded streams.
    """

    def __init__(self, seed=0):
        """``seed`` is an int or any object with a ``random()`` method."""
        self.rng = StreamRng(seed) if isinstance(seed, int) else seed
        self._node_of: dict[int, _Node] = {}
        self._consumed: set[int] = set()
        self._next_id = 0

    # -- allocation ---------------------------------------------------

    def alloc_bell(
        self,
        label: BellLabel,
        owner_left: str = P1,
        owner_right: str = P2,
        round: int = 1,
        slot: str = FIRST,
    ) -> tuple[QubitHandle, QubitHandle]:
        """Allocate a fresh two-qubit node in the given Bell state.  The left
        tensor factor is the first returned handle."""
        i = self._next_id
        self._next_id = i + 2
        h_left = QubitHandle(i, owner_left, round, slot)
        h_right = QubitHandle(i + 1, owner_right, round, slot)
        node = _Node((h_left, h_right), label=int(label))
        self._node_of[i] = node
        self._node_of[i + 1] = node
        return h_left, h_right

    def alloc_pure(
        self,
        spec: PureQubitSpec,
        owner: str = P1,
        round: int = 1,
        slot: str = FIRST,
    ) -> QubitHandle:
        """Allocate a fresh single-qubit node |phi><phi|."""
        if spec.norm_error() > 1e-12:
            raise NormalizationError(
                f"|alpha|^2 + |beta|^2 = {abs(spec.alpha)**2 + abs(spec.beta)**2!r}, expected 1"
            )
        i = self._next_id
        self._next_id = i + 1
        h = QubitHandle(i, owner, round, slot)
        self._node_of[i] = _Node((h,), amps=(complex(spec.alpha), complex(spec.beta)))
        return h

    # -- queries ------------------------------------------------------

    def is_live(self, handle: QubitHandle) -> bool:
        return handle.id in self._node_of

    def joint_state(self, handle: QubitHandle) -> JointState:
        node = self._require_live(handle)
        return JointState(tuple(node.handles), node.dense().copy())

    def exact_bell_probabilities(self, a: QubitHandle, b: QubitHandle) -> list[float]:
        """Analytic [p(G0), p(G1), p(G2), p(G3)] for measuring (a, b) in the
        Bell basis.  The heap is not modified; when a and b live in different
        nodes the joint state is their product."""
        node_a = self._require_live(a)
        node_b = self._require_live(b)
        if a.id == b.id:
            raise SameHandleError("cannot measure a handle against itself")
        if node_a is node_b:
            if node_a.label is not None:
                probs = [0.0, 0.0, 0.0, 0.0]
                probs[node_a.label] = 1.0
                return probs
            pa = node_a.handles.index(a)
            pb = node_a.handles.index(b)
            raw = backend.bell_probs(node_a.dense(), pa, pb)
        else:
            rho_a = node_a.marginal(node_a.handles.index(a))
            rho_b = node_b.marginal(node_b.handles.index(b))
            raw = backend.bell_probs(backend.tensor(rho_a, rho_b), 0, 1)
        return [max(float(p), 0.0) for p in raw]

    # -- measurement --------------------------------------------------

    def measure_bell(self, a: QubitHandle, b: QubitHandle) -> BellLabel:
        """Sample a Bell-basis outcome for (a, b), collapse, and consume both
        handles.  Surviving entangled partners keep the post-measurement
        reduced state.  Consumes exactly one draw from the heap stream (plus
        re-draws for numerically impossible outcomes)."""
        node_a = self._require_live(a)
        node_b = self._require_live(b)
        if a.id == b.id:
            raise SameHandleError("cannot measure a handle against itself")
        u = self.rng.random()

        if node_a is node_b and node_a.label is not None:
            # Fresh Bell pair: eigenstate measurement, outcome is certain.
            outcome = node_a.label
            del self._node_of[a.id]
            del self._node_of[b.id]
            self._consumed.add(a.id)
            self._consumed.add(b.id)
            return BellLabel(outcome)

        if node_a is node_b:
            node = node_a
            rho = node.rho
        else:
            rho = backend.tensor(node_a.dense(), node_b.dense())
            if rho.shape[0] > (1 << MAX_QUBITS_PER_NODE):
                raise HeapError("joint state would exceed four qubits")
            node = _Node(node_a.handles + node_b.handles, rho=rho)
            for h in node.handles:
                self._node_of[h.id] = node

        pa = node.handles.index(a)
        pb = node.handles.index(b)
        raw = backend.bell_probs(rho, pa, pb)
        probs = np.maximum(raw, 0.0)
        total = probs.sum()
        outcome = self._sample(probs, total, u)

        reduced, p = backend.bell_collapse(rho, pa, pb, outcome)
        survivors = tuple(h for h in node.handles if h.id != a.id and h.id != b.id)
        del self._node_of[a.id]
        del self._node_of[b.id]
        self._consumed.add(a.id)
        self._consumed.add(b.id)
        if survivors:
            new_node = _Node(survivors, rho=reduced / p)
            for h in survivors:
                self._node_of[h.id] = new_node
        return BellLabel(outcome)

    def _sample(self, probs: np.ndarray, total: float, u: float) -> int:
        acc = 0.0
        outcome = 3
        threshold = u * total
        for k in range(4):
            acc += probs[k]
            if threshold < acc:
                outcome = k
                break
        if probs[outcome] < _PROB_FLOOR:
            live = [k for k in range(4) if probs[k] >= _PROB_FLOOR]
            live_total = sum(probs[k] for k in live)
            u2 = self.rng.random() * live_total
            acc = 0.0
            outcome = live[-1]
            for k in live:
                acc += probs[k]
                if u2 < acc:
                    outcome = k
                    break
        return outcome

    # -- diagnostics ----------------------------------------------------

    def live_nodes(self) -> list[JointState]:
        seen: list[JointState] = []
        done = set()
        for node in self._node_of.values():
            if id(node) in done:
                continue
            done.add(id(node))
            seen.append(JointState(tuple(node.handles), node.dense().copy()))
        return seen

    def check_invariants(self, trace_tol: float = 1e-10, herm_tol: float = 1e-12) -> None:
        """Assert trace-one, Hermiticity, positivity and the size bound for
        every live node.  Diagnostic, not part of the hot path."""
        for state in self.live_nodes():
            rho = state.rho
            dim = rho.shape[0]
            if dim > (1 << MAX_QUBITS_PER_NODE):
                raise AssertionError("node exceeds four qubits")
            if abs(np.trace(rho).real - 1.0) > trace_tol:
                raise AssertionError(f"trace {np.trace(rho)} != 1")
            if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
                raise AssertionError("node is not Hermitian")
            min_eig = float(np.linalg.eigvalsh(rho).min())
            if min_eig < -1e-10:
                raise AssertionError(f"negative eigenvalue {min_eig}")

    # -- internals ------------------------------------------------------

    def _require_live(self, handle: QubitHandle) -> _Node:
        node = self._node_of.get(handle.id)
        if node is None:
            if handle.id in self._consumed:
                raise ConsumedHandleError(f"handle {handle.id} was already measured")
            raise HeapError(f"handle {handle.id} is not registered in this heap")
        return node
