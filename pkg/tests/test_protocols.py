"""Share generation and the round-driven reconstruction state machines."""

import numpy as np
import pytest

from qfairsim.adversary import AbortAt, ForgeArbitraryQubit, Honest
from qfairsim.protocols import (
    ConfigurationError,
    GreaterThanInputs,
    InvalidInputsError,
    MillionaireInputs,
    RoundSchedule,
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
)
from qfairsim.quantum import P1, P2, BellLabel, QuantumHeap
from qfairsim.rng import StreamRng


def node_label(heap, handle):
    """Identify which Bell state a fresh two-qubit node holds."""
    rho = heap.joint_state(handle).rho
    for label in BellLabel:
        from qfairsim.kernels import BELL_RHOS

        if np.allclose(rho, BELL_RHOS[int(label)], atol=1e-12):
            return label
    raise AssertionError("node is not a Bell state")


def transcript_is_ordered(transcript):
    """Sub-round sequence per round: P2 sends, P1 measures, P1 sends, P2
    measures (with conclusions interleaved after measurements)."""
    phase_of = {
        (1, P2, "sent"): 0,
        (1, P1, "measured"): 1,
        (2, P1, "sent"): 2,
        (2, P2, "measured"): 3,
    }
    last_round, last_phase = 0, 99
    for rnd, sub, actor, action, _detail in transcript.events:
        key = (sub, actor, action)
        if key not in phase_of:
            continue
        phase = phase_of[key]
        if rnd == last_round:
            assert phase > last_phase
        else:
            assert rnd == last_round + 1 or last_round == 0
            assert phase == 0 or last_round == 0
        last_round, last_phase = rnd, phase
    return True


class TestFunctions:
    @pytest.mark.parametrize("i,j,expected", [(3, 2, 1), (2, 2, 0), (1, 5, 0)])
    def test_greater_than(self, i, j, expected):
        assert eval_greater_than(i, j) == expected

    def test_embedded_xor_table(self):
        table = {
            (1, 1): 0, (1, 2): 1,
            (2, 1): 1, (2, 2): 0,
            (3, 1): 1, (3, 2): 1,
        }
        for (x, y), expected in table.items():
            assert eval_embedded_xor(x, y) == expected

    def test_domain_checks(self):
        with pytest.raises(InvalidInputsError):
            eval_greater_than(0, 1)
        with pytest.raises(InvalidInputsError):
            eval_embedded_xor(4, 1)
        with pytest.raises(InvalidInputsError):
            eval_embedded_xor(1, 3)


class TestSchedules:
    def test_geometric_mean(self):
        rng = StreamRng(1)
        samples = [sample_geometric(0.5, rng) for _ in range(30000)]
        assert abs(sum(samples) / len(samples) - 2.0) < 0.04

    def test_m_exceeds_r(self):
        rng = StreamRng(2)
        for _ in range(500):
            schedule = sample_schedule(0.3, rng)
            assert schedule.m > schedule.r
            assert schedule.r >= 1 and schedule.d >= 1

    def test_first_round_probability(self):
        rng = StreamRng(3)
        hits = sum(sample_geometric(0.25, rng) == 1 for _ in range(30000))
        assert abs(hits / 30000 - 0.25) < 0.01

    def test_gamma_domain(self):
        with pytest.raises(ConfigurationError):
            sample_schedule(1.5, StreamRng(0))


class TestShareGeneration:
    def test_fixed_revelation_layout(self):
        heap = QuantumHeap(0)
        list1, list2 = qshare_gen(MillionaireInputs(2, 3, 4), heap)
        assert len(list1.rounds) == len(list2.rounds) == 4
        for l in range(1, 5):
            first, second = list1.rounds[l - 1]
            expected_first = BellLabel.G0 if l == 2 else BellLabel.G2
            expected_second = BellLabel.G0 if l == 3 else BellLabel.G2
            assert node_label(heap, first) == expected_first
            assert node_label(heap, second) == expected_second

    def test_two_m_handles_each(self):
        heap = QuantumHeap(0)
        list1, list2 = qshare_gen(MillionaireInputs(1, 2, 3), heap)
        ids = [h.id for rounds in (list1.rounds, list2.rounds) for pair in rounds for h in pair]
        assert len(ids) == 12 and len(set(ids)) == 12

    def test_equal_secrets_share_one_round(self):
        heap = QuantumHeap(0)
        inputs = MillionaireInputs(1, 1, 2)
        lists = qshare_gen(inputs, heap)
        out, transcript = run_qmp_fair(lists, heap, Honest(), Honest(), inputs)
        assert out.p1 == out.p2 == ("value", 0)
        assert transcript.value_conclusions(P1) == [(1, 0)]
        assert transcript.value_conclusions(P2) == [(1, 0)]

    def test_invalid_inputs_rejected(self):
        heap = QuantumHeap(0)
        with pytest.raises(InvalidInputsError):
            qshare_gen(MillionaireInputs(0, 2, 3), heap)
        with pytest.raises(InvalidInputsError):
            qshare_gen(MillionaireInputs(1, 5, 3), heap)

    def test_hidden_schedule_layout(self):
        heap = QuantumHeap(0)
        schedule = RoundSchedule(2, 1, 0.5)
        list1, _ = qrshare_gen(GreaterThanInputs(5, 2), schedule, heap)
        for l in range(1, 4):
            first, second = list1.rounds[l - 1]
            expected = BellLabel.G1 if l == 2 else BellLabel.G2
            assert node_label(heap, first) == expected
            assert node_label(heap, second) == expected

    def test_xor_layout_all_ones_row(self):
        heap = QuantumHeap(0)
        schedule = RoundSchedule(3, 2, 0.5)
        list1, _ = qeshare_gen(XorInputs(3, 1), schedule, heap, StreamRng(4))
        for l in range(1, 6):
            first, _second = list1.rounds[l - 1]
            assert node_label(heap, first) == BellLabel.G1

    def test_xor_true_rounds_encode_output(self):
        heap = QuantumHeap(0)
        schedule = RoundSchedule(2, 2, 0.5)
        list1, _ = qeshare_gen(XorInputs(1, 1), schedule, heap, StreamRng(5))
        for l in (2, 3, 4):
            first, second = list1.rounds[l - 1]
            assert node_label(heap, first) == BellLabel.G0
            assert node_label(heap, second) == BellLabel.G0

    def test_xor_decoy_column_distribution(self):
        # the second-slot decoy bit is 0 exactly when the sampled row
        # matches the true column: probability 1/3
        rng = StreamRng(6)
        zeros = 0
        trials = 30000
        for _ in range(trials):
            heap = QuantumHeap(0)
            schedule = RoundSchedule(2, 1, 0.5)
            _, list2 = qeshare_gen(XorInputs(1, 2), schedule, heap, rng)
            _, second = list2.rounds[0]
            if node_label(heap, second) == BellLabel.G0:
                zeros += 1
        assert abs(zeros / trials - 1 / 3) < 0.01


class TestFixedRevelationRuns:
    def test_honest_outcomes_and_rounds(self):
        inputs = MillionaireInputs(2, 3, 4)
        heap = QuantumHeap(0)
        out, transcript = run_qmp_fair(qshare_gen(inputs, heap), heap, Honest(), Honest(), inputs)
        assert out.p1 == ("value", 0) and out.p2 == ("value", 0)
        assert transcript.value_conclusions(P1) == [(2, 0)]
        assert transcript.value_conclusions(P2) == [(3, 0)]
        assert transcript_is_ordered(transcript)

    def test_honest_completeness_grid(self):
        for m in (1, 2, 3):
            for i in range(1, m + 1):
                for j in range(1, m + 1):
                    inputs = MillionaireInputs(i, j, m)
                    heap = QuantumHeap(0)
                    out, transcript = run_qmp_fair(
                        qshare_gen(inputs, heap), heap, Honest(), Honest(), inputs
                    )
                    f = eval_greater_than(i, j)
                    assert out.p1 == ("value", f) and out.p2 == ("value", f)
                    assert transcript.forgery_report_round() is None
                    assert transcript.value_conclusions(P1) == [(i, f)]
                    assert transcript.value_conclusions(P2) == [(j, f)]

    def test_p1_abort_before_own_revelation(self):
        inputs = MillionaireInputs(2, 3, 4)
        heap = QuantumHeap(0)
        out, _ = run_qmp_fair(qshare_gen(inputs, heap), heap, AbortAt(1), Honest(), inputs)
        assert out.p1 == ("null", None) and out.p2 == ("value", 0)

    def test_p2_abort_gives_p1_the_greater_default(self):
        inputs = MillionaireInputs(1, 2, 3)
        heap = QuantumHeap(0)
        out, _ = run_qmp_fair(qshare_gen(inputs, heap), heap, Honest(), AbortAt(1), inputs)
        assert out.p1 == ("value", 1) and out.p2 == ("null", None)

    def test_p1_abort_after_both_revelations(self):
        inputs = MillionaireInputs(2, 1, 4)
        heap = QuantumHeap(0)
        out, _ = run_qmp_fair(qshare_gen(inputs, heap), heap, AbortAt(3), Honest(), inputs)
        assert out.p1 == ("value", 1) and out.p2 == ("value", 1)

    def test_wrong_length_lists_rejected(self):
        heap = QuantumHeap(0)
        lists = qshare_gen(MillionaireInputs(2, 3, 4), heap)
        with pytest.raises(ConfigurationError):
            run_qmp_fair(lists, heap, Honest(), Honest(), MillionaireInputs(2, 3, 5))

    def test_double_measurement_impossible(self):
        # every handle is consumed at most once across a full run
        inputs = MillionaireInputs(2, 2, 3)
        heap = QuantumHeap(0)
        lists = qshare_gen(inputs, heap)
        run_qmp_fair(lists, heap, Honest(), Honest(), inputs)
        from qfairsim.quantum import ConsumedHandleError, HeapError

        with pytest.raises((ConsumedHandleError, HeapError)):
            heap.measure_bell(lists[0].rounds[0][0], lists[0].rounds[0][1])


class TestHiddenScheduleRuns:
    def test_honest_reveals_exactly_at_r(self):
        schedule = RoundSchedule(2, 2, 0.5)
        heap = QuantumHeap(0)
        lists = qrshare_gen(GreaterThanInputs(5, 2), schedule, heap)
        out, transcript = run_qrmp_fair(lists, heap, Honest(), Honest(), schedule)
        assert out.p1 == ("value", 1) and out.p2 == ("value", 1)
        assert transcript.value_conclusions(P1) == [(2, 1)]
        assert transcript.value_conclusions(P2) == [(2, 1)]
        assert transcript_is_ordered(transcript)

    def test_early_abort_leaves_both_null(self):
        schedule = RoundSchedule(3, 1, 0.5)
        heap = QuantumHeap(0)
        lists = qrshare_gen(GreaterThanInputs(1, 2), schedule, heap)
        out, transcript = run_qrmp_fair(lists, heap, AbortAt(1), Honest(), schedule)
        assert out.p1 == ("null", None) and out.p2 == ("null", None)
        disclosures = [e for e in transcript.events if e[3] == "told_revelation"]
        assert disclosures == [(1, 2, "dealer", "told_revelation", "no")]

    def test_abort_at_revelation_round_keeps_value_alone(self):
        schedule = RoundSchedule(2, 2, 0.5)
        heap = QuantumHeap(0)
        lists = qrshare_gen(GreaterThanInputs(3, 1), schedule, heap)
        out, transcript = run_qrmp_fair(lists, heap, AbortAt(2), Honest(), schedule)
        assert out.p1 == ("value", 1) and out.p2 == ("null", None)
        disclosures = [e for e in transcript.events if e[3] == "told_revelation"]
        assert disclosures == [(2, 2, "dealer", "told_revelation", "yes")]

    def test_late_abort_changes_nothing(self):
        schedule = RoundSchedule(1, 3, 0.5)
        heap = QuantumHeap(0)
        lists = qrshare_gen(GreaterThanInputs(1, 1), schedule, heap)
        out, _ = run_qrmp_fair(lists, heap, AbortAt(3), Honest(), schedule)
        assert out.p1 == ("value", 0) and out.p2 == ("value", 0)

    def test_p2_abort_before_r(self):
        schedule = RoundSchedule(2, 1, 0.5)
        heap = QuantumHeap(0)
        lists = qrshare_gen(GreaterThanInputs(2, 1), schedule, heap)
        out, _ = run_qrmp_fair(lists, heap, Honest(), AbortAt(2), schedule)
        assert out.p1 == ("null", None) and out.p2 == ("null", None)


class TestEmbeddedXorRuns:
    def test_honest_outcomes(self):
        schedule = RoundSchedule(2, 2, 0.5)
        heap = QuantumHeap(0)
        inputs = XorInputs(2, 1)
        lists = qeshare_gen(inputs, schedule, heap, StreamRng(1))
        out, transcript = run_qep_fair(lists, heap, Honest(), Honest(), schedule, inputs)
        assert out.p1 == ("value", 1) and out.p2 == ("value", 1)
        assert transcript_is_ordered(transcript)
        # from the revelation round on, every conclusion is the true output
        for rnd, bit in transcript.value_conclusions(P1):
            if rnd >= schedule.r:
                assert bit == 1
        for rnd, bit in transcript.value_conclusions(P2):
            if rnd >= schedule.r:
                assert bit == 1

    def test_honest_grid(self):
        rng = StreamRng(2)
        for x in (1, 2, 3):
            for y in (1, 2):
                schedule = sample_schedule(0.4, rng)
                heap = QuantumHeap(0)
                inputs = XorInputs(x, y)
                lists = qeshare_gen(inputs, schedule, heap, rng)
                out, transcript = run_qep_fair(lists, heap, Honest(), Honest(), schedule, inputs)
                f = eval_embedded_xor(x, y)
                assert out.p1 == ("value", f) and out.p2 == ("value", f)
                assert transcript.forgery_report_round() is None

    def test_p1_abort_at_revelation_gives_p2_previous_decoy(self):
        # with the abort at round r the counterparty keeps its round-(r-1)
        # decoy bit under the base variant
        schedule = RoundSchedule(2, 2, 0.5)
        dealer = StreamRng(3)
        heap = QuantumHeap(0)
        inputs = XorInputs(1, 1)
        lists = qeshare_gen(inputs, schedule, heap, dealer)
        decoy = node_label(heap, lists[1].rounds[0][1])
        out, _ = run_qep_fair(lists, heap, AbortAt(2), Honest(), schedule, inputs, "qep")
        assert out.p1 == ("value", 0)
        assert out.p2 == ("value", int(decoy))

    def test_variant_difference_is_exactly_the_abort_output(self):
        """The two variants may differ only in the counterparty's output
        after a first-party abort in round l <= r."""
        for seed in range(40):
            dealer_a = StreamRng(seed)
            dealer_b = StreamRng(seed)
            schedule = RoundSchedule(1 + seed % 3, 1 + seed % 2, 0.5)
            abort_round = 1 + seed % (schedule.m)
            inputs = XorInputs(1 + seed % 3, 1 + seed % 2)
            heap_a = QuantumHeap(seed)
            heap_b = QuantumHeap(seed)
            lists_a = qeshare_gen(inputs, schedule, heap_a, dealer_a)
            lists_b = qeshare_gen(inputs, schedule, heap_b, dealer_b)
            out_a, _ = run_qep_fair(
                lists_a, heap_a, AbortAt(abort_round), Honest(), schedule, inputs, "qep"
            )
            out_b, _ = run_qep_fair(
                lists_b, heap_b, AbortAt(abort_round), Honest(), schedule, inputs, "qep2"
            )
            assert out_a.p1 == out_b.p1
            if abort_round <= schedule.r:
                assert out_b.p2 == ("value", 1)
            else:
                assert out_a.p2 == out_b.p2

    def test_p2_abort_symmetric_rule(self):
        # P2 aborting at round r leaves both parties with their round-(r-1)
        # decoy bits
        schedule = RoundSchedule(2, 2, 0.5)
        dealer = StreamRng(9)
        heap = QuantumHeap(1)
        inputs = XorInputs(2, 2)
        lists = qeshare_gen(inputs, schedule, heap, dealer)
        a_decoy = int(node_label(heap, lists[0].rounds[0][0]))
        b_decoy = int(node_label(heap, lists[1].rounds[0][1]))
        out, _ = run_qep_fair(lists, heap, Honest(), AbortAt(2), schedule, inputs, "qep")
        assert out.p1 == ("value", a_decoy)
        assert out.p2 == ("value", b_decoy)

    def test_forgery_report_on_wrong_state(self):
        schedule = RoundSchedule(2, 2, 0.5)
        heap = QuantumHeap(11)
        inputs = XorInputs(1, 2)
        lists = qeshare_gen(inputs, schedule, heap, StreamRng(4))
        detected = 0
        trials = 400
        for t in range(trials):
            heap = QuantumHeap(t)
            lists = qeshare_gen(inputs, schedule, heap, StreamRng(t))
            out, transcript = run_qep_fair(
                lists, heap, ForgeArbitraryQubit(round=1), Honest(), schedule, inputs,
                "qep", rng1=StreamRng(t + 1000),
            )
            if out.p2.kind == "forgery_reported":
                assert transcript.forgery_report_round() == 1
                detected += 1
        assert abs(detected / trials - 0.5) < 0.08

    def test_outcomes_always_terminal(self):
        rng = StreamRng(12)
        for t in range(50):
            schedule = sample_schedule(0.5, rng)
            inputs = XorInputs(1 + rng.randrange(3), 1 + rng.randrange(2))
            heap = QuantumHeap(t)
            lists = qeshare_gen(inputs, schedule, heap, rng)
            out, _ = run_qep_fair(lists, heap, Honest(), Honest(), schedule, inputs)
            assert out.p1.kind != "undecided" and out.p2.kind != "undecided"
