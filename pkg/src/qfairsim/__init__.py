"""qfairsim: exact simulator and analysis harness for fair two-party
quantum computation protocols (greater-than and embedded-XOR, with and
without hidden revelation schedules)."""

from .adversary import (
    AbortAt,
    AbortAtRevelation,
    AbortIfCertain,
    AdversaryStrategy,
    ForgeArbitraryQubit,
    Honest,
    SwapShares,
    decide_action,
    swap_effect,
)
from .analysis import (
    AT_R,
    BEFORE_R,
    FairnessAudit,
    MpAbortCase,
    NashReport,
    OutcomeDistribution,
    UtilityEstimate,
    Utilities,
    XorAbortCase,
    detection_prob_mp_nonrational,
    detection_prob_rational_mp,
    detection_prob_xor,
    estimate_detection,
    estimate_deviation_utility,
    expected_abort_utility_rational_mp,
    expected_abort_utility_xor,
    fairness_audit,
    fairness_gamma_bound_xor,
    gamma_bound_rational_mp,
    ideal_world_mp,
    ideal_world_xor,
    nash_check,
    simulate_run,
    tv_distance,
)
from .protocols import (
    GreaterThanInputs,
    MillionaireInputs,
    PartyOutcome,
    RoundSchedule,
    ShareList,
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
)
from .quantum import (
    BellLabel,
    JointState,
    P1,
    P2,
    PureQubitSpec,
    QuantumHeap,
    QubitHandle,
    bell_state_vector,
    haar_qubit,
    partial_trace,
)
from .rng import StreamRng

__version__ = "0.1.0"
