"""User-simulation toolkit for utterance reformulation in conversational
recommender systems: transition-dynamics estimation from annotated dialogues,
type-conditioned generation with acceptability filtering, and an evaluation
protocol for generated reformulation sequences."""

__version__ = "0.1.0"

from .dialogue import (
    GENERABLE_TYPES,
    TYPE_ORDER,
    Corpus,
    Dialogue,
    HumanSequence,
    Intent,
    ReformulationType,
    SlotAnnotation,
    Speaker,
    Triad,
    Turn,
    UserProfile,
    extract_human_sequences,
    extract_triads,
    load_corpus,
    save_corpus,
)
from .dynamics import (
    DialoguePiece,
    TransitionMatrix,
    TypeDistribution,
    estimate_transition_matrix,
    load_matrix,
    one_hot_distribution,
    sample_type,
    save_matrix,
    segment_pieces,
    uniform_generable_distribution,
    update_distribution,
)
from .analysis import (
    compare_experience_groups,
    levene_test,
    pattern_frequencies,
    preceding_intent_ratios,
    t_test,
    turn_bin_distribution,
)
from .generators import (
    GenerationCandidate,
    GenerationRequest,
    RuleBackend,
    generate,
    remote_generate,
    rule_refine,
    rule_repeat,
    rule_rephrase,
    rule_restart,
    rule_simplify,
)
from .filtering import (
    AcceptabilityVerdict,
    compare_difficulty,
    heuristic_acceptable,
    readability_grade,
    remote_acceptable,
)
from .metrics import (
    MetricReport,
    bleu,
    classify_reformulation_type,
    evaluate_run,
    rouge_l,
    rouge_n,
    tokenize,
)
from .orchestrator import (
    OrchestratorConfig,
    ReformulationSequence,
    SequenceStep,
    generate_sequence,
    load_sequences,
    save_sequences,
    splice_dialogue,
)
from .remote import RemoteClient
