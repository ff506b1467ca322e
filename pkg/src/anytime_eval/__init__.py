"""Budget-aware evaluation harness for anytime LLM reasoning.

Samples chain-of-thought traces, truncates them at token-budget
checkpoints, forces an answer from each prefix, scores the answers
(constraint satisfaction for trip planning, exact match for math/MCQ),
and summarizes quality-per-token with the anytime index. Scored traces
feed self-generated preference pairs that render into contrastive
prompts for subsequent runs.
"""

__version__ = "0.1.0"

from .metrics import (
    AnytimeSummary,
    BudgetSchedule,
    QualityCurve,
    aggregate_mean,
    anytime_index,
    running_max,
    summarize,
)
from .tokenization import (
    BpeTokenizer,
    TokenizerSpec,
    TruncatedPrefix,
    WordTokenizer,
    count_tokens,
    load_tokenizer,
    truncate_prefix,
)
from .trip import (
    ConstraintOutcome,
    Itinerary,
    TripQuery,
    csr,
    evaluate_constraints,
    parse_itinerary,
    parse_trip_query,
)
from .answers import AnswerSpec, extract_final_answer, normalize_answer, score_answer
from .gateway import (
    ChatExchange,
    ChatRequest,
    FixtureStore,
    Gateway,
    HttpBackend,
    Message,
    ReplayBackend,
    SamplingParams,
)
from .preference import (
    PdpPromptConfig,
    PreferencePair,
    ScoredTraceAtBudget,
    rank_at_budget,
    render_pdp_plus_prompt,
    render_pdp_prompt,
    select_max_gap_pairs,
    select_pairs_across_queries,
)
from .datasets import Instance, PROFILES, QualityScorer, load_instances
from .pipeline import RunManifest, resume_run, run_evaluation, run_prefgen

__all__ = [name for name in dir() if not name.startswith("_")]
