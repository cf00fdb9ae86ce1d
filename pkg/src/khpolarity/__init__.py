"""Explainable polarity classification toolkit for Khmer text."""

from .corpus import (
    Dataset,
    DatasetError,
    LabeledExample,
    Source,
    Split,
    load_dataset,
    save_dataset,
    split_dataset,
)
from .curation import ConflictError, CurationItem, CurationStatus, CurationStore
from .estimators import LexiconPolarityClassifier, LlmPolarityClassifier, TextCleaner
from .evaluate import EvalReport, RunComparison, compare_runs, render_report, score
from .labels import LabelParseError, PolarityLabel, normalize_label
from .lexlabel import (
    HeuristicLabel,
    Lexicon,
    LexiconError,
    RationaleMatch,
    auto_label,
    label_corpus,
    load_lexicon,
    starter_lexicon,
)
from .llmclient import (
    EndpointConfig,
    EndpointError,
    FailedOutcome,
    RunMode,
    TransportError,
    classify,
    classify_batch,
    health_check,
)
from .loracalc import (
    ArchSpec,
    Comparison,
    LoraSpec,
    Verdict,
    bundled_arch,
    bundled_arch_names,
    compare_to_published,
    load_arch,
    lora_param_breakdown,
    lora_trainable_params,
)
from .prompts import (
    ChatConversation,
    ChatMessage,
    ConversationMode,
    PromptError,
    TrainingRecipe,
    build_inference_conversation,
    build_training_conversation,
    export_training_file,
)
from .textnorm import CleanConfig, ScriptClass, ScriptProfile, clean_text, load_respell_map, script_profile
from .thinkparse import ClassificationOutcome, parse_completion

__version__ = "0.1.0"

__all__ = [
    "ArchSpec",
    "ChatConversation",
    "ChatMessage",
    "ClassificationOutcome",
    "CleanConfig",
    "Comparison",
    "ConflictError",
    "ConversationMode",
    "CurationItem",
    "CurationStatus",
    "CurationStore",
    "Dataset",
    "DatasetError",
    "EndpointConfig",
    "EndpointError",
    "EvalReport",
    "FailedOutcome",
    "HeuristicLabel",
    "LabelParseError",
    "LabeledExample",
    "Lexicon",
    "LexiconError",
    "LexiconPolarityClassifier",
    "LlmPolarityClassifier",
    "LoraSpec",
    "PolarityLabel",
    "PromptError",
    "RationaleMatch",
    "RunComparison",
    "RunMode",
    "ScriptClass",
    "ScriptProfile",
    "Source",
    "Split",
    "TextCleaner",
    "TrainingRecipe",
    "TransportError",
    "Verdict",
    "auto_label",
    "build_inference_conversation",
    "build_training_conversation",
    "bundled_arch",
    "bundled_arch_names",
    "classify",
    "classify_batch",
    "clean_text",
    "compare_runs",
    "compare_to_published",
    "export_training_file",
    "health_check",
    "label_corpus",
    "load_arch",
    "load_dataset",
    "load_lexicon",
    "load_respell_map",
    "lora_param_breakdown",
    "lora_trainable_params",
    "normalize_label",
    "parse_completion",
    "render_report",
    "save_dataset",
    "score",
    "script_profile",
    "split_dataset",
    "starter_lexicon",
]
