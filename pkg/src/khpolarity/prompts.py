"""Compile corpus records into the chat-conversation shapes used for
training and inference, and export training files.

The three assistant shapes are byte-exact contracts:

  reasoning:      <think> Because the input text contains the following {reasoning} </think>\\n{label}
  non-reasoning:  <think>\\n\\n</think>\\n{label}
  inference:      <think>            (a generation prefix, not a complete turn)

User content is always the instruction (with its trailing newline-space)
followed by the raw input text; nothing is escaped.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .corpus import Dataset, LabeledExample
from .loracalc import LoraSpec

__all__ = [
    "INSTRUCTION",
    "ChatMessage",
    "ChatConversation",
    "ConversationMode",
    "PromptError",
    "TrainingRecipe",
    "ExportSummary",
    "build_training_conversation",
    "build_inference_conversation",
    "export_training_file",
]

INSTRUCTION = "Classify the given text as positive, neutral, or negative:\n "

REASONING_PREFIX = "<think> Because the input text contains the following "
REASONING_SUFFIX = " </think>\n"
NON_REASONING_BODY = "<think>\n\n</think>\n"
INFERENCE_PREFIX = "<think>"


class PromptError(ValueError):
    pass


class ConversationMode(str, Enum):
    REASONING = "reasoning"
    NON_REASONING = "non_reasoning"
    INFERENCE = "inference"


@dataclass(frozen=True)
class ChatMessage:
    role: str  # "user" | "assistant"
    content: str

    def __post_init__(self):
        if self.role not in ("user", "assistant"):
            raise PromptError(f"unknown role {self.role!r}")

    def to_dict(self) -> dict:
        return {"role": self.role, "content": self.content}


@dataclass(frozen=True)
class ChatConversation:
    messages: tuple[ChatMessage, ChatMessage]
    mode: ConversationMode

    def __post_init__(self):
        if len(self.messages) != 2 or self.messages[0].role != "user" or self.messages[1].role != "assistant":
            raise PromptError("a conversation is exactly one user message then one assistant message")

    @property
    def user(self) -> ChatMessage:
        return self.messages[0]

    @property
    def assistant(self) -> ChatMessage:
        return self.messages[1]

    def to_dict(self) -> dict:
        return {"messages": [m.to_dict() for m in self.messages]}


def build_training_conversation(ex: LabeledExample) -> ChatConversation:
    """Compile one labeled record into its training conversation.

    Records with a (non-empty) reasoning field get the reasoning shape;
    all others get the empty-think-block shape.
    """
    if ex.label is None:
        raise PromptError(f"record {ex.id!r} has no label")
    user = ChatMessage("user", INSTRUCTION + ex.text)
    reasoning = ex.reasoning.strip() if ex.reasoning else ""
    if reasoning:
        assistant = ChatMessage("assistant", REASONING_PREFIX + reasoning + REASONING_SUFFIX + ex.label.value)
        mode = ConversationMode.REASONING
    else:
        assistant = ChatMessage("assistant", NON_REASONING_BODY + ex.label.value)
        mode = ConversationMode.NON_REASONING
    return ChatConversation((user, assistant), mode)


def build_inference_conversation(text: str) -> ChatConversation:
    """Compile a bare text into the inference conversation (primed think prefix)."""
    if not text or not text.strip():
        raise PromptError("inference text must be non-empty")
    return ChatConversation(
        (ChatMessage("user", INSTRUCTION + text), ChatMessage("assistant", INFERENCE_PREFIX)),
        ConversationMode.INFERENCE,
    )


@dataclass(frozen=True)
class TrainingRecipe:
    """Fine-tuning hyperparameters emitted alongside exported training files."""

    epochs: int = 2
    learning_rate: float = 2e-4
    lr_schedule: str = "linear"
    batch_size: int = 8
    gradient_accumulation: int = 4
    max_context: int = 2048
    weight_decay: float = 0.01
    quantization: str = "4-bit"
    lora: LoraSpec = field(default_factory=LoraSpec)

    @property
    def effective_batch(self) -> int:
        return self.batch_size * self.gradient_accumulation

    def to_dict(self) -> dict:
        return {
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "lr_schedule": self.lr_schedule,
            "batch_size": self.batch_size,
            "gradient_accumulation": self.gradient_accumulation,
            "effective_batch": self.effective_batch,
            "max_context": self.max_context,
            "weight_decay": self.weight_decay,
            "quantization": self.quantization,
            "lora": self.lora.to_dict(),
        }


@dataclass(frozen=True)
class ExportSummary:
    reasoning_count: int
    non_reasoning_count: int
    recipe: TrainingRecipe


def export_training_file(ds: Dataset, path: str | Path, recipe: TrainingRecipe | None = None) -> ExportSummary:
    """Write one training-conversation JSONL line per record, plus the recipe sidecar.

    Every record must be labeled; offenders are reported by id before
    anything is written.
    """
    unlabeled = [rec.id for rec in ds.records if rec.label is None]
    if unlabeled:
        raise PromptError(f"unlabeled record(s): {', '.join(unlabeled)}")

    recipe = recipe or TrainingRecipe()
    path = Path(path)
    reasoning_count = 0
    with path.open("w", encoding="utf-8") as f:
        for rec in ds.records:
            conv = build_training_conversation(rec)
            if conv.mode is ConversationMode.REASONING:
                reasoning_count += 1
            f.write(json.dumps(conv.to_dict(), ensure_ascii=False) + "\n")

    recipe_path = path.with_suffix(".recipe.json")
    recipe_path.write_text(json.dumps(recipe.to_dict(), indent=2) + "\n", encoding="utf-8")
    return ExportSummary(
        reasoning_count=reasoning_count,
        non_reasoning_count=len(ds.records) - reasoning_count,
        recipe=recipe,
    )
