"""LoRA trainable-parameter accounting for transformer projection layers.

A rank-r adapter on a d_in x d_out matrix adds r*(d_in + d_out) trainable
parameters.  Counting covers the seven attention / feed-forward
projections per layer; embeddings and the output head are excluded (they
are frozen in the adapter setups this verifies).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

__all__ = [
    "TARGET_MODULES",
    "LoraSpec",
    "ArchSpec",
    "ArchBundle",
    "Verdict",
    "Comparison",
    "matrix_shapes",
    "lora_trainable_params",
    "lora_param_breakdown",
    "compare_to_published",
    "load_arch",
    "bundled_arch",
    "bundled_arch_names",
]

TARGET_MODULES = ("q", "k", "v", "o", "gate", "up", "down")


@dataclass(frozen=True)
class LoraSpec:
    rank: int = 32
    alpha: int = 32
    dropout: float = 0.0
    bias: str = "none"
    target_modules: tuple[str, ...] = TARGET_MODULES

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError(f"rank must be >= 1, got {self.rank}")
        targets = tuple(m for m in TARGET_MODULES if m in set(self.target_modules))
        unknown = set(self.target_modules) - set(TARGET_MODULES)
        if unknown:
            raise ValueError(f"unknown target modules: {', '.join(sorted(unknown))}")
        if not targets:
            raise ValueError("target_modules must be non-empty")
        object.__setattr__(self, "target_modules", targets)

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "alpha": self.alpha,
            "dropout": self.dropout,
            "bias": self.bias,
            "target_modules": list(self.target_modules),
        }


@dataclass(frozen=True)
class ArchSpec:
    name: str
    hidden_size: int
    num_layers: int
    num_q_heads: int
    num_kv_heads: int
    head_dim: int
    intermediate_size: int
    total_params_published: int | None = None

    def __post_init__(self):
        dims = {
            "hidden_size": self.hidden_size,
            "num_layers": self.num_layers,
            "num_q_heads": self.num_q_heads,
            "num_kv_heads": self.num_kv_heads,
            "head_dim": self.head_dim,
            "intermediate_size": self.intermediate_size,
        }
        for key, value in dims.items():
            if value < 1:
                raise ValueError(f"{key} must be positive, got {value}")
        if self.num_q_heads % self.num_kv_heads != 0:
            raise ValueError(
                f"num_q_heads ({self.num_q_heads}) must be a multiple of num_kv_heads ({self.num_kv_heads})"
            )


def matrix_shapes(arch: ArchSpec) -> dict[str, tuple[int, int]]:
    """(d_in, d_out) of each adaptable projection matrix."""
    q_dim = arch.num_q_heads * arch.head_dim
    kv_dim = arch.num_kv_heads * arch.head_dim
    return {
        "q": (arch.hidden_size, q_dim),
        "k": (arch.hidden_size, kv_dim),
        "v": (arch.hidden_size, kv_dim),
        "o": (q_dim, arch.hidden_size),
        "gate": (arch.hidden_size, arch.intermediate_size),
        "up": (arch.hidden_size, arch.intermediate_size),
        "down": (arch.intermediate_size, arch.hidden_size),
    }


def lora_trainable_params(arch: ArchSpec, lora: LoraSpec) -> int:
    """Total adapter parameters: num_layers * sum over targets of r*(d_in+d_out)."""
    shapes = matrix_shapes(arch)
    per_layer = sum(lora.rank * (din + dout) for m in lora.target_modules for din, dout in [shapes[m]])
    return arch.num_layers * per_layer


def lora_param_breakdown(arch: ArchSpec, lora: LoraSpec) -> list[dict]:
    """Per-matrix rows for display: shape, params per layer, total."""
    shapes = matrix_shapes(arch)
    rows = []
    for m in lora.target_modules:
        din, dout = shapes[m]
        per_layer = lora.rank * (din + dout)
        rows.append(
            {
                "module": m,
                "d_in": din,
                "d_out": dout,
                "params_per_layer": per_layer,
                "params_total": per_layer * arch.num_layers,
            }
        )
    return rows


class Verdict(str, Enum):
    MATCH = "match"
    DISCREPANCY = "discrepancy"


@dataclass(frozen=True)
class Comparison:
    computed: int
    published: int
    relative_diff: float
    verdict: Verdict
    tolerance: float = 0.05


def compare_to_published(computed: int, published: int, tolerance: float = 0.05) -> Comparison:
    """Relative difference vs a published count; a discrepancy is a finding, not a failure."""
    if computed <= 0 or published <= 0:
        raise ValueError("counts must be positive")
    rel = abs(computed - published) / published
    verdict = Verdict.MATCH if rel <= tolerance else Verdict.DISCREPANCY
    return Comparison(computed=computed, published=published, relative_diff=rel,
                      verdict=verdict, tolerance=tolerance)


@dataclass(frozen=True)
class ArchBundle:
    arch: ArchSpec
    reported_lora_params: int | None = None
    provenance: str | None = None


_ARCH_FIELDS = (
    "name",
    "hidden_size",
    "num_layers",
    "num_q_heads",
    "num_kv_heads",
    "head_dim",
    "intermediate_size",
    "total_params_published",
)


def load_arch(path: str | Path) -> ArchBundle:
    """Load an architecture configuration JSON (see data/archs/ for the format)."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    arch = ArchSpec(**{k: data[k] for k in _ARCH_FIELDS if k in data})
    return ArchBundle(
        arch=arch,
        reported_lora_params=data.get("reported_lora_params"),
        provenance=data.get("provenance"),
    )


def _arch_dir():
    return resources.files("khpolarity").joinpath("data/archs")


def bundled_arch_names() -> list[str]:
    return sorted(p.name.removesuffix(".json") for p in _arch_dir().iterdir() if p.name.endswith(".json"))


def bundled_arch(name: str) -> ArchBundle:
    """Load one of the checked-in variant configurations by bare name."""
    entry = _arch_dir().joinpath(f"{name}.json")
    with resources.as_file(entry) as p:
        if not p.exists():
            raise FileNotFoundError(f"no bundled arch {name!r}; available: {', '.join(bundled_arch_names())}")
        return load_arch(p)
