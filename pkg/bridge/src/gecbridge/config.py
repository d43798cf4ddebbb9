"""Bridge export configuration."""

from __future__ import annotations

from dataclasses import dataclass

SEQ2EDIT = "seq2edit"
SEQ2SEQ = "seq2seq"


@dataclass(frozen=True)
class BridgeConfig:
    """What to export: which model, in which manner, to which file.

    The manner must match the model's type; an edit tagger cannot produce
    seq2seq signals or vice versa, mirroring the teacher-consistency
    restriction of weighted training.
    """

    model: str
    manner: str
    output: str
    batch_size: int = 64
    emit_full_dist: bool = False

    def __post_init__(self) -> None:
        if self.manner not in (SEQ2EDIT, SEQ2SEQ):
            raise ValueError(f"unknown manner {self.manner!r}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")


def check_manner(config: BridgeConfig, model_manner: str) -> None:
    if config.manner != model_manner:
        raise ValueError(
            f"config manner {config.manner!r} does not match the model's type {model_manner!r}"
        )
