"""Token-level and sentence-level training weights from teacher statistics.

The token weight of a position is the teacher's probability of the
annotated tag there (its annotation-accuracy estimate). The sentence weight
shrinks with the sample's diversity estimate, the mean normalized entropy
of the teacher's output distributions:

    w_sent(div) = max( log(max(div, eps)) / log(eps), eps )

which is 1 at div=0, eps at div=1, and monotonically non-increasing in
between. eps defaults to e**-9; the max() inside the log realizes the
formula's small-quantity boundary handling so that w_sent(0) is exactly 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .signals import PositionStat, SignalFile, TeacherSignal

DEFAULT_EPSILON = math.exp(-9)  # ~1.2341e-4


@dataclass(frozen=True)
class WeightConfig:
    epsilon: float = DEFAULT_EPSILON
    use_token: bool = True
    use_sent: bool = True

    def __post_init__(self) -> None:
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")


@dataclass
class SampleWeights:
    sample_id: int
    w_sent: float
    w_token: np.ndarray


def token_weight(stat: PositionStat) -> float:
    """The annotation-accuracy estimate is used directly as the token weight."""
    return stat.p_gold


def diversity(signal: TeacherSignal) -> float:
    """Mean normalized entropy over all positions of a sample."""
    if len(signal) == 0:
        raise ValueError(f"sample {signal.sample_id}: no positions")
    return min(max(float(np.mean(signal.entropy)), 0.0), 1.0)


def sentence_weight(div: float, cfg: WeightConfig | None = None) -> float:
    """Map a diversity estimate in [0, 1] to a sentence weight in [eps, 1]."""
    cfg = cfg or WeightConfig()
    if not (0.0 <= div <= 1.0):
        raise ValueError(f"diversity must be in [0, 1], got {div}")
    ratio = math.log(max(div, cfg.epsilon)) / math.log(cfg.epsilon)
    return max(ratio, cfg.epsilon)


def compute_weights(signals: SignalFile, cfg: WeightConfig | None = None) -> list[SampleWeights]:
    """Assemble per-sample weights; disabled granularities contribute exactly 1.0."""
    cfg = cfg or WeightConfig()
    out: list[SampleWeights] = []
    for sig in signals:
        if cfg.use_token:
            w_tok = np.clip(np.asarray(sig.p_gold, dtype=np.float64), 0.0, 1.0)
        else:
            w_tok = np.ones(len(sig), dtype=np.float64)
        w_sent = sentence_weight(diversity(sig), cfg) if cfg.use_sent else 1.0
        out.append(SampleWeights(sample_id=sig.sample_id, w_sent=w_sent, w_token=w_tok))
    return out


@dataclass
class WeightsFile:
    epsilon: float
    use_token: bool
    use_sent: bool
    signal_file_hash: str
    weights: list[SampleWeights] = field(default_factory=list)

    def __iter__(self):
        return iter(self.weights)

    def __len__(self) -> int:
        return len(self.weights)

    def by_id(self) -> dict[int, SampleWeights]:
        return {w.sample_id: w for w in self.weights}


def save_weights(wf: WeightsFile, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "format": "weights/v1",
            "epsilon": wf.epsilon,
            "use_token": wf.use_token,
            "use_sent": wf.use_sent,
            "signal_file_hash": wf.signal_file_hash,
        }
        fh.write(json.dumps(header) + "\n")
        for w in wf.weights:
            rec = {"id": w.sample_id, "w_sent": w.w_sent, "w_token": [float(x) for x in w.w_token]}
            fh.write(json.dumps(rec) + "\n")


def load_weights(path: str | Path) -> WeightsFile:
    with open(path, "r", encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("format") != "weights/v1":
            raise ValueError(f"{path}: not a weights file")
        weights = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            weights.append(
                SampleWeights(
                    sample_id=rec["id"],
                    w_sent=float(rec["w_sent"]),
                    w_token=np.asarray(rec["w_token"], dtype=np.float64),
                )
            )
    return WeightsFile(
        epsilon=header["epsilon"],
        use_token=header["use_token"],
        use_sent=header["use_sent"],
        signal_file_hash=header["signal_file_hash"],
        weights=weights,
    )
