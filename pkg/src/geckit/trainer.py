"""Training loops: vanilla, mixed-grained weighted, and distillation.

The weighted objective multiplies each slot's negative log-likelihood by
w_sent * w_token before summation; the batch loss is the weighted sum
divided by the number of slots in the batch (mean per token), so unit
weights reproduce the vanilla loss bit-for-bit through the shared reduction.
Distillation mixes the gold NLL with cross-entropy against the teacher's
full distribution: alpha * NLL + (1 - alpha) * CE(teacher, student).

Optimizer is Adam (beta1=0.9, beta2=0.98, eps=1e-8); checkpoints are
selected by lowest dev loss. Single-worker training is bit-reproducible for
a fixed seed.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .align import EncodedCorpus, EncodedSample, apply_tags
from .corpus import Corpus
from .model import ModelParams, Tagger, backward_rows, context_matrix, forward_rows, log_softmax
from .signals import SignalFile
from .weights import SampleWeights, WeightConfig, compute_weights

MODES = ("none", "token", "sent", "mixed", "kd")


class NonFiniteLossError(RuntimeError):
    pass


class WeightMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    batch_size: int = 32
    lr: float = 5e-3
    beta1: float = 0.9
    beta2: float = 0.98
    adam_eps: float = 1e-8
    shuffle_seed: int = 1
    mode: str = "none"
    kd_alpha: float = 0.5

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")
        if not (0.0 <= self.kd_alpha <= 1.0):
            raise ValueError("kd_alpha must be in [0, 1]")
        if self.mode not in MODES:
            raise ValueError(f"unknown weighting mode {self.mode!r}")


@dataclass
class _BatchRows:
    ids: np.ndarray  # (rows, context)
    gold: np.ndarray  # (rows,)
    factors: np.ndarray  # (rows,) w_sent * w_token per slot
    dists: np.ndarray | None = None  # (rows, tags) teacher distributions


def _build_rows(
    model: Tagger,
    batch: Sequence[EncodedSample],
    weights_by_id: dict[int, SampleWeights] | None,
    dists_by_id: dict[int, np.ndarray] | None = None,
) -> _BatchRows:
    ids_parts, gold_parts, factor_parts, dist_parts = [], [], [], []
    for s in batch:
        token_ids = model.token_vocab.encode(s.source)
        ids_parts.append(context_matrix(token_ids, model.config.window))
        gold_parts.append(np.asarray(s.tag_ids, dtype=np.intp))
        n = len(s.tag_ids)
        if weights_by_id is None:
            factor_parts.append(np.ones(n, dtype=np.float64))
        else:
            w = weights_by_id.get(s.sample_id)
            if w is None:
                raise WeightMismatchError(f"no weights for sample {s.sample_id}")
            if len(w.w_token) != n:
                raise WeightMismatchError(
                    f"sample {s.sample_id}: {len(w.w_token)} token weights for {n} slots"
                )
            factor_parts.append(w.w_sent * w.w_token)
        if dists_by_id is not None:
            d = dists_by_id.get(s.sample_id)
            if d is None:
                raise WeightMismatchError(f"no teacher distribution for sample {s.sample_id}")
            if d.shape != (n, model.config.tag_vocab_size):
                raise WeightMismatchError(f"sample {s.sample_id}: teacher dist shape {d.shape}")
            dist_parts.append(d)
    return _BatchRows(
        ids=np.concatenate(ids_parts, axis=0),
        gold=np.concatenate(gold_parts),
        factors=np.concatenate(factor_parts),
        dists=np.concatenate(dist_parts, axis=0) if dist_parts else None,
    )


def _reduce(factors: np.ndarray, nll: np.ndarray) -> float:
    # Single reduction shared by the weighted and vanilla paths, so unit
    # weights give exact float equality with the unweighted loss.
    return float(np.dot(factors, nll))


def loss_weighted(
    model: Tagger,
    batch: Sequence[EncodedSample],
    weights_by_id: dict[int, SampleWeights] | None,
    accumulate: bool = True,
) -> float:
    """Weighted NLL per token over the batch; optionally accumulates gradients."""
    rows = _build_rows(model, batch, weights_by_id)
    n = len(rows.gold)
    logits, cache = forward_rows(model.params, rows.ids)
    ls = log_softmax(logits)
    nll = -ls[np.arange(n), rows.gold]
    loss = _reduce(rows.factors, nll) / n
    if accumulate:
        g = np.exp(ls)
        g[np.arange(n), rows.gold] -= 1.0
        g *= (rows.factors / n)[:, None]
        backward_rows(model.params, cache, g)
    return loss


def loss_unweighted(model: Tagger, batch: Sequence[EncodedSample], accumulate: bool = True) -> float:
    """Vanilla NLL per token; the weighted loss with every factor exactly 1."""
    return loss_weighted(model, batch, None, accumulate=accumulate)


def loss_kd(
    model: Tagger,
    batch: Sequence[EncodedSample],
    dists_by_id: dict[int, np.ndarray],
    kd_alpha: float,
    weights_by_id: dict[int, SampleWeights] | None = None,
    accumulate: bool = True,
) -> float:
    """Distillation loss: alpha * gold NLL + (1 - alpha) * CE(teacher, student)."""
    rows = _build_rows(model, batch, weights_by_id, dists_by_id)
    assert rows.dists is not None
    n = len(rows.gold)
    logits, cache = forward_rows(model.params, rows.ids)
    ls = log_softmax(logits)
    nll = -ls[np.arange(n), rows.gold]
    ce = -(rows.dists * ls).sum(axis=1)
    loss = _reduce(rows.factors, kd_alpha * nll + (1.0 - kd_alpha) * ce) / n
    if accumulate:
        p = np.exp(ls)
        target = (1.0 - kd_alpha) * rows.dists
        target[np.arange(n), rows.gold] += kd_alpha
        g = (p - target) * (rows.factors / n)[:, None]
        backward_rows(model.params, cache, g)
    return loss


class _Adam:
    def __init__(self, params: ModelParams, cfg: TrainConfig):
        self.cfg = cfg
        self.t = 0
        self.m = [np.zeros_like(p) for _, p, _ in params.tensors()]
        self.v = [np.zeros_like(p) for _, p, _ in params.tensors()]

    def step(self, params: ModelParams) -> None:
        c = self.cfg
        self.t += 1
        bias1 = 1.0 - c.beta1**self.t
        bias2 = 1.0 - c.beta2**self.t
        for (_, p, g), m, v in zip(params.tensors(), self.m, self.v):
            m *= c.beta1
            m += (1.0 - c.beta1) * g
            v *= c.beta2
            v += (1.0 - c.beta2) * (g * g)
            p -= c.lr * (m / bias1) / (np.sqrt(v / bias2) + c.adam_eps)


@dataclass
class TrainResult:
    model: Tagger
    best_epoch: int
    best_dev_loss: float
    log: list[dict] = field(default_factory=list)


def _dataset_loss(model: Tagger, corpus: EncodedCorpus, batch_size: int) -> float:
    total, rows = 0.0, 0
    for start in range(0, len(corpus.samples), batch_size):
        batch = corpus.samples[start : start + batch_size]
        n = sum(len(s.tag_ids) for s in batch)
        total += loss_unweighted(model, batch, accumulate=False) * n
        rows += n
    return total / max(rows, 1)


def _mode_weights(
    mode: str, signals: SignalFile | None, epsilon: float
) -> dict[int, SampleWeights] | None:
    if mode in ("none", "kd"):
        return None
    if signals is None:
        raise ValueError(f"mode {mode!r} needs teacher signals")
    cfg = WeightConfig(epsilon=epsilon, use_token=mode in ("token", "mixed"), use_sent=mode in ("sent", "mixed"))
    return {w.sample_id: w for w in compute_weights(signals, cfg)}


def train(
    model: Tagger,
    train_corpus: EncodedCorpus,
    cfg: TrainConfig,
    weights_by_id: dict[int, SampleWeights] | None = None,
    signals: SignalFile | None = None,
    dev_corpus: EncodedCorpus | None = None,
) -> TrainResult:
    """Train in place and keep the epoch checkpoint with the lowest dev loss.

    Weighted modes take precomputed weights; kd takes signals carrying full
    distributions. The dev corpus defaults to the training corpus.
    """
    if model.tag_vocab.content_hash() != train_corpus.vocab_hash:
        raise ValueError("model tag vocab hash != training corpus vocab hash")
    dev = dev_corpus if dev_corpus is not None else train_corpus
    if dev.vocab_hash != train_corpus.vocab_hash:
        raise ValueError("dev corpus vocab hash != training corpus vocab hash")

    dists_by_id: dict[int, np.ndarray] | None = None
    if cfg.mode == "kd":
        if signals is None or not signals.has_full_dist:
            raise ValueError("kd mode needs signals with full distributions")
        if signals.vocab_hash != train_corpus.vocab_hash:
            raise ValueError("signal vocab hash != training corpus vocab hash")
        dists_by_id = {s.sample_id: s.full_dist for s in signals}
    elif cfg.mode != "none" and weights_by_id is None:
        weights_by_id = _mode_weights(cfg.mode, signals, WeightConfig().epsilon)

    samples = train_corpus.samples
    rng = np.random.default_rng(cfg.shuffle_seed)
    adam = _Adam(model.params, cfg)
    best = model.params.copy()
    best_dev = math.inf
    best_epoch = -1
    log: list[dict] = []

    for epoch in range(cfg.epochs):
        order = rng.permutation(len(samples))
        total, rows = 0.0, 0
        for start in range(0, len(order), cfg.batch_size):
            batch = [samples[i] for i in order[start : start + cfg.batch_size]]
            model.params.zero_grads()
            if cfg.mode == "kd":
                loss = loss_kd(model, batch, dists_by_id, cfg.kd_alpha)
            else:
                loss = loss_weighted(model, batch, weights_by_id)
            if not math.isfinite(loss):
                raise NonFiniteLossError(
                    f"non-finite loss {loss} at epoch {epoch}, batch starting {start} "
                    f"(mode={cfg.mode}, lr={cfg.lr})"
                )
            adam.step(model.params)
            n = sum(len(s.tag_ids) for s in batch)
            total += loss * n
            rows += n
        dev_loss = _dataset_loss(model, dev, cfg.batch_size)
        log.append(
            {
                "epoch": epoch,
                "train_loss": total / max(rows, 1),
                "dev_loss": dev_loss,
                "mode": cfg.mode,
                "seed": cfg.shuffle_seed,
            }
        )
        if dev_loss < best_dev:
            best_dev = dev_loss
            best_epoch = epoch
            best = model.params.copy()

    model.params = best
    return TrainResult(model=model, best_epoch=best_epoch, best_dev_loss=best_dev, log=log)


@dataclass
class RunResult:
    mode: str
    seed: int
    precision: float
    recall: float
    f_beta: float
    dev_loss: float


@dataclass
class AblationReport:
    runs: list[RunResult]
    beta: float = 0.5

    def modes(self) -> list[str]:
        seen: list[str] = []
        for r in self.runs:
            if r.mode not in seen:
                seen.append(r.mode)
        return seen

    def aggregate(self) -> list[dict]:
        out = []
        for mode in self.modes():
            rs = [r for r in self.runs if r.mode == mode]
            row: dict = {"mode": mode, "seeds": len(rs)}
            for name in ("precision", "recall", "f_beta"):
                vals = [getattr(r, name) for r in rs]
                row[name + "_mean"] = statistics.fmean(vals)
                row[name + "_sd"] = statistics.stdev(vals) if len(vals) > 1 else 0.0
            out.append(row)
        return out

    def to_tsv(self) -> str:
        lines = ["mode\tseeds\tP_mean\tP_sd\tR_mean\tR_sd\tF_mean\tF_sd"]
        for row in self.aggregate():
            lines.append(
                f"{row['mode']}\t{row['seeds']}\t"
                f"{row['precision_mean']:.6f}\t{row['precision_sd']:.6f}\t"
                f"{row['recall_mean']:.6f}\t{row['recall_sd']:.6f}\t"
                f"{row['f_beta_mean']:.6f}\t{row['f_beta_sd']:.6f}"
            )
        return "\n".join(lines) + "\n"

    def runs_tsv(self) -> str:
        lines = ["mode\tseed\tP\tR\tF\tdev_loss"]
        for r in self.runs:
            lines.append(
                f"{r.mode}\t{r.seed}\t{r.precision:.6f}\t{r.recall:.6f}\t{r.f_beta:.6f}\t{r.dev_loss:.6f}"
            )
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        header = f"{'mode':<8}{'P':>16}{'R':>16}{'F%.2f' % self.beta:>16}"
        lines = [header, "-" * len(header)]
        for row in self.aggregate():
            lines.append(
                f"{row['mode']:<8}"
                f"{row['precision_mean']:>9.4f} ±{row['precision_sd']:.4f}"
                f"{row['recall_mean']:>9.4f} ±{row['recall_sd']:.4f}"
                f"{row['f_beta_mean']:>9.4f} ±{row['f_beta_sd']:.4f}"
            )
        return "\n".join(lines) + "\n"


def evaluate_model(model: Tagger, dev: Corpus, beta: float = 0.5) -> tuple[float, float, float]:
    """Predict corrections for a parallel dev set and score against its targets."""
    from .scoring import extract_edits, score

    from .corpus import GoldEditSet

    sources, hyps, gold = [], [], []
    for s in dev:
        hyp = apply_tags(s.source, model.predict_tags(s.source, sample_id=s.id))
        sources.append(s.source)
        hyps.append(hyp)
        gold.append(GoldEditSet(source=s.source, edits={0: tuple(extract_edits(s.source, s.target))}))
    rep = score(sources, hyps, gold, beta=beta)
    return rep.precision, rep.recall, rep.f_beta


def run_ablation(
    train_corpus: EncodedCorpus,
    signals: SignalFile,
    dev_corpus: EncodedCorpus,
    dev_parallel: Corpus,
    token_vocab,
    tag_vocab,
    base_cfg: TrainConfig,
    seeds: Sequence[int],
    epsilon: float | None = None,
    modes: Sequence[str] = MODES,
    model_opts: dict | None = None,
) -> AblationReport:
    """Train every weighting mode with every seed and score on the dev set."""
    if not seeds:
        raise ValueError("need at least one seed")
    eps = epsilon if epsilon is not None else WeightConfig().epsilon
    opts = model_opts or {}
    runs: list[RunResult] = []
    for mode in modes:
        weights_by_id = _mode_weights(mode, signals, eps)
        for seed in seeds:
            model = Tagger.create(token_vocab, tag_vocab, seed=seed, **opts)
            cfg = replace(base_cfg, mode=mode, shuffle_seed=seed)
            result = train(
                model,
                train_corpus,
                cfg,
                weights_by_id=weights_by_id,
                signals=signals if mode == "kd" else None,
                dev_corpus=dev_corpus,
            )
            p, r, f = evaluate_model(model, dev_parallel)
            runs.append(
                RunResult(mode=mode, seed=seed, precision=p, recall=r, f_beta=f, dev_loss=result.best_dev_loss)
            )
    return AblationReport(runs=runs)
