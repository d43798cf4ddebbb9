"""Compact window-MLP sequence tagger with hand-written backprop.

One tag is predicted per slot (virtual start slot + one per source token).
The input for slot p is the concatenation of 2*window+1 token embeddings
around p; slot 0 embeds a START marker at its center, and positions outside
the sentence (including slot 0 as seen from real-token slots) embed PAD.
The network is embedding concat -> tanh hidden layer -> linear logits.

Forward, backward, and the Adam step in the trainer are all explicit so the
gradient path can be verified against finite differences.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .align import TagSequence, TagVocab
from .util import hash_lines

PAD, UNK, START = 0, 1, 2
_SPECIALS = ["<pad>", "<unk>", "<s>"]

CHECKPOINT_MAGIC = b"GECK"
CHECKPOINT_VERSION = 1


@dataclass
class TokenVocab:
    """Source-token inventory: PAD, UNK, START then sorted corpus tokens."""

    tokens: list[str]
    _index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.tokens[:3] != _SPECIALS:
            raise ValueError("token vocab must start with the special tokens")
        self._index = {}
        for i, tok in enumerate(self.tokens):
            self._index.setdefault(tok, i)

    def __len__(self) -> int:
        return len(self.tokens)

    def lookup(self, token: str) -> int:
        return self._index.get(token, UNK)

    def encode(self, tokens: Sequence[str]) -> np.ndarray:
        return np.asarray([self.lookup(t) for t in tokens], dtype=np.intp)

    def content_hash(self) -> str:
        return hash_lines(self.tokens)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"tokens": self.tokens, "hash": self.content_hash()}, fh, ensure_ascii=False)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "TokenVocab":
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        vocab = cls(tokens=obj["tokens"])
        if obj.get("hash") != vocab.content_hash():
            raise ValueError(f"{path}: token vocab hash mismatch")
        return vocab

    @classmethod
    def build(cls, sources: Sequence[Sequence[str]]) -> "TokenVocab":
        seen = set()
        for toks in sources:
            seen.update(toks)
        return cls(tokens=_SPECIALS + sorted(seen))


@dataclass(frozen=True)
class ModelConfig:
    token_vocab_size: int
    tag_vocab_size: int
    embed_dim: int = 32
    window: int = 2
    hidden_dim: int = 64
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.embed_dim, self.hidden_dim, self.token_vocab_size) < 1 or self.window < 0:
            raise ValueError("model dimensions must be positive")
        if self.tag_vocab_size < 2:
            raise ValueError("tag vocab needs at least KEEP and DELETE")

    @property
    def context(self) -> int:
        return 2 * self.window + 1

    @property
    def input_dim(self) -> int:
        return self.context * self.embed_dim


@dataclass
class ModelParams:
    """Learnable tensors, each paired with a same-shaped gradient buffer."""

    embed: np.ndarray  # (token_vocab, embed_dim)
    w1: np.ndarray  # (input_dim, hidden)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden, tags)
    b2: np.ndarray  # (tags,)
    g_embed: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    g_w1: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    g_b1: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    g_w2: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    g_b2: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        for name in ("embed", "w1", "b1", "w2", "b2"):
            if getattr(self, "g_" + name) is None:
                object.__setattr__(self, "g_" + name, np.zeros_like(getattr(self, name)))

    def tensors(self) -> list[tuple[str, np.ndarray, np.ndarray]]:
        """(name, parameter, gradient) triples in declaration order."""
        return [
            ("embed", self.embed, self.g_embed),
            ("w1", self.w1, self.g_w1),
            ("b1", self.b1, self.g_b1),
            ("w2", self.w2, self.g_w2),
            ("b2", self.b2, self.g_b2),
        ]

    def zero_grads(self) -> None:
        for _, _, g in self.tensors():
            g[...] = 0.0

    def copy(self) -> "ModelParams":
        return ModelParams(
            embed=self.embed.copy(), w1=self.w1.copy(), b1=self.b1.copy(),
            w2=self.w2.copy(), b2=self.b2.copy(),
        )


def init_params(config: ModelConfig) -> ModelParams:
    """Uniform [-0.1, 0.1] initialization from the config seed; bit-reproducible."""
    rng = np.random.default_rng(config.seed)

    def u(*shape: int) -> np.ndarray:
        return rng.uniform(-0.1, 0.1, size=shape)

    return ModelParams(
        embed=u(config.token_vocab_size, config.embed_dim),
        w1=u(config.input_dim, config.hidden_dim),
        b1=u(config.hidden_dim),
        w2=u(config.hidden_dim, config.tag_vocab_size),
        b2=u(config.tag_vocab_size),
    )


def context_ids(token_ids: np.ndarray, position: int, window: int) -> np.ndarray:
    """Token ids feeding the concatenation for one slot.

    token_ids holds the source tokens (1-based slot q maps to token_ids[q-1]).
    The start slot (position 0) sees START at its center; everywhere else a
    window cell outside 1..m is PAD.
    """
    m = len(token_ids)
    ids = np.empty(2 * window + 1, dtype=np.intp)
    for k, q in enumerate(range(position - window, position + window + 1)):
        if q == 0 and position == 0:
            ids[k] = START
        elif 1 <= q <= m:
            ids[k] = token_ids[q - 1]
        else:
            ids[k] = PAD
    return ids


def context_matrix(token_ids: np.ndarray, window: int) -> np.ndarray:
    """Stacked context ids for all m+1 slots of one sentence."""
    return np.stack([context_ids(token_ids, p, window) for p in range(len(token_ids) + 1)])


@dataclass
class ForwardCache:
    ids: np.ndarray  # (rows, context)
    x: np.ndarray  # (rows, input_dim)
    h: np.ndarray  # (rows, hidden)


def forward_rows(params: ModelParams, ids: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Batched forward pass over pre-built context-id rows."""
    rows = ids.shape[0]
    x = params.embed[ids].reshape(rows, -1)
    h = np.tanh(x @ params.w1 + params.b1)
    logits = h @ params.w2 + params.b2
    return logits, ForwardCache(ids=ids, x=x, h=h)


def backward_rows(params: ModelParams, cache: ForwardCache, grad_logits: np.ndarray) -> None:
    """Accumulate parameter gradients for a batched forward pass."""
    if cache.h.shape[0] != grad_logits.shape[0]:
        raise ValueError("cache / gradient row mismatch")
    params.g_w2 += cache.h.T @ grad_logits
    params.g_b2 += grad_logits.sum(axis=0)
    dh = grad_logits @ params.w2.T
    dz = dh * (1.0 - cache.h * cache.h)
    params.g_w1 += cache.x.T @ dz
    params.g_b1 += dz.sum(axis=0)
    dx = dz @ params.w1.T
    d = params.embed.shape[1]
    np.add.at(params.g_embed, cache.ids.ravel(), dx.reshape(-1, cache.ids.shape[1], d).reshape(-1, d))


def forward(
    params: ModelParams, config: ModelConfig, token_ids: np.ndarray, position: int
) -> tuple[np.ndarray, ForwardCache]:
    """Logits over tags for a single slot, plus cached activations."""
    if not (0 <= position <= len(token_ids)):
        raise ValueError(f"position {position} outside [0, {len(token_ids)}]")
    ids = context_ids(token_ids, position, config.window)[None, :]
    logits, cache = forward_rows(params, ids)
    return logits[0], cache


def backward(params: ModelParams, cache: ForwardCache, grad_logits: np.ndarray) -> None:
    """Accumulate gradients for a single cached slot."""
    backward_rows(params, cache, np.asarray(grad_logits, dtype=np.float64)[None, :])


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(logits))


@dataclass
class Tagger:
    """Bundles parameters with the vocabularies they were trained against."""

    config: ModelConfig
    params: ModelParams
    token_vocab: TokenVocab
    tag_vocab: TagVocab

    @classmethod
    def create(
        cls,
        token_vocab: TokenVocab,
        tag_vocab: TagVocab,
        embed_dim: int = 32,
        window: int = 2,
        hidden_dim: int = 64,
        seed: int = 0,
    ) -> "Tagger":
        config = ModelConfig(
            token_vocab_size=len(token_vocab),
            tag_vocab_size=len(tag_vocab),
            embed_dim=embed_dim,
            window=window,
            hidden_dim=hidden_dim,
            seed=seed,
        )
        return cls(config=config, params=init_params(config), token_vocab=token_vocab, tag_vocab=tag_vocab)

    def slot_logits(self, source: Sequence[str]) -> np.ndarray:
        token_ids = self.token_vocab.encode(source)
        logits, _ = forward_rows(self.params, context_matrix(token_ids, self.config.window))
        return logits

    def predict_probs(self, source: Sequence[str]) -> np.ndarray:
        """Softmax distribution over tags for every slot; rows sum to 1."""
        return softmax(self.slot_logits(source))

    def predict_tags(self, source: Sequence[str], sample_id: int = -1) -> TagSequence:
        """Argmax tag per slot; ties resolve to the lowest tag index.

        The start slot may only carry KEEP or APPEND, so DELETE/REPLACE
        argmaxes there fall back to KEEP.
        """
        logits = self.slot_logits(source)
        ids = logits.argmax(axis=1)
        tags = [self.tag_vocab.tags[i] for i in ids]
        if tags[0].kind not in ("KEEP", "APPEND"):
            tags[0] = self.tag_vocab.tags[0]
        return TagSequence(sample_id=sample_id, tags=tuple(tags))

    def save(self, path: str | Path) -> None:
        save_checkpoint(self, path)

    @classmethod
    def load(cls, path: str | Path, token_vocab: TokenVocab, tag_vocab: TagVocab) -> "Tagger":
        return load_checkpoint(path, token_vocab, tag_vocab)


def save_checkpoint(model: Tagger, path: str | Path) -> None:
    """Binary checkpoint: header then float64 little-endian tensors.

    Layout: magic "GECK", u32 version, u32 embed_dim, u32 window,
    u32 hidden_dim, u32 token_vocab_size, u32 tag_vocab_size, u64 seed,
    u64 token vocab FNV hash, u64 tag vocab FNV hash, then the embed, w1,
    b1, w2, b2 tensors flattened C-order as little-endian float64.
    """
    c = model.config
    header = CHECKPOINT_MAGIC + struct.pack(
        "<6I3Q",
        CHECKPOINT_VERSION,
        c.embed_dim,
        c.window,
        c.hidden_dim,
        c.token_vocab_size,
        c.tag_vocab_size,
        c.seed & 0xFFFFFFFFFFFFFFFF,
        int(model.token_vocab.content_hash(), 16),
        int(model.tag_vocab.content_hash(), 16),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for _, p, _ in model.params.tensors():
            fh.write(np.ascontiguousarray(p, dtype="<f8").tobytes())


def load_checkpoint(path: str | Path, token_vocab: TokenVocab, tag_vocab: TagVocab) -> Tagger:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"{path}: not a checkpoint file")
        version, embed_dim, window, hidden_dim, n_tok, n_tag, seed, tok_hash, tag_hash = struct.unpack(
            "<6I3Q", fh.read(4 * 6 + 8 * 3)
        )
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version}")
        if tok_hash != int(token_vocab.content_hash(), 16):
            raise ValueError(f"{path}: token vocab hash mismatch")
        if tag_hash != int(tag_vocab.content_hash(), 16):
            raise ValueError(f"{path}: tag vocab hash mismatch")
        config = ModelConfig(
            token_vocab_size=n_tok,
            tag_vocab_size=n_tag,
            embed_dim=embed_dim,
            window=window,
            hidden_dim=hidden_dim,
            seed=seed,
        )
        shapes = [
            (n_tok, embed_dim),
            (config.input_dim, hidden_dim),
            (hidden_dim,),
            (hidden_dim, n_tag),
            (n_tag,),
        ]
        arrays = []
        for shape in shapes:
            count = int(np.prod(shape))
            buf = fh.read(count * 8)
            if len(buf) != count * 8:
                raise ValueError(f"{path}: truncated checkpoint")
            arrays.append(np.frombuffer(buf, dtype="<f8").astype(np.float64).reshape(shape))
        if fh.read(1):
            raise ValueError(f"{path}: trailing bytes after tensors")
    params = ModelParams(*arrays)
    return Tagger(config=config, params=params, token_vocab=token_vocab, tag_vocab=tag_vocab)
