"""Toolkit checkpoint reader and forward pass, from the published format.

Checkpoint layout: magic "GECK", little-endian u32 version(=1), u32
embed_dim, u32 window, u32 hidden_dim, u32 token_vocab_size, u32
tag_vocab_size, u64 seed, u64 token-vocab FNV, u64 tag-vocab FNV, then the
embed/w1/b1/w2/b2 tensors as C-order little-endian float64. Per slot the
model computes logits = w2^T tanh(w1^T x + b1) + b2 over the concatenated
context-window embeddings; slot 0 embeds <s> at its center and positions
outside the sentence embed <pad>.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .formats import TagVocabFile, TokenVocabFile

MAGIC = b"GECK"
PAD, UNK, START = 0, 1, 2


@dataclass
class ToolkitTagger:
    """A trained toolkit tagger reconstructed from its checkpoint file."""

    embed: np.ndarray
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    window: int
    token_index: dict[str, int]
    tag_renderings: list[str]
    tag_vocab_hash: str

    def tag_inventory(self) -> list[str]:
        return self.tag_renderings

    def _context_row(self, token_ids: np.ndarray, position: int) -> np.ndarray:
        m = len(token_ids)
        ids = np.empty(2 * self.window + 1, dtype=np.intp)
        for k, q in enumerate(range(position - self.window, position + self.window + 1)):
            if q == 0 and position == 0:
                ids[k] = START
            elif 1 <= q <= m:
                ids[k] = token_ids[q - 1]
            else:
                ids[k] = PAD
        return ids

    def predict_dist(self, source: tuple[str, ...]) -> np.ndarray:
        """Softmax tag distribution for every slot, shape (m+1, tags)."""
        token_ids = np.asarray([self.token_index.get(t, UNK) for t in source], dtype=np.intp)
        ids = np.stack([self._context_row(token_ids, p) for p in range(len(source) + 1)])
        x = self.embed[ids].reshape(ids.shape[0], -1)
        h = np.tanh(x @ self.w1 + self.b1)
        logits = h @ self.w2 + self.b2
        z = logits - logits.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)


def load_toolkit_tagger(
    checkpoint_path: str | Path, token_vocab: TokenVocabFile, tag_vocab: TagVocabFile
) -> ToolkitTagger:
    with open(checkpoint_path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValueError(f"{checkpoint_path}: not a toolkit checkpoint")
        version, embed_dim, window, hidden_dim, n_tok, n_tag, _seed, tok_hash, tag_hash = struct.unpack(
            "<6I3Q", fh.read(4 * 6 + 8 * 3)
        )
        if version != 1:
            raise ValueError(f"{checkpoint_path}: unsupported checkpoint version {version}")
        if tok_hash != int(token_vocab.hash, 16):
            raise ValueError("checkpoint/token-vocab hash mismatch")
        if tag_hash != int(tag_vocab.hash, 16):
            raise ValueError("checkpoint/tag-vocab hash mismatch")
        if n_tok != len(token_vocab.tokens) or n_tag != len(tag_vocab.tags):
            raise ValueError("checkpoint dimensions do not match vocab files")
        input_dim = (2 * window + 1) * embed_dim
        shapes = [(n_tok, embed_dim), (input_dim, hidden_dim), (hidden_dim,), (hidden_dim, n_tag), (n_tag,)]
        tensors = []
        for shape in shapes:
            count = int(np.prod(shape))
            buf = fh.read(count * 8)
            if len(buf) != count * 8:
                raise ValueError(f"{checkpoint_path}: truncated checkpoint")
            tensors.append(np.frombuffer(buf, dtype="<f8").astype(np.float64).reshape(shape))
        if fh.read(1):
            raise ValueError(f"{checkpoint_path}: trailing bytes")
    embed, w1, b1, w2, b2 = tensors
    return ToolkitTagger(
        embed=embed,
        w1=w1,
        b1=b1,
        w2=w2,
        b2=b2,
        window=window,
        token_index=token_vocab.index(),
        tag_renderings=list(tag_vocab.tags),
        tag_vocab_hash=tag_vocab.hash,
    )
