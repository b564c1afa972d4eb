"""Frozen toy text encoder: tag tokens -> fixed-length context sequence."""

from __future__ import annotations

import math

import numpy as np
import torch
import torch.nn as nn

from ..errors import VocabularyError
from ..tagging import TagSet
from ..toydata import VOCAB

PAD_TOKEN = 0
SEP_TOKEN = 1
TOKEN_OFFSET = 2


def _sinusoidal_table(length: int, dim: int) -> torch.Tensor:
    pos = np.arange(length)[:, None]
    i = np.arange(dim)[None, :]
    angle = pos / np.power(10000.0, (2 * (i // 2)) / dim)
    table = np.where(i % 2 == 0, np.sin(angle), np.cos(angle))
    return torch.from_numpy(table.astype(np.float32))


class TextEncoderToy(nn.Module):
    """Embedding table over vocabulary + {pad, sep}; frozen after construction."""

    def __init__(self, vocab=VOCAB, dim: int = 64, context_len: int = 16, seed: int = 0):
        super().__init__()
        self.vocab = tuple(vocab)
        self.dim = dim
        self.context_len = context_len
        self._index = {t: i for i, t in enumerate(self.vocab)}
        gen = torch.Generator().manual_seed(seed)
        table = torch.randn(len(self.vocab) + TOKEN_OFFSET, dim, generator=gen) * 0.5
        self.embedding = nn.Embedding.from_pretrained(table, freeze=True)
        self.register_buffer("positional", _sinusoidal_table(context_len, dim) * 0.1)
        for p in self.parameters():
            p.requires_grad_(False)

    def tokenize(self, tags) -> torch.Tensor:
        """Canonical token ids: tags in vocabulary order, separator-joined, padded."""
        if isinstance(tags, TagSet):
            tags = tags.tags
        tags = set(tags)
        for t in tags:
            if t not in self._index:
                raise VocabularyError(f"unknown tag {t!r}")
        ordered = [t for t in self.vocab if t in tags]
        ids = []
        for k, t in enumerate(ordered):
            if k:
                ids.append(SEP_TOKEN)
            ids.append(self._index[t] + TOKEN_OFFSET)
        ids = ids[:self.context_len]
        ids += [PAD_TOKEN] * (self.context_len - len(ids))
        return torch.tensor(ids, dtype=torch.long)

    def encode(self, tags) -> torch.Tensor:
        """Deterministic [context_len, dim] context; empty tags give the null prompt."""
        with torch.no_grad():
            ctx = self.embedding(self.tokenize(tags)) + self.positional
        return ctx.detach()


def encode_text(encoder: TextEncoderToy, tags) -> torch.Tensor:
    return encoder.encode(tags)
