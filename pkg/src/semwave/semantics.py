"""Toy token/embedding layer and the retrieval-augmented prompt procedure.

Semantic combination of prompt parts is token concatenation plus the
normalized mean of the part embeddings.  Means are taken with exactly
rounded sums (``math.fsum``) so they do not depend on part order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import (
    DegenerateEmbeddingError,
    DegenerateVectorError,
    InvalidParameterError,
)
from .state import SpatialGrid, WaveFunction, make_gaussian

UNKNOWN = "<unk>"
ROLES = ("context", "question", "chunk", "response")


def _exact_mean(vectors: Sequence[np.ndarray]) -> np.ndarray:
    stacked = np.asarray(vectors, dtype=float)
    return np.array([math.fsum(col) for col in stacked.T]) / len(stacked)


def _unit(v: np.ndarray, error=DegenerateVectorError) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise error("zero vector has no direction")
    return v / n


@dataclass(frozen=True, eq=False)
class TokenSpace:
    tokens: tuple
    embeddings: np.ndarray = field(repr=False)
    charges: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        tokens = tuple(self.tokens)
        if len(set(tokens)) != len(tokens):
            raise InvalidParameterError("token list has duplicates")
        if UNKNOWN in tokens:
            raise InvalidParameterError(f"{UNKNOWN!r} is reserved")
        emb = np.array(self.embeddings, dtype=float)
        if emb.ndim != 2 or emb.shape[0] != len(tokens):
            raise InvalidParameterError("embeddings must be one vector of shared dimension per token")
        if not np.all(np.isfinite(emb)):
            raise InvalidParameterError("embeddings contain NaN or Inf")
        charges = np.zeros(len(tokens)) if self.charges is None else np.array(self.charges, dtype=float)
        if charges.shape != (len(tokens),):
            raise InvalidParameterError("one charge per token required")
        emb.flags.writeable = False
        charges.flags.writeable = False
        object.__setattr__(self, "tokens", tokens)
        object.__setattr__(self, "embeddings", emb)
        object.__setattr__(self, "charges", charges)
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(tokens)})
        object.__setattr__(self, "_max_len", max((len(t) for t in tokens), default=0))

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def vector(self, token: str) -> np.ndarray:
        return self.embeddings[self._index[token]]

    def charge(self, token: str) -> float:
        return float(self.charges[self._index[token]]) if token in self._index else 0.0

    def scaled(self, factor: float) -> "TokenSpace":
        return TokenSpace(self.tokens, self.embeddings * factor, self.charges)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "tokens": [
                {"text": t, "embedding": e.tolist(), "charge": float(c)}
                for t, e, c in zip(self.tokens, self.embeddings, self.charges)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TokenSpace":
        try:
            entries = d["tokens"]
            space = cls(
                [e["text"] for e in entries],
                [e["embedding"] for e in entries],
                [e.get("charge", 0.0) for e in entries],
            )
        except (KeyError, TypeError) as exc:
            raise InvalidParameterError(f"malformed token space: {exc}") from exc
        if "dim" in d and d["dim"] != space.dim:
            raise InvalidParameterError(f"declared dim {d['dim']} != embedding length {space.dim}")
        return space

    @classmethod
    def load(cls, path) -> "TokenSpace":
        with open(path, encoding="utf-8") as fh:
            try:
                return cls.from_dict(json.load(fh))
            except json.JSONDecodeError as exc:
                raise InvalidParameterError(f"{path}: invalid JSON: {exc}") from exc


def tokenize(text: str, space: TokenSpace) -> list[str]:
    """Greedy longest-match sub-word tokenization after whitespace splitting.

    Input is lower-cased.  A run of characters no vocabulary entry can start
    becomes a single ``<unk>``.
    """
    out = []
    for word in text.lower().split():
        pos, unknown_run = 0, False
        while pos < len(word):
            match = None
            for end in range(min(len(word), pos + space._max_len), pos, -1):
                if word[pos:end] in space:
                    match = word[pos:end]
                    break
            if match is None:
                if not unknown_run:
                    out.append(UNKNOWN)
                unknown_run = True
                pos += 1
            else:
                out.append(match)
                unknown_run = False
                pos += len(match)
    return out


def coverage(corpus: str, space: TokenSpace) -> float:
    """Fraction of whitespace words that tokenize without ``<unk>``."""
    words = corpus.split()
    if not words:
        raise InvalidParameterError("corpus is empty")
    covered = sum(UNKNOWN not in tokenize(w, space) for w in words)
    return covered / len(words)


def complexify(v, phase) -> np.ndarray:
    """Coordinate-wise v_k exp(i phi_k); |result_k| = |v_k|."""
    v = np.asarray(v, dtype=float)
    phase = np.asarray(phase, dtype=float)
    if phase.ndim > 0 and phase.shape != v.shape:
        raise InvalidParameterError(f"phase has shape {phase.shape}, vector has {v.shape}")
    out = v * np.exp(1j * phase)
    if not np.all(np.isfinite(out)):
        raise InvalidParameterError("complexified embedding is not finite")
    return out


def cosine_similarity(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise DegenerateVectorError("cosine similarity of a zero vector is undefined")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def embed(tokens: Union[str, Sequence[str]], space: TokenSpace) -> np.ndarray:
    """Normalized mean of the known tokens' embeddings (``<unk>`` is skipped)."""
    if isinstance(tokens, str):
        tokens = tokenize(tokens, space)
    known = [space.vector(t) for t in tokens if t in space]
    if not known:
        raise DegenerateEmbeddingError("no known tokens to embed")
    return _unit(_exact_mean(known), DegenerateEmbeddingError)


def total_semantic_charge(tokens: Iterable[str], space: TokenSpace) -> float:
    return math.fsum(space.charge(t) for t in tokens)


# -- chunks and retrieval ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class Chunk:
    id: str
    tokens: tuple
    embedding: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class ChunkStore:
    chunks: tuple

    def __post_init__(self):
        chunks = tuple(self.chunks)
        ids = [c.id for c in chunks]
        if len(set(ids)) != len(ids):
            raise InvalidParameterError("chunk ids must be unique")
        dims = {len(c.embedding) for c in chunks}
        if len(dims) > 1:
            raise InvalidParameterError("chunk embeddings differ in dimension")
        object.__setattr__(self, "chunks", chunks)

    def __len__(self) -> int:
        return len(self.chunks)

    def get(self, chunk_id: str) -> Chunk:
        for c in self.chunks:
            if c.id == chunk_id:
                return c
        raise KeyError(chunk_id)

    @classmethod
    def from_texts(cls, items: Iterable[tuple], space: TokenSpace) -> "ChunkStore":
        chunks = []
        for chunk_id, text in items:
            tokens = tuple(tokenize(text, space))
            chunks.append(Chunk(str(chunk_id), tokens, embed(tokens, space)))
        return cls(chunks)

    @classmethod
    def load(cls, path, space: TokenSpace) -> "ChunkStore":
        """Read JSON lines ``{"id": ..., "text": ...}``."""
        items = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    items.append((rec["id"], rec["text"]))
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise InvalidParameterError(f"{path}:{lineno}: bad chunk record: {exc}") from exc
        return cls.from_texts(items, space)


def similarities(query, store: ChunkStore) -> np.ndarray:
    q = _unit(np.asarray(query, dtype=float))
    mat = np.array([c.embedding for c in store.chunks], dtype=float)
    return mat @ q / np.linalg.norm(mat, axis=1)


def retrieve_top_k(query, store: ChunkStore, k: int = 5) -> list[str]:
    """Ids of the ``min(k, len(store))`` most cosine-similar chunks, best first.

    Ties are broken by ascending id.
    """
    if len(store) == 0:
        raise InvalidParameterError("chunk store is empty")
    if int(k) != k or k < 1:
        raise InvalidParameterError(f"k must be a positive integer, got {k}")
    sims = similarities(query, store)
    order = sorted(range(len(store)), key=lambda i: (-sims[i], store.chunks[i].id))
    return [store.chunks[i].id for i in order[: int(k)]]


# -- prompt composition ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Part:
    """One prompt component.  ``embedding`` overrides the token-derived vector
    (synthesized responses have a vector but no tokens)."""

    role: str
    tokens: tuple = ()
    embedding: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.role not in ROLES:
            raise InvalidParameterError(f"role must be one of {ROLES}, got {self.role!r}")
        object.__setattr__(self, "tokens", tuple(self.tokens))

    def vector(self, space: TokenSpace) -> np.ndarray:
        if self.embedding is not None:
            return _unit(np.asarray(self.embedding, dtype=float), DegenerateEmbeddingError)
        return embed(self.tokens, space)


@dataclass(frozen=True, eq=False)
class PromptState:
    parts: tuple
    embedding: np.ndarray = field(repr=False)

    @property
    def tokens(self) -> list[str]:
        return [t for p in self.parts for t in p.tokens]

    def extended(self, *parts: Part, space: TokenSpace) -> "PromptState":
        return compose_prompt(list(self.parts) + list(parts), space)


def _as_part(item, space: TokenSpace) -> Part:
    if isinstance(item, Part):
        return item
    role, content = item
    if isinstance(content, str):
        content = tokenize(content, space)
    return Part(role, tuple(content))


def compose_prompt(parts, space: TokenSpace) -> PromptState:
    """Concatenate parts in order; embedding is the normalized mean of part embeddings."""
    parts = [_as_part(p, space) for p in parts]
    if not parts:
        raise InvalidParameterError("cannot compose an empty prompt")
    vectors = [p.vector(space) for p in parts]
    return PromptState(tuple(parts), _unit(_exact_mean(vectors), DegenerateEmbeddingError))


def anchor_drift(history: Sequence, anchor) -> np.ndarray:
    """Per-step 1 - cos(history_t, anchor)."""
    anchor = np.asarray(anchor, dtype=float)
    out = []
    for v in history:
        v = np.asarray(v, dtype=float)
        if v.shape != anchor.shape:
            raise InvalidParameterError(f"dimension mismatch: {v.shape} vs anchor {anchor.shape}")
        out.append(1.0 - cosine_similarity(v, anchor))
    return np.array(out)


def embedding_to_wavepacket(v, axis, grid: SpatialGrid, width: float) -> WaveFunction:
    """Gaussian packet centred at the projection of ``v`` on ``axis``.

    The centre is clamped into the inner 90% of the grid.
    """
    axis = np.asarray(axis, dtype=float)
    if abs(np.linalg.norm(axis) - 1.0) > 1e-9:
        raise InvalidParameterError("axis must be a unit vector")
    center = float(np.dot(np.asarray(v, dtype=float), axis))
    margin = 0.05 * grid.length
    center = min(max(center, grid.x_min + margin), grid.x_max - margin)
    return make_gaussian(grid, center, width, 0.0)


# -- the retrieval-augmented conversation ------------------------------------------


def _floats(v) -> list:
    return [float(x) for x in np.asarray(v, dtype=float)]


def run_rag_demo(space: TokenSpace, store: ChunkStore, context: str, question: str, k: int = 5,
                 turns: int = 10, seed: int = 42, noise: float = 0.15) -> dict:
    """Simulate a retrieval-augmented conversation in embedding space.

    Turn by turn: embed the running history, retrieve the top-k chunks,
    compose chunks + history, and synthesize the response as that composite
    plus seeded Gaussian noise of scale ``noise``.  The response joins the
    history.  A random walk with the same per-step noise, started at the
    anchor, is the control.
    """
    if int(turns) != turns or turns < 1:
        raise InvalidParameterError(f"turns must be a positive integer, got {turns}")
    if noise < 0:
        raise InvalidParameterError("noise must be non-negative")
    rng = np.random.default_rng([seed, 0])
    control_rng = np.random.default_rng([seed, 1])

    history = compose_prompt([("context", context), ("question", question)], space)
    anchor = history.embedding
    records, responses = [], []
    walker, walk = anchor.copy(), []
    for turn in range(1, int(turns) + 1):
        query = history.embedding
        ids = retrieve_top_k(query, store, k)
        sims = similarities(query, store)
        by_id = {c.id: float(s) for c, s in zip(store.chunks, sims)}
        chunk_parts = [Part("chunk", store.get(i).tokens) for i in ids]
        enhanced = compose_prompt(chunk_parts + list(history.parts), space)
        response = _unit(enhanced.embedding + noise * rng.standard_normal(space.dim))
        responses.append(response)
        history = history.extended(Part("response", (), response), space=space)
        walker = _unit(walker + noise * control_rng.standard_normal(space.dim))
        walk.append(walker)
        records.append({
            "turn": turn,
            "query_embedding": _floats(query),
            "retrieved_ids": ids,
            "similarities": [by_id[i] for i in ids],
            "enhanced_prompt_tokens": enhanced.tokens,
            "enhanced_prompt_charge": total_semantic_charge(enhanced.tokens, space),
            "response_embedding": _floats(response),
        })
    drift = anchor_drift(responses, anchor)
    control = anchor_drift(walk, anchor)
    for rec, dr in zip(records, drift):
        rec["drift"] = float(dr)
    return {
        "context": context,
        "question": question,
        "k": int(k),
        "turns": int(turns),
        "seed": int(seed),
        "noise": float(noise),
        "anchor": _floats(anchor),
        "anchor_charge": total_semantic_charge(compose_prompt(
            [("context", context), ("question", question)], space).tokens, space),
        "history": records,
        "drift": _floats(drift),
        "control_drift": _floats(control),
        "max_drift": float(drift.max()),
        "max_control_drift": float(control.max()),
        "anchor_held": bool(drift.max() < control.max()),
    }
