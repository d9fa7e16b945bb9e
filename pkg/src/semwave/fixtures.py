"""Generator for the shipped token-space and chunk-store fixtures.

Embeddings are synthetic: each topic gets a random unit centroid, topic words
sit near their centroid, and function words are short random vectors so they
barely move a mean.  ``bank`` deliberately sits between finance and rivers.

Regenerate with ``python3 -m semwave.fixtures src/semwave/data``.
"""

from __future__ import annotations

import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .semantics import ChunkStore, TokenSpace

DIM = 16
N_CHUNKS = 64
SEED = 20240607

TOPICS = {
    "finance": ["money", "loan", "credit", "deposit", "account", "interest", "cash", "invest"],
    "river": ["river", "water", "shore", "flow", "stream", "flood", "current", "boat"],
    "weather": ["rain", "storm", "cloud", "wind", "sun", "snow", "thunder", "cold"],
    "food": ["bread", "cheese", "apple", "soup", "coffee", "tea", "sugar", "salt"],
    "music": ["song", "guitar", "piano", "drum", "melody", "rhythm", "voice", "band"],
    "sport": ["ball", "goal", "team", "match", "score", "coach", "player", "race"],
    "emotion": ["happy", "sad", "joy", "fear", "angry", "calm", "love", "hope"],
    "tech": ["computer", "code", "data", "network", "model", "query", "server", "memory"],
}
FUNCTION_WORDS = ["the", "a", "of", "and", "is", "in", "to", "where", "what", "how",
                  "does", "with", "after", "heavy", "near", "on", "at", "s", "ing"]
# sentiment lexicon; every other token carries zero charge
CHARGES = {"happy": 1.0, "joy": 1.0, "love": 1.0, "hope": 0.5, "calm": 0.5,
           "sad": -1.0, "fear": -1.0, "angry": -1.0}

DEFAULT_CONTEXT = "the river bank after heavy rain"
DEFAULT_QUESTION = "where does the water flow"


def build_space(seed: int = SEED) -> TokenSpace:
    rng = np.random.default_rng(seed)
    centroids = {}
    for topic in TOPICS:
        c = rng.standard_normal(DIM)
        centroids[topic] = c / np.linalg.norm(c)
    tokens, vectors = [], []
    for topic, words in TOPICS.items():
        for w in words:
            v = centroids[topic] + 0.35 * rng.standard_normal(DIM) / np.sqrt(DIM)
            tokens.append(w)
            vectors.append(v / np.linalg.norm(v))
    bank = centroids["finance"] + centroids["river"]
    tokens.append("bank")
    vectors.append(bank / np.linalg.norm(bank))
    for w in FUNCTION_WORDS:
        v = rng.standard_normal(DIM)
        tokens.append(w)
        vectors.append(0.15 * v / np.linalg.norm(v))
    embeddings = np.round(np.array(vectors), 6)
    charges = [CHARGES.get(t, 0.0) for t in tokens]
    return TokenSpace(tokens, embeddings, charges)


def build_chunks(seed: int = SEED) -> list[tuple[str, str]]:
    """64 short texts; each is mostly one topic with an occasional foreign word."""
    rng = np.random.default_rng(seed + 1)
    topics = list(TOPICS)
    items = []
    for i in range(N_CHUNKS):
        topic = topics[i % len(topics)]
        words = list(rng.choice(TOPICS[topic], size=int(rng.integers(4, 7)), replace=False))
        if topic in ("finance", "river") and rng.random() < 0.5:
            words.append("bank")
        if rng.random() < 0.3:
            other = topics[int(rng.integers(len(topics)))]
            words.append(str(rng.choice(TOPICS[other])))
        words += list(rng.choice(FUNCTION_WORDS[:13], size=2, replace=False))
        order = rng.permutation(len(words))
        items.append((f"chunk-{i:02d}", " ".join(str(words[j]) for j in order)))
    return items


def write_fixtures(directory) -> tuple[Path, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    space_path = directory / "token_space.json"
    chunks_path = directory / "chunks.jsonl"
    space_path.write_text(json.dumps(build_space().to_dict(), indent=1) + "\n", encoding="utf-8")
    lines = [json.dumps({"id": cid, "text": text}) for cid, text in build_chunks()]
    chunks_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return space_path, chunks_path


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("semwave") / "data" / name))


def load_fixture_space() -> TokenSpace:
    return TokenSpace.load(fixture_path("token_space.json"))


def load_fixture_chunks(space: TokenSpace | None = None) -> ChunkStore:
    return ChunkStore.load(fixture_path("chunks.jsonl"), space or load_fixture_space())


if __name__ == "__main__":
    for p in write_fixtures(sys.argv[1] if len(sys.argv) > 1 else fixture_path("")):
        print(p)
