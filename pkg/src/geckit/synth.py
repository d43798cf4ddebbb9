"""Rule-based synthetic corpus generator for controlled experiments.

Builds small English-like sentences from templates with agreement rules,
injects grammatical errors into the source side, and optionally corrupts a
fraction of the training annotations (targets) to simulate uneven
annotation quality. Corruption is either under-correction (errors left
unfixed) or mis-correction (a correct target token rewritten to a wrong
one). A slice of determiner corrections is drawn randomly from two equally
valid choices, giving genuine annotation diversity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, ParallelSample

SUBJ_SG = ["he", "she", "it"]
SUBJ_PL = ["they", "we", "you", "i"]
VERBS = {
    "go": "goes",
    "walk": "walks",
    "run": "runs",
    "like": "likes",
    "want": "wants",
    "see": "sees",
    "read": "reads",
    "buy": "buys",
}
PLACES = ["school", "work", "town", "bed", "church"]
NOUNS = ["apple", "orange", "book", "pen", "house", "garden", "dog", "egg", "idea", "car"]
MISSPELL = {"school": "schol", "apple": "aple", "the": "teh", "goes": "gose", "book": "bok"}
_FORMS = list(VERBS) + list(VERBS.values())


@dataclass(frozen=True)
class SynthConfig:
    n_train: int = 2000
    n_dev: int = 300
    seed: int = 2024
    error_free_rate: float = 0.3
    corruption_rate: float = 0.2
    ambiguous_det_rate: float = 0.5


def _article(noun: str) -> str:
    return "an" if noun[0] in "aeiou" else "a"


def _clean_sentence(rng: np.random.Generator) -> tuple[list[str], str]:
    """A grammatical sentence plus its template kind ("to" or "det")."""
    subj = str(rng.choice(SUBJ_SG + SUBJ_PL))
    base = str(rng.choice(list(VERBS)))
    verb = VERBS[base] if subj in SUBJ_SG else base
    if rng.random() < 0.5:
        place = str(rng.choice(PLACES))
        return [subj, verb, "to", place, "."], "to"
    noun = str(rng.choice(NOUNS))
    det = _article(noun) if rng.random() < 0.5 else "the"
    return [subj, verb, det, noun, "."], "det"


def _flip_verb(tok: str) -> str:
    for base, third in VERBS.items():
        if tok == base:
            return third
        if tok == third:
            return base
    return tok


def _inject_errors(rng: np.random.Generator, clean: list[str], kind: str) -> list[str]:
    source = list(clean)
    choices = ["verb"]
    if kind == "to":
        choices.append("drop_to")
    else:
        choices += ["drop_det", "wrong_det"]
    if any(t in MISSPELL for t in source):
        choices.append("misspell")
    n_errors = 1 if rng.random() < 0.7 else 2
    picked = list(rng.choice(choices, size=min(n_errors, len(choices)), replace=False))
    # Apply deletions last so earlier indices stay valid.
    for err in sorted(picked, key=lambda e: e.startswith("drop")):
        if err == "verb":
            source[1] = _flip_verb(source[1])
        elif err == "wrong_det":
            det = source[2]
            source[2] = {"a": "an", "an": "a"}.get(det, "a")
        elif err == "misspell":
            idx = [i for i, t in enumerate(source) if t in MISSPELL]
            if idx:  # an earlier edit may have rewritten the candidate token
                i = int(rng.choice(idx))
                source[i] = MISSPELL[source[i]]
        elif err == "drop_to":
            source.remove("to")
        elif err == "drop_det":
            del source[2]
    return source


def _make_pair(rng: np.random.Generator, cfg: SynthConfig) -> tuple[list[str], list[str]]:
    clean, kind = _clean_sentence(rng)
    target = list(clean)
    if kind == "det" and rng.random() < cfg.ambiguous_det_rate:
        # Either article or "the" is an acceptable correction here; sampling
        # one of them makes the annotation genuinely non-unique.
        target[2] = _article(target[3]) if rng.random() < 0.5 else "the"
    if rng.random() < cfg.error_free_rate:
        return list(target), target
    return _inject_errors(rng, target, kind), target


def _corrupt_target(rng: np.random.Generator, source: list[str], target: list[str]) -> list[str]:
    if source != target and rng.random() < 0.5:
        return list(source)  # under-correction: leave the errors in place
    bad = list(target)
    positions = [i for i, t in enumerate(bad) if t != "."]
    i = int(rng.choice(positions))
    pool = [t for t in _FORMS + ["a", "an", "the"] + NOUNS if t != bad[i]]
    bad[i] = str(rng.choice(pool))
    return bad


@dataclass
class SynthCorpus:
    train: Corpus
    dev: Corpus
    corrupted_ids: set[int]


def generate(cfg: SynthConfig) -> SynthCorpus:
    rng = np.random.default_rng(cfg.seed)
    train_samples: list[ParallelSample] = []
    corrupted: set[int] = set()
    for i in range(cfg.n_train):
        source, target = _make_pair(rng, cfg)
        if rng.random() < cfg.corruption_rate:
            target = _corrupt_target(rng, source, target)
            corrupted.add(i)
        train_samples.append(ParallelSample(id=i, source=tuple(source), target=tuple(target)))
    dev_samples = []
    for i in range(cfg.n_dev):
        source, target = _make_pair(rng, cfg)
        dev_samples.append(ParallelSample(id=i, source=tuple(source), target=tuple(target)))
    return SynthCorpus(
        train=Corpus(name="synth-train", samples=train_samples),
        dev=Corpus(name="synth-dev", samples=dev_samples),
        corrupted_ids=corrupted,
    )
