"""Author-developer matching: candidates, scoring, splits, evaluation.

The reference scorer is deterministic and rule-based, with fixed
confidence bands (exact normalized name 0.99, email local-part
signature 0.98, initials+surname 0.85 + 0.1*trigram, otherwise
0.6*max-trigram).  A fine-tuned external model can be swapped in
through the adapter protocol; the pipeline treats both the same way.
"""

from __future__ import annotations

import json
import math
import random
import re
import subprocess
import unicodedata
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import requests

from .errors import AdapterUnavailable, DegenerateSplit
from .records import AuthorSlot, ContributorStat

BAND_EXACT_NAME = 0.99
BAND_EMAIL_LOCAL = 0.98
BAND_INITIALS_BASE = 0.85
BAND_INITIALS_TRIGRAM = 0.10
BAND_FALLBACK_TRIGRAM = 0.60

_NON_ALNUM_RE = re.compile(r"[^a-z0-9]+")

LABELS = ("match", "non_match")


def normalize_text(text: str | None) -> str:
    """Compatibility-decompose, drop combining marks, casefold, and
    collapse non-alphanumeric runs to single spaces."""
    if not text:
        return ""
    decomposed = unicodedata.normalize("NFKD", text)
    stripped = "".join(c for c in decomposed if not unicodedata.combining(c))
    return _NON_ALNUM_RE.sub(" ", stripped.casefold()).strip()


def _trigram_counts(normalized: str) -> Counter:
    if not normalized:
        return Counter()
    if len(normalized) < 3:
        return Counter({normalized: 1})
    return Counter(normalized[i : i + 3] for i in range(len(normalized) - 2))


def text_similarity(a: str | None, b: str | None) -> float:
    """Cosine similarity of character-trigram frequency vectors over
    normalized text.  Exactly 1.0 iff both normalize to the same
    non-empty string, 0.0 if either normalizes to empty."""
    na, nb = normalize_text(a), normalize_text(b)
    if not na or not nb:
        return 0.0
    if na == nb:
        return 1.0
    ca, cb = _trigram_counts(na), _trigram_counts(nb)
    dot = sum(count * cb[gram] for gram, count in ca.items())
    if dot == 0:
        return 0.0
    norm_a = math.sqrt(sum(c * c for c in ca.values()))
    norm_b = math.sqrt(sum(c * c for c in cb.values()))
    return min(dot / (norm_a * norm_b), 1.0)


def _email_local_part(email: str | None) -> str | None:
    if not email or "@" not in email:
        return None
    return email.split("@", 1)[0]


def _dev_fields(dev: ContributorStat) -> list[str]:
    fields = [dev.username]
    if dev.display_name:
        fields.append(dev.display_name)
    local = _email_local_part(dev.email)
    if local:
        fields.append(local)
    return fields


def _name_signatures(name_tokens: Sequence[str]) -> set[str]:
    """Compact username-style signatures for an author name
    ("Jane Doe" -> jdoe, janedoe, doejane, ...)."""
    if not name_tokens:
        return set()
    if len(name_tokens) == 1:
        return {name_tokens[0]}
    first, last = name_tokens[0], name_tokens[-1]
    sigs = {
        "".join(name_tokens),
        first + last,
        last + first,
        first[0] + last,
        last + first[0],
        first + last[0],
    }
    return sigs


def _initials_compatible(tokens_a: Sequence[str], tokens_b: Sequence[str]) -> bool:
    """True when the two token lists describe the same name up to
    abbreviated given names ("j doe" vs "jane doe")."""
    if len(tokens_a) != len(tokens_b) or len(tokens_a) < 2:
        return False
    if tokens_a[-1] != tokens_b[-1]:
        return False
    if tokens_a == tokens_b:
        return False
    for ta, tb in zip(tokens_a[:-1], tokens_b[:-1]):
        if ta == tb:
            continue
        if len(ta) == 1 and tb.startswith(ta):
            continue
        if len(tb) == 1 and ta.startswith(tb):
            continue
        return False
    return True


def score_pair(author: AuthorSlot | str, dev: ContributorStat) -> float:
    """Deterministic match confidence in [0, 1] for one author-account
    pair.  Monotone nondecreasing in every underlying feature."""
    author_name = author.display_name if isinstance(author, AuthorSlot) else author
    norm_author = normalize_text(author_name)
    if not norm_author:
        return 0.0
    author_tokens = norm_author.split()

    fields = _dev_fields(dev)
    norm_fields = [normalize_text(f) for f in fields]
    norm_fields = [f for f in norm_fields if f]
    if not norm_fields:
        return 0.0

    best_trigram = max(text_similarity(norm_author, f) for f in norm_fields)
    score = BAND_FALLBACK_TRIGRAM * best_trigram

    if any(f == norm_author for f in norm_fields):
        score = max(score, BAND_EXACT_NAME)

    local = _email_local_part(dev.email)
    if local:
        local_sig = _NON_ALNUM_RE.sub("", normalize_text(local))
        if local_sig and local_sig in _name_signatures(author_tokens):
            score = max(score, BAND_EMAIL_LOCAL)

    for f in norm_fields:
        if _initials_compatible(author_tokens, f.split()):
            score = max(score, BAND_INITIALS_BASE + BAND_INITIALS_TRIGRAM * best_trigram)
            break

    return min(score, 1.0)


@dataclass(frozen=True)
class CandidatePair:
    author_id: str
    dev_id: str
    similarity: float


def generate_candidates(
    authors: Sequence[AuthorSlot],
    devs: Sequence[ContributorStat],
    k: int = 3,
) -> list[CandidatePair]:
    """For each developer account, the k most similar authors by the
    account's best field (max over username, display name, and email
    local-part), ties broken by ascending author id."""
    out: list[CandidatePair] = []
    for dev in devs:
        fields = _dev_fields(dev)
        ranked = []
        for author in authors:
            sim = max((text_similarity(author.display_name, f) for f in fields), default=0.0)
            ranked.append((-sim, author.author_id, sim))
        ranked.sort()
        for _, author_id, sim in ranked[:k]:
            out.append(CandidatePair(author_id=author_id, dev_id=dev.dev_id, similarity=sim))
    return out


@dataclass(frozen=True)
class GoldLabel:
    author_id: str
    dev_id: str
    label: str
    annotator: str

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown label: {self.label!r}")


def load_gold_labels(path: str | Path) -> list[GoldLabel]:
    labels = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            labels.append(
                GoldLabel(
                    author_id=row["author_id"],
                    dev_id=row["dev_id"],
                    label=row["label"],
                    annotator=row.get("annotator", "a1"),
                )
            )
    return labels


class _UnionFind:
    def __init__(self):
        self.parent: dict[str, str] = {}

    def find(self, x: str) -> str:
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def entity_disjoint_split(
    labels: Sequence[GoldLabel],
    author_frac: float = 0.1,
    dev_frac: float = 0.1,
    seed: int = 0,
) -> tuple[list[GoldLabel], list[GoldLabel]]:
    """Hold out a fraction of unique authors and developers; every label
    touching a held-out entity lands in the test side.

    Separation is total: because pairs chain entities together, the
    split moves whole connected components of the label graph, so no
    author or developer ever appears on both sides.  Deterministic for
    a given seed.
    """
    if not labels:
        raise DegenerateSplit("no labels to split")
    authors = sorted({l.author_id for l in labels})
    devs = sorted({l.dev_id for l in labels})
    rng = random.Random(seed)
    n_authors = max(1, round(len(authors) * author_frac))
    n_devs = max(1, round(len(devs) * dev_frac))
    held = {f"A:{a}" for a in rng.sample(authors, n_authors)}
    held |= {f"D:{d}" for d in rng.sample(devs, n_devs)}

    uf = _UnionFind()
    for label in labels:
        uf.union(f"A:{label.author_id}", f"D:{label.dev_id}")
    test_roots = {uf.find(node) for node in held}

    train, test = [], []
    for label in labels:
        if uf.find(f"A:{label.author_id}") in test_roots:
            test.append(label)
        else:
            train.append(label)
    if not train or not test:
        raise DegenerateSplit("split produced an empty side")
    return train, test


@dataclass
class MatchEvalReport:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float
    macro_precision: float
    macro_recall: float
    macro_f1: float


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def evaluate_matcher(
    predictions: Mapping[tuple[str, str], float],
    gold: Sequence[GoldLabel],
    threshold: float = 0.5,
) -> MatchEvalReport:
    """Binary evaluation with positive = match; macro metrics average
    the match and non-match classes.  Every gold pair must have a
    prediction."""
    tp = fp = fn = tn = 0
    for label in gold:
        key = (label.author_id, label.dev_id)
        if key not in predictions:
            raise ValueError(f"missing prediction for {key}")
        predicted_match = predictions[key] >= threshold
        actual_match = label.label == "match"
        if predicted_match and actual_match:
            tp += 1
        elif predicted_match:
            fp += 1
        elif actual_match:
            fn += 1
        else:
            tn += 1
    precision, recall, f1 = _prf(tp, fp, fn)
    neg_precision, neg_recall, neg_f1 = _prf(tn, fn, fp)
    return MatchEvalReport(
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
        precision=precision,
        recall=recall,
        f1=f1,
        macro_precision=(precision + neg_precision) / 2,
        macro_recall=(recall + neg_recall) / 2,
        macro_f1=(f1 + neg_f1) / 2,
    )


class ExternalModelAdapter:
    """Bridge to a fine-tuned scoring model over subprocess or HTTP.

    Request payload is a JSON array of {author_text, dev_text}; the
    response must be a JSON array of reals in [0, 1], one per input,
    in order.  Anything else raises AdapterUnavailable so the caller
    can fall back to the rule scorer.
    """

    def __init__(
        self,
        command: Sequence[str] | None = None,
        url: str | None = None,
        timeout: float = 60.0,
    ):
        if not command and not url:
            raise ValueError("adapter needs a command or a url")
        self.command = list(command) if command else None
        self.url = url
        self.timeout = timeout

    def score(self, pairs: Iterable[tuple[str, str]]) -> list[float]:
        payload = [{"author_text": a, "dev_text": d} for a, d in pairs]
        raw = self._call(payload)
        return self._validate(raw, expected=len(payload))

    def _call(self, payload: list[dict]) -> object:
        body = json.dumps(payload)
        if self.command:
            try:
                proc = subprocess.run(
                    self.command,
                    input=body.encode("utf-8"),
                    capture_output=True,
                    timeout=self.timeout,
                    check=True,
                )
            except (OSError, subprocess.SubprocessError) as exc:
                raise AdapterUnavailable(f"adapter subprocess failed: {exc}") from exc
            text = proc.stdout.decode("utf-8", errors="replace")
        else:
            try:
                resp = requests.post(
                    self.url, data=body,
                    headers={"Content-Type": "application/json"},
                    timeout=self.timeout,
                )
                resp.raise_for_status()
                text = resp.text
            except requests.RequestException as exc:
                raise AdapterUnavailable(f"adapter endpoint failed: {exc}") from exc
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise AdapterUnavailable("adapter returned invalid JSON") from exc

    @staticmethod
    def _validate(raw: object, expected: int) -> list[float]:
        if not isinstance(raw, list) or len(raw) != expected:
            raise AdapterUnavailable(
                f"adapter returned {len(raw) if isinstance(raw, list) else 'non-list'}"
                f" results for {expected} inputs"
            )
        scores = []
        for value in raw:
            if not isinstance(value, (int, float)) or not 0.0 <= float(value) <= 1.0:
                raise AdapterUnavailable(f"adapter confidence out of range: {value!r}")
            scores.append(float(value))
        return scores
