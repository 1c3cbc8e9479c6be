"""Post-decoding entity correction: gazetteer disambiguation and diacritic folding.

Spelling variation in Hausa, Igbo, and Yoruba is dominated by tone marks and
sub-dot letters, so all gazetteer matching is diacritic-insensitive: both the
gazetteer keys and the sentence tokens are folded before comparison.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Set, Tuple

from .errors import WazobiaError
from .text import EntityType, EntitySpan, Sentence, _span_from_tokens, normalize

# Sub-dot / tonal letter forms mapped to base letters, by code point:
#   U+1EB9/U+1EB8 (e dot below), U+1ECD/U+1ECC (o dot below),
#   U+1E63/U+1E62 (s dot below), U+1ECB/U+1ECA (i dot below),
#   U+1EE5/U+1EE4 (u dot below), U+1E45/U+1E44 (n dot above)
_DOTTED_MAP = str.maketrans(
    {
        "ẹ": "e", "Ẹ": "E",
        "ọ": "o", "Ọ": "O",
        "ṣ": "s", "Ṣ": "S",
        "ị": "i", "Ị": "I",
        "ụ": "u", "Ụ": "U",
        "ṅ": "n", "Ṅ": "N",
    }
)


def fold_diacritics(text: str) -> str:
    """Strip combining marks and dotted-letter forms, then lowercase.

    Canonical decomposition first, so both composed and decomposed spellings
    of a tone-marked letter fold to the same base character. Idempotent and
    the identity on plain ASCII.
    """
    decomposed = unicodedata.normalize("NFD", text)
    stripped = "".join(ch for ch in decomposed if not unicodedata.combining(ch))
    return stripped.translate(_DOTTED_MAP).lower()


@dataclass
class Gazetteer:
    """Curated entity phrases per type, keyed by normalized phrase text.

    ``entries`` keys are normalize()d, single-space-joined token sequences.
    Two derived indexes support the lookups the pipeline needs: a folded
    phrase index for diacritic-insensitive span matching and a folded token
    index for per-token membership features.
    """

    entries: Dict[str, Set[EntityType]] = field(default_factory=dict)
    max_phrase_len: int = 0
    _folded: Dict[str, Set[EntityType]] = field(default_factory=dict, repr=False)
    _token_types: Dict[str, Set[EntityType]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for phrase, types in self.entries.items():
            self._index(phrase, types)

    def _index(self, phrase: str, types: Set[EntityType]) -> None:
        words = phrase.split(" ")
        self.max_phrase_len = max(self.max_phrase_len, len(words))
        folded = fold_diacritics(phrase)
        self._folded.setdefault(folded, set()).update(types)
        for word in words:
            self._token_types.setdefault(fold_diacritics(word), set()).update(types)

    def add(self, entity_type: EntityType, phrase: str) -> None:
        key = " ".join(normalize(w) for w in phrase.split())
        if not key:
            raise WazobiaError("BAD_LINE", "empty gazetteer phrase")
        bucket = self.entries.setdefault(key, set())
        bucket.add(entity_type)
        self._index(key, {entity_type})

    def phrase_types(self, folded_phrase: str) -> Set[EntityType]:
        """Types registered for a folded phrase (empty set when absent)."""
        return self._folded.get(folded_phrase, set())

    def token_types(self, token_normalized: str) -> Set[EntityType]:
        """Types whose phrases contain this token (diacritic-insensitive)."""
        return self._token_types.get(fold_diacritics(token_normalized), set())

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def load(cls, path) -> "Gazetteer":
        """Read a gazetteer file: ``TYPE<TAB>phrase`` lines, ``#`` comments."""
        gaz = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise WazobiaError(
                        "BAD_LINE", f"{path}:{lineno}: expected TYPE<TAB>phrase"
                    )
                gaz.add(EntityType.parse(parts[0]), parts[1])
        return gaz


_TYPE_ORDER = (EntityType.PER, EntityType.ORG, EntityType.LOC)


def _pick_type(types: Set[EntityType], predicted: EntityType) -> EntityType:
    if predicted in types:
        return predicted
    for t in _TYPE_ORDER:
        if t in types:
            return t
    return predicted


def _find_matches(
    sentence: Sentence, gaz: Gazetteer
) -> List[Tuple[int, int, Set[EntityType]]]:
    """All (start_tok, end_tok, types) gazetteer phrase matches in the sentence."""
    folded = [fold_diacritics(tok.normalized) for tok in sentence.tokens]
    matches = []
    for start in range(len(folded)):
        for end in range(start, min(start + gaz.max_phrase_len, len(folded))):
            types = gaz.phrase_types(" ".join(folded[start : end + 1]))
            if types:
                matches.append((start, end, types))
    return matches


def disambiguate(
    spans: Sequence[EntitySpan], sentence: Sentence, gaz: Gazetteer
) -> List[EntitySpan]:
    """Resolve predicted spans against the gazetteer.

    A span strictly contained in a longer matching phrase is widened to the
    longest such phrase (ties to leftmost) and takes the gazetteer type; a
    span whose own surface maps to exactly one type is retyped to it.
    Widening is skipped when the wider range would swallow another span that
    is itself an exact gazetteer match. Residual overlaps are resolved
    longest-match-wins, ties to leftmost.
    """
    if not gaz.entries or not spans:
        return list(spans)

    matches = _find_matches(sentence, gaz)
    folded = [fold_diacritics(tok.normalized) for tok in sentence.tokens]

    def span_phrase(s: int, e: int) -> str:
        return " ".join(folded[s : e + 1])

    def is_exact_match(span: EntitySpan) -> bool:
        return span.entity_type in gaz.phrase_types(span_phrase(span.start_tok, span.end_tok))

    results: List[EntitySpan] = []
    for span in spans:
        covering = [
            (s, e, types)
            for (s, e, types) in matches
            if s <= span.start_tok and e >= span.end_tok and (e - s) > (span.end_tok - span.start_tok)
        ]
        widened = None
        for s, e, types in sorted(covering, key=lambda m: (-(m[1] - m[0]), m[0])):
            absorbs_match = any(
                other is not span
                and not (e < other.start_tok or s > other.end_tok)
                and is_exact_match(other)
                for other in spans
            )
            if not absorbs_match:
                widened = _span_from_tokens(_pick_type(types, span.entity_type), s, e, sentence.tokens)
                break
        if widened is not None:
            results.append(widened)
            continue
        own_types = gaz.phrase_types(span_phrase(span.start_tok, span.end_tok))
        if len(own_types) == 1 and span.entity_type not in own_types:
            (only_type,) = own_types
            results.append(
                _span_from_tokens(only_type, span.start_tok, span.end_tok, sentence.tokens)
            )
        else:
            results.append(span)

    # Longest wins, ties to leftmost; drop anything overlapping a kept span.
    kept: List[EntitySpan] = []
    for span in sorted(
        results, key=lambda sp: (-(sp.end_tok - sp.start_tok), sp.start_tok)
    ):
        if all(
            span.end_tok < other.start_tok or span.start_tok > other.end_tok
            for other in kept
        ):
            kept.append(span)
    kept.sort(key=lambda sp: sp.start_tok)
    return kept
