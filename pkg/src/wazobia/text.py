"""Tokenization, normalization, the BIO label scheme, and span conversion.

Character offsets are counted in Unicode scalar values (Python string
indices), never bytes, so slicing the source text with a token's offsets
reproduces the token exactly.  Punctuation is kept as single-character
tokens flagged ``is_punct`` rather than deleted; downstream stages exclude
those tokens from feature windows and from entity spans, which preserves
offset fidelity for highlighting.
"""

from __future__ import annotations

import enum
import unicodedata
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .errors import WazobiaError


class Language(enum.Enum):
    HAUSA = "hausa"
    IGBO = "igbo"
    YORUBA = "yoruba"
    UNKNOWN = "unknown"

    @classmethod
    def parse(cls, value: str) -> "Language":
        """Parse a language name or ISO 639-1 code; anything else is an error."""
        aliases = {"ha": "hausa", "ig": "igbo", "yo": "yoruba"}
        key = value.strip().lower()
        key = aliases.get(key, key)
        for lang in cls:
            if lang.value == key:
                return lang
        raise WazobiaError("BAD_LANGUAGE", f"unsupported language {value!r}")


class EntityType(enum.Enum):
    PER = "PER"
    ORG = "ORG"
    LOC = "LOC"

    @classmethod
    def parse(cls, value: str) -> "EntityType":
        try:
            return cls[value.strip().upper()]
        except KeyError:
            raise WazobiaError("BAD_TYPE", f"unknown entity type {value!r}") from None


# Fixed label ordering: index 0 is O; all matrix layouts use this order.
BIO_LABELS: Tuple[str, ...] = ("O", "B-PER", "I-PER", "B-ORG", "I-ORG", "B-LOC", "I-LOC")
LABEL_INDEX = {label: i for i, label in enumerate(BIO_LABELS)}
N_LABELS = len(BIO_LABELS)


def parse_label(tag: str) -> str:
    """Validate a BIO tag against the closed 7-label set."""
    if tag not in LABEL_INDEX:
        raise WazobiaError("BAD_TAG", f"tag {tag!r} is not one of {'/'.join(BIO_LABELS)}")
    return tag


def label_entity_type(label: str) -> Optional[EntityType]:
    """Entity type of a B-/I- label, None for O."""
    if label == "O":
        return None
    return EntityType[label[2:]]


@dataclass(frozen=True)
class Token:
    text: str
    normalized: str
    start_char: int
    end_char: int
    is_punct: bool = False


@dataclass(frozen=True)
class Sentence:
    tokens: Tuple[Token, ...]
    language: Language = Language.UNKNOWN
    pos_tags: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        if self.pos_tags is not None and len(self.pos_tags) != len(self.tokens):
            raise WazobiaError(
                "LENGTH_MISMATCH",
                f"{len(self.pos_tags)} POS tags for {len(self.tokens)} tokens",
            )

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class EntitySpan:
    """Typed entity over an inclusive token range.

    Character offsets and surface are derived from tokens when available;
    spans built from bare label sequences carry zeros and an empty surface.
    """

    entity_type: EntityType
    start_tok: int
    end_tok: int
    start_char: int = 0
    end_char: int = 0
    surface: str = ""

    def key(self) -> Tuple[EntityType, int, int]:
        return (self.entity_type, self.start_tok, self.end_tok)


def normalize(text: str) -> str:
    """Lowercase, then compose to Unicode NFC. Diacritics are preserved."""
    return unicodedata.normalize("NFC", text.lower())


def _is_punct_char(ch: str) -> bool:
    # Punctuation and symbol categories both count as "symbols to isolate".
    return unicodedata.category(ch)[0] in ("P", "S")


def tokenize(text: str) -> List[Token]:
    """Split text into word and single-character punctuation tokens.

    Every non-whitespace character lands in exactly one token; whitespace
    never appears inside a token.
    """
    tokens: List[Token] = []
    word_start = -1

    def flush(end: int) -> None:
        nonlocal word_start
        if word_start >= 0:
            surface = text[word_start:end]
            tokens.append(Token(surface, normalize(surface), word_start, end, False))
            word_start = -1

    for i, ch in enumerate(text):
        if ch.isspace():
            flush(i)
        elif _is_punct_char(ch):
            flush(i)
            tokens.append(Token(ch, normalize(ch), i, i + 1, True))
        elif word_start < 0:
            word_start = i
    flush(len(text))
    return tokens


def sentence_from_text(text: str, language: Language = Language.UNKNOWN) -> Sentence:
    return Sentence(tuple(tokenize(text)), language)


def decode_bio(labels: Sequence[str], tokens: Sequence[Token] = ()) -> List[EntitySpan]:
    """Decode a BIO sequence into typed spans.

    An I-X with no compatible predecessor (sentence start, after O, or after
    a different type) is repaired to B-X, so any label sequence decodes.
    When ``tokens`` are supplied, spans carry character offsets and a surface
    reconstructed from the tokens (inter-token gaps rendered as spaces).
    """
    spans: List[EntitySpan] = []
    open_type: Optional[EntityType] = None
    open_start = 0

    def close(end_index: int) -> None:
        nonlocal open_type
        if open_type is None:
            return
        if tokens:
            spans.append(_span_from_tokens(open_type, open_start, end_index, tokens))
        else:
            spans.append(EntitySpan(open_type, open_start, end_index))
        open_type = None

    for i, label in enumerate(labels):
        kind = label_entity_type(parse_label(label))
        if label == "O":
            close(i - 1)
        elif label.startswith("B-") or kind != open_type:
            close(i - 1)
            open_type = kind
            open_start = i
    close(len(labels) - 1)
    return spans


def _span_from_tokens(
    entity_type: EntityType, start_tok: int, end_tok: int, tokens: Sequence[Token]
) -> EntitySpan:
    start_char = tokens[start_tok].start_char
    end_char = tokens[end_tok].end_char
    pieces: List[str] = []
    for i in range(start_tok, end_tok + 1):
        if pieces:
            pieces.append(" " * (tokens[i].start_char - tokens[i - 1].end_char))
        pieces.append(tokens[i].text)
    return EntitySpan(entity_type, start_tok, end_tok, start_char, end_char, "".join(pieces))


def encode_bio(spans: Sequence[EntitySpan], length: int) -> List[str]:
    """Inverse of decode_bio: spans to a BIO sequence, O elsewhere."""
    labels = ["O"] * length
    occupied = [False] * length
    for span in spans:
        if span.start_tok < 0 or span.end_tok >= length or span.end_tok < span.start_tok:
            raise WazobiaError(
                "SPAN_OUT_OF_RANGE",
                f"span {span.start_tok}..{span.end_tok} outside sequence of length {length}",
            )
        for i in range(span.start_tok, span.end_tok + 1):
            if occupied[i]:
                raise WazobiaError(
                    "OVERLAPPING_SPANS", f"token {i} is covered by two spans"
                )
            occupied[i] = True
        labels[span.start_tok] = f"B-{span.entity_type.value}"
        for i in range(span.start_tok + 1, span.end_tok + 1):
            labels[i] = f"I-{span.entity_type.value}"
    return labels
