"""Annotated corpus reader/writer, deterministic splitting, bundled fixtures.

File format (UTF-8, LF, no BOM): blank-line-separated sentences, each
nonblank line ``token<TAB>tag`` or ``token<TAB>pos<TAB>tag``; a comment line
``# language: xx`` switches the language for the sentences that follow.
Character offsets are synthesized by joining tokens with single spaces.
"""

from __future__ import annotations

import importlib.resources
import re
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from .errors import WazobiaError
from .rng import SplitMix64
from .text import Language, Sentence, Token, label_entity_type, normalize, parse_label

_LANGUAGE_RE = re.compile(r"#\s*language:\s*(\S+)\s*$")


@dataclass(frozen=True)
class LabeledSentence:
    sentence: Sentence
    labels: Tuple[str, ...]
    source_id: str = ""

    def __post_init__(self):
        if len(self.labels) != len(self.sentence.tokens):
            raise WazobiaError(
                "LENGTH_MISMATCH",
                f"{len(self.labels)} labels for {len(self.sentence.tokens)} tokens",
            )


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.8
    val_frac: float = 0.1
    test_frac: float = 0.1
    seed: int = 42

    def __post_init__(self):
        if abs(self.train_frac + self.val_frac + self.test_frac - 1.0) > 1e-9:
            raise WazobiaError("BAD_CONFIG", "split fractions must sum to 1")


@dataclass
class CorpusRead:
    """read_corpus result: sentences plus the count of repaired labels."""

    sentences: List[LabeledSentence]
    warnings: int

    def __iter__(self):
        return iter(self.sentences)

    def __len__(self) -> int:
        return len(self.sentences)


def _is_all_punct(token_text: str) -> bool:
    import unicodedata

    return all(unicodedata.category(ch)[0] in ("P", "S") for ch in token_text)


def _build_sentence(
    rows: List[Tuple[str, Optional[str], str]], language: Language
) -> Tuple[Sentence, List[str]]:
    tokens: List[Token] = []
    offset = 0
    for token_text, _, _ in rows:
        start = offset
        end = start + len(token_text)
        tokens.append(
            Token(token_text, normalize(token_text), start, end, _is_all_punct(token_text))
        )
        offset = end + 1
    pos_tags = tuple(pos for _, pos, _ in rows) if rows[0][1] is not None else None
    sentence = Sentence(tuple(tokens), language, pos_tags)
    return sentence, [tag for _, _, tag in rows]


def repair_bio(labels: Sequence[str]) -> Tuple[List[str], int]:
    """Promote orphan I-X labels to B-X; returns (labels, repair count)."""
    repaired: List[str] = []
    fixes = 0
    for i, label in enumerate(labels):
        if label.startswith("I-"):
            prev = repaired[i - 1] if i else "O"
            prev_type = label_entity_type(prev) if prev != "O" else None
            if prev == "O" or prev_type != label_entity_type(label):
                label = "B-" + label[2:]
                fixes += 1
        repaired.append(label)
    return repaired, fixes


def read_corpus(path) -> CorpusRead:
    """Parse a corpus file; orphan I-X tags are repaired and counted."""
    content = Path(path).read_text(encoding="utf-8")
    sentences: List[LabeledSentence] = []
    warnings = 0
    language = Language.UNKNOWN
    rows: List[Tuple[str, Optional[str], str]] = []
    row_width: Optional[int] = None

    def flush():
        nonlocal rows, row_width, warnings
        if rows:
            sentence, raw_labels = _build_sentence(rows, language)
            labels, fixes = repair_bio(raw_labels)
            warnings += fixes
            sentences.append(
                LabeledSentence(sentence, tuple(labels), f"s{len(sentences):04d}")
            )
        rows = []
        row_width = None

    for lineno, line in enumerate(content.split("\n"), start=1):
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            match = _LANGUAGE_RE.match(line)
            if match:
                flush()
                language = Language.parse(match.group(1))
            continue
        parts = line.split("\t")
        if len(parts) not in (2, 3) or not parts[0]:
            raise WazobiaError(
                "BAD_LINE", f"line {lineno}: expected token<TAB>[pos<TAB>]tag, got {line!r}"
            )
        if row_width is None:
            row_width = len(parts)
        elif len(parts) != row_width:
            raise WazobiaError(
                "BAD_LINE", f"line {lineno}: mixed column counts within one sentence"
            )
        try:
            tag = parse_label(parts[-1])
        except WazobiaError as err:
            raise WazobiaError("BAD_TAG", f"line {lineno}: {err.message}") from None
        pos = parts[1] if len(parts) == 3 else None
        rows.append((parts[0], pos, tag))
    flush()
    if not sentences:
        raise WazobiaError("EMPTY_FILE", f"no sentences in {path}")
    return CorpusRead(sentences, warnings)


def write_corpus(sentences: Sequence[LabeledSentence], path) -> None:
    """Emit the corpus format; read_corpus(write_corpus(x)) == x."""
    blocks: List[str] = []
    previous_language = Language.UNKNOWN
    for example in sentences:
        lines: List[str] = []
        if example.sentence.language != previous_language:
            lines.append(f"# language: {example.sentence.language.value}")
            previous_language = example.sentence.language
        pos_tags = example.sentence.pos_tags
        for i, token in enumerate(example.sentence.tokens):
            if pos_tags is not None:
                lines.append(f"{token.text}\t{pos_tags[i]}\t{example.labels[i]}")
            else:
                lines.append(f"{token.text}\t{example.labels[i]}")
        blocks.append("\n".join(lines))
    Path(path).write_text(
        "\n\n".join(blocks) + ("\n" if blocks else ""), encoding="utf-8", newline="\n"
    )


def split(
    corpus: Sequence[LabeledSentence], spec: SplitSpec
) -> Tuple[List[LabeledSentence], List[LabeledSentence], List[LabeledSentence]]:
    """Seeded shuffle, then contiguous partition by the floor rule."""
    n = len(corpus)
    if n < 3:
        raise WazobiaError("CORPUS_TOO_SMALL", f"need at least 3 sentences, got {n}")
    shuffled = list(corpus)
    SplitMix64(spec.seed).shuffle(shuffled)
    n_train = int(spec.train_frac * n)
    n_val = int(spec.val_frac * n)
    return (
        shuffled[:n_train],
        shuffled[n_train : n_train + n_val],
        shuffled[n_train + n_val :],
    )


def _data_path(name: str) -> Path:
    return Path(str(importlib.resources.files("wazobia") / "data" / name))


def bundled_corpus_path() -> Path:
    """The packaged 60-sentence mini-corpus (20 per language)."""
    return _data_path("mini_corpus.txt")


def bundled_gazetteer_path() -> Path:
    return _data_path("gazetteer.tsv")
