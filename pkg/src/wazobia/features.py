"""Sparse indicator features from fixed templates, with a trainable vocabulary.

Template battery per token position, emitted in this fixed order:

  1. window words ``w[-2]= .. w[+2]=`` (normalized; ``<s>``/``</s>`` past the
     sentence edges; punctuation neighbours are skipped, mirroring the
     punctuation-removal step without destroying offsets)
  2. prefixes/suffixes of lengths 1-3 of the normalized token (clipped at
     word length, so all six always fire)
  3. word shape of the surface form
  4. ``punct`` for punctuation tokens
  5. ``BOS`` / ``EOS`` at sentence edges
  6. POS window ``pos[-1]= .. pos[+1]=`` when POS tags are present
  7. ``gaz=TYPE`` per entity type whose gazetteer phrases contain the token

Word shape classes: uppercase -> X, lowercase -> x, digit -> 9, combining
mark -> ´, other -> #; runs longer than 4 collapse to 4 characters plus "+".
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import WazobiaError
from .postprocess import Gazetteer
from .text import Sentence

_BOS_WORD = "<s>"
_EOS_WORD = "</s>"


@dataclass
class FeatureVocab:
    """Dense feature-string -> index map; immutable once frozen."""

    index: Dict[str, int] = field(default_factory=dict)
    frozen: bool = False

    def add(self, feature: str) -> int:
        if self.frozen:
            raise WazobiaError("VOCAB_FROZEN", "cannot add features to a frozen vocabulary")
        idx = self.index.get(feature)
        if idx is None:
            idx = len(self.index)
            self.index[feature] = idx
        return idx

    def freeze(self) -> "FeatureVocab":
        self.frozen = True
        return self

    def lookup(self, feature: str) -> Optional[int]:
        return self.index.get(feature)

    def __len__(self) -> int:
        return len(self.index)


@dataclass(frozen=True)
class FeatureVector:
    """Strictly increasing indices of active binary features."""

    indices: Tuple[int, ...]


def word_shape(text: str) -> str:
    classes = []
    for ch in text:
        cat = unicodedata.category(ch)
        if cat in ("Lu", "Lt"):
            classes.append("X")
        elif cat == "Ll":
            classes.append("x")
        elif cat == "Nd":
            classes.append("9")
        elif cat.startswith("M"):
            classes.append("´")
        else:
            classes.append("#")
    out: List[str] = []
    i = 0
    while i < len(classes):
        j = i
        while j < len(classes) and classes[j] == classes[i]:
            j += 1
        run = j - i
        out.append(classes[i] * min(run, 4))
        if run > 4:
            out.append("+")
        i = j
    return "".join(out)


def extract(sentence: Sentence, position: int, gazetteer: Gazetteer) -> List[str]:
    """Feature strings for one token position, in the documented order."""
    tokens = sentence.tokens
    if position < 0 or position >= len(tokens):
        raise WazobiaError(
            "POSITION_OUT_OF_RANGE", f"position {position} in sentence of {len(tokens)} tokens"
        )
    # Window context skips punctuation tokens (other than the current one).
    ctx = [i for i in range(len(tokens)) if not tokens[i].is_punct or i == position]
    p = ctx.index(position)
    feats: List[str] = []
    for k in (-2, -1, 0, 1, 2):
        name = "w[0]" if k == 0 else f"w[{k:+d}]"
        j = p + k
        if j < 0:
            feats.append(f"{name}={_BOS_WORD}")
        elif j >= len(ctx):
            feats.append(f"{name}={_EOS_WORD}")
        else:
            feats.append(f"{name}={tokens[ctx[j]].normalized}")

    word = tokens[position].normalized
    for n in (1, 2, 3):
        feats.append(f"pre{n}={word[:n]}")
    for n in (1, 2, 3):
        feats.append(f"suf{n}={word[-n:]}")

    feats.append(f"shape={word_shape(tokens[position].text)}")
    if tokens[position].is_punct:
        feats.append("punct")
    if position == 0:
        feats.append("BOS")
    if position == len(tokens) - 1:
        feats.append("EOS")

    if sentence.pos_tags is not None:
        for k in (-1, 0, 1):
            name = "pos[0]" if k == 0 else f"pos[{k:+d}]"
            j = p + k
            if j < 0:
                feats.append(f"{name}={_BOS_WORD}")
            elif j >= len(ctx):
                feats.append(f"{name}={_EOS_WORD}")
            else:
                feats.append(f"{name}={sentence.pos_tags[ctx[j]]}")

    for entity_type in sorted(gazetteer.token_types(word), key=lambda t: t.value):
        feats.append(f"gaz={entity_type.value}")
    return feats


def build_vocab(
    corpus: Sequence[Sentence], gazetteer: Gazetteer, min_freq: int = 1
) -> FeatureVocab:
    """Collect every emitted feature string over the corpus, first-seen order.

    ``min_freq`` > 1 prunes strings emitted fewer times than the threshold
    (counting one occurrence per emission, not per sentence).
    """
    if not corpus:
        raise WazobiaError("EMPTY_CORPUS", "cannot build a feature vocabulary from nothing")
    counts: Dict[str, int] = {}
    order: List[str] = []
    for sentence in corpus:
        for position in range(len(sentence.tokens)):
            for feat in extract(sentence, position, gazetteer):
                if feat not in counts:
                    counts[feat] = 0
                    order.append(feat)
                counts[feat] += 1
    vocab = FeatureVocab()
    for feat in order:
        if counts[feat] >= min_freq:
            vocab.add(feat)
    return vocab.freeze()


def vectorize(strings: Sequence[str], vocab: FeatureVocab) -> FeatureVector:
    """Map known strings to sorted distinct indices; unknown strings drop out."""
    if not vocab.frozen:
        raise WazobiaError("VOCAB_NOT_FROZEN", "vectorize requires a frozen vocabulary")
    indices = {vocab.lookup(s) for s in strings}
    indices.discard(None)
    return FeatureVector(tuple(sorted(indices)))  # type: ignore[arg-type]


def sentence_features(
    sentence: Sentence, vocab: FeatureVocab, gazetteer: Gazetteer
) -> List[FeatureVector]:
    return [
        vectorize(extract(sentence, i, gazetteer), vocab) for i in range(len(sentence.tokens))
    ]
