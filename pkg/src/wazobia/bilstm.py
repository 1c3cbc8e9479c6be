"""Desk-scale bidirectional LSTM token classifier with hand-written BPTT.

Everything runs in 64-bit floats so finite-difference checks stay tight.
One forward cell reads the sentence left to right, one backward cell right
to left; their hidden states are concatenated per token and projected to the
7 BIO labels through a softmax. The output layer is per-token softmax, not a
CRF layer: the two model families stay separate for comparison.

Parameter initialization draws uniform [-0.1, 0.1] values from the SplitMix64
stream in the fixed order of ``BilstmParams.named_arrays`` (row-major within
each array), so a seed pins the full parameter vector bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .crf import TrainConfig, pipeline_labels
from .errors import WazobiaError
from .metrics import RunEpoch, entity_prf, token_accuracy
from .rng import SplitMix64
from .text import BIO_LABELS, LABEL_INDEX, N_LABELS, Sentence, decode_bio

UNK_INDEX = 0
_GATES = ("i", "f", "o", "g")  # input, forget, output, candidate


@dataclass
class WordVocab:
    """word -> dense index map with index 0 reserved for UNK."""

    index: Dict[str, int] = field(default_factory=lambda: {"<unk>": UNK_INDEX})
    frozen: bool = False

    def add(self, word: str) -> int:
        if self.frozen:
            raise WazobiaError("VOCAB_FROZEN", "cannot grow a frozen word vocabulary")
        idx = self.index.get(word)
        if idx is None:
            idx = len(self.index)
            self.index[word] = idx
        return idx

    def freeze(self) -> "WordVocab":
        self.frozen = True
        return self

    def lookup(self, word: str) -> int:
        return self.index.get(word, UNK_INDEX)

    def __len__(self) -> int:
        return len(self.index)


def build_word_vocab(corpus: Sequence) -> WordVocab:
    """Vocabulary over normalized training tokens, first-seen order."""
    vocab = WordVocab()
    for example in corpus:
        for token in example.sentence.tokens:
            vocab.add(token.normalized)
    return vocab.freeze()


@dataclass
class LstmCell:
    """Gate weights for one direction: x @ w + h @ u + b per gate."""

    w_i: np.ndarray
    u_i: np.ndarray
    b_i: np.ndarray
    w_f: np.ndarray
    u_f: np.ndarray
    b_f: np.ndarray
    w_o: np.ndarray
    u_o: np.ndarray
    b_o: np.ndarray
    w_g: np.ndarray
    u_g: np.ndarray
    b_g: np.ndarray

    @classmethod
    def zeros(cls, dim_in: int, dim_hidden: int) -> "LstmCell":
        arrays = {}
        for gate in _GATES:
            arrays[f"w_{gate}"] = np.zeros((dim_in, dim_hidden))
            arrays[f"u_{gate}"] = np.zeros((dim_hidden, dim_hidden))
            arrays[f"b_{gate}"] = np.zeros(dim_hidden)
        return cls(**arrays)

    def named_arrays(self, prefix: str):
        for gate in _GATES:
            for kind in ("w", "u", "b"):
                name = f"{kind}_{gate}"
                yield f"{prefix}.{name}", getattr(self, name)


@dataclass
class BilstmParams:
    embeddings: np.ndarray  # (V, D)
    forward_cell: LstmCell
    backward_cell: LstmCell
    proj_w: np.ndarray  # (2H, L)
    proj_b: np.ndarray  # (L,)

    @property
    def hidden_dim(self) -> int:
        return self.forward_cell.b_i.shape[0]

    def named_arrays(self) -> List[Tuple[str, np.ndarray]]:
        named = [("embeddings", self.embeddings)]
        named.extend(self.forward_cell.named_arrays("forward"))
        named.extend(self.backward_cell.named_arrays("backward"))
        named.extend([("proj_w", self.proj_w), ("proj_b", self.proj_b)])
        return named

    @classmethod
    def zeros(cls, vocab_size: int, embed_dim: int, hidden_dim: int, n_labels: int = N_LABELS) -> "BilstmParams":
        return cls(
            embeddings=np.zeros((vocab_size, embed_dim)),
            forward_cell=LstmCell.zeros(embed_dim, hidden_dim),
            backward_cell=LstmCell.zeros(embed_dim, hidden_dim),
            proj_w=np.zeros((2 * hidden_dim, n_labels)),
            proj_b=np.zeros(n_labels),
        )

    @classmethod
    def init(
        cls,
        vocab_size: int,
        embed_dim: int,
        hidden_dim: int,
        seed: int,
        pretrained_embeddings: Optional[np.ndarray] = None,
    ) -> "BilstmParams":
        params = cls.zeros(vocab_size, embed_dim, hidden_dim)
        rng = SplitMix64(seed)
        for _, array in params.named_arrays():
            flat = array.reshape(-1)
            for i in range(flat.shape[0]):
                flat[i] = rng.next_uniform(-0.1, 0.1)
        if pretrained_embeddings is not None:
            if pretrained_embeddings.shape != params.embeddings.shape:
                raise WazobiaError(
                    "BAD_FORMAT",
                    f"embedding shape {pretrained_embeddings.shape} != {params.embeddings.shape}",
                )
            params.embeddings = pretrained_embeddings.astype(np.float64).copy()
        return params

    def check_finite(self) -> None:
        for name, array in self.named_arrays():
            if not np.isfinite(array).all():
                raise WazobiaError("NONFINITE_LOSS", f"{name} contains NaN or Inf")


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=1, keepdims=True)


class _DirectionTrace:
    """Per-timestep activations of one direction, kept for backprop."""

    def __init__(self, T: int, H: int):
        self.i = np.zeros((T, H))
        self.f = np.zeros((T, H))
        self.o = np.zeros((T, H))
        self.g = np.zeros((T, H))
        self.c = np.zeros((T, H))
        self.h = np.zeros((T, H))


def _run_direction(cell: LstmCell, xs: np.ndarray, order: Sequence[int]) -> _DirectionTrace:
    T = xs.shape[0]
    H = cell.b_i.shape[0]
    trace = _DirectionTrace(T, H)
    h_prev = np.zeros(H)
    c_prev = np.zeros(H)
    for t in order:
        x = xs[t]
        i = _sigmoid(x @ cell.w_i + h_prev @ cell.u_i + cell.b_i)
        f = _sigmoid(x @ cell.w_f + h_prev @ cell.u_f + cell.b_f)
        o = _sigmoid(x @ cell.w_o + h_prev @ cell.u_o + cell.b_o)
        g = np.tanh(x @ cell.w_g + h_prev @ cell.u_g + cell.b_g)
        c = f * c_prev + i * g
        h = o * np.tanh(c)
        trace.i[t], trace.f[t], trace.o[t], trace.g[t] = i, f, o, g
        trace.c[t], trace.h[t] = c, h
        h_prev, c_prev = h, c
    return trace


def _word_ids(sentence: Sentence, vocab: WordVocab) -> List[int]:
    return [vocab.lookup(tok.normalized) for tok in sentence.tokens]


def _forward_full(
    params: BilstmParams, sentence: Sentence, vocab: WordVocab
) -> Tuple[np.ndarray, List[int], np.ndarray, _DirectionTrace, _DirectionTrace]:
    if len(sentence.tokens) == 0:
        raise WazobiaError("EMPTY_SEQUENCE", "cannot run the BiLSTM on an empty sentence")
    ids = _word_ids(sentence, vocab)
    xs = params.embeddings[ids]
    T = len(ids)
    fwd = _run_direction(params.forward_cell, xs, range(T))
    bwd = _run_direction(params.backward_cell, xs, range(T - 1, -1, -1))
    concat = np.concatenate([fwd.h, bwd.h], axis=1)
    probs = _softmax_rows(concat @ params.proj_w + params.proj_b)
    return probs, ids, xs, fwd, bwd


def forward(params: BilstmParams, sentence: Sentence, vocab: WordVocab) -> np.ndarray:
    """Per-token label distributions, shape (T, 7); rows sum to 1."""
    probs, *_ = _forward_full(params, sentence, vocab)
    return probs


def _backprop_direction(
    cell: LstmCell,
    xs: np.ndarray,
    trace: _DirectionTrace,
    dh_external: np.ndarray,
    order: Sequence[int],
    grads: LstmCell,
) -> np.ndarray:
    """BPTT for one direction; returns d(loss)/d(xs)."""
    H = cell.b_i.shape[0]
    dxs = np.zeros_like(xs)
    dh_carry = np.zeros(H)
    dc_carry = np.zeros(H)
    seq = list(order)
    for pos, t in enumerate(reversed(seq)):
        prev_t = seq[len(seq) - 2 - pos] if pos < len(seq) - 1 else None
        h_prev = trace.h[prev_t] if prev_t is not None else np.zeros(H)
        c_prev = trace.c[prev_t] if prev_t is not None else np.zeros(H)
        i, f, o, g, c = trace.i[t], trace.f[t], trace.o[t], trace.g[t], trace.c[t]
        tanh_c = np.tanh(c)
        dh = dh_external[t] + dh_carry
        do = dh * tanh_c
        dc = dh * o * (1.0 - tanh_c**2) + dc_carry
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dc_carry = dc * f
        d_pre = {
            "i": di * i * (1.0 - i),
            "f": df * f * (1.0 - f),
            "o": do * o * (1.0 - o),
            "g": dg * (1.0 - g**2),
        }
        dx = np.zeros(xs.shape[1])
        dh_carry = np.zeros(H)
        for gate in _GATES:
            dp = d_pre[gate]
            getattr(grads, f"w_{gate}")[...] += np.outer(xs[t], dp)
            getattr(grads, f"u_{gate}")[...] += np.outer(h_prev, dp)
            getattr(grads, f"b_{gate}")[...] += dp
            dx += dp @ getattr(cell, f"w_{gate}").T
            dh_carry += dp @ getattr(cell, f"u_{gate}").T
        dxs[t] = dx
    return dxs


def loss_and_grad(
    params: BilstmParams, sentence: Sentence, gold: Sequence[str], vocab: WordVocab
) -> Tuple[float, BilstmParams]:
    """Mean cross-entropy over positions and its full-BPTT gradient."""
    if len(gold) != len(sentence.tokens):
        raise WazobiaError(
            "LENGTH_MISMATCH", f"{len(gold)} labels for {len(sentence.tokens)} tokens"
        )
    probs, ids, xs, fwd, bwd = _forward_full(params, sentence, vocab)
    T = len(ids)
    H = params.hidden_dim
    gold_idx = [LABEL_INDEX[g] for g in gold]
    loss = -float(np.mean(np.log(probs[np.arange(T), gold_idx])))

    grads = BilstmParams.zeros(params.embeddings.shape[0], params.embeddings.shape[1], H)
    dlogits = probs.copy()
    dlogits[np.arange(T), gold_idx] -= 1.0
    dlogits /= T

    concat = np.concatenate([fwd.h, bwd.h], axis=1)
    grads.proj_w[...] = concat.T @ dlogits
    grads.proj_b[...] = dlogits.sum(axis=0)
    dconcat = dlogits @ params.proj_w.T

    dxs_f = _backprop_direction(
        params.forward_cell, xs, fwd, dconcat[:, :H], range(T), grads.forward_cell
    )
    dxs_b = _backprop_direction(
        params.backward_cell, xs, bwd, dconcat[:, H:], range(T - 1, -1, -1), grads.backward_cell
    )
    dxs = dxs_f + dxs_b
    for t, word_id in enumerate(ids):
        grads.embeddings[word_id] += dxs[t]
    return loss, grads


def predict_labels(params: BilstmParams, sentence: Sentence, vocab: WordVocab) -> List[str]:
    probs = forward(params, sentence, vocab)
    return [BIO_LABELS[int(np.argmax(row))] for row in probs]


def _global_norm(grads: BilstmParams) -> float:
    return math.sqrt(sum(float(np.sum(a**2)) for _, a in grads.named_arrays()))


def train(
    corpus: Sequence,
    val: Sequence,
    config: TrainConfig,
    vocab: WordVocab,
    pretrained_embeddings: Optional[np.ndarray] = None,
    on_epoch: Optional[Callable[[RunEpoch], None]] = None,
) -> Tuple[BilstmParams, List[RunEpoch]]:
    """Per-sentence SGD with global gradient-norm clipping at config.clip_norm.

    The SplitMix64 stream seeded by config.seed first initializes parameters,
    then drives every epoch shuffle, so a (corpus, config) pair fixes the run
    bit-for-bit.
    """
    if not corpus:
        raise WazobiaError("EMPTY_CORPUS", "cannot train on an empty corpus")
    params = BilstmParams.init(
        len(vocab), config.embed_dim, config.hidden_dim, config.seed, pretrained_embeddings
    )
    rng = SplitMix64(config.seed + 1)  # init consumed the seed stream; shuffles get their own
    history: List[RunEpoch] = []

    for epoch in range(1, config.epochs + 1):
        order = list(range(len(corpus)))
        rng.shuffle(order)
        epoch_losses = []
        for idx in order:
            example = corpus[idx]
            loss, grads = loss_and_grad(params, example.sentence, example.labels, vocab)
            if not math.isfinite(loss):
                raise WazobiaError("NONFINITE_LOSS", f"loss became {loss} at epoch {epoch}")
            epoch_losses.append(loss)
            norm = _global_norm(grads)
            scale = config.learning_rate
            if norm > config.clip_norm:
                scale *= config.clip_norm / norm
            for (_, param_array), (_, grad_array) in zip(
                params.named_arrays(), grads.named_arrays()
            ):
                param_array -= scale * grad_array
        params.check_finite()
        val_loss, precision, recall, f1_score, accuracy = _val_metrics(params, val, vocab)
        row = RunEpoch(
            epoch=epoch,
            training_loss=float(np.mean(epoch_losses)),
            validation_loss=val_loss,
            precision=precision,
            recall=recall,
            f1=f1_score,
            accuracy=accuracy,
        )
        history.append(row)
        if on_epoch is not None:
            on_epoch(row)
    return params, history


def _val_metrics(params: BilstmParams, val: Sequence, vocab: WordVocab):
    if not val:
        return 0.0, 0.0, 0.0, 0.0, 0.0
    losses, gold_spans, pred_spans, gold_labels, pred_labels = [], [], [], [], []
    for example in val:
        probs, ids, *_ = _forward_full(params, example.sentence, vocab)
        gold_idx = [LABEL_INDEX[g] for g in example.labels]
        losses.append(-float(np.mean(np.log(probs[np.arange(len(ids)), gold_idx]))))
        predicted = pipeline_labels(
            [BIO_LABELS[int(np.argmax(row))] for row in probs], example.sentence
        )
        gold_labels.append(list(example.labels))
        pred_labels.append(predicted)
        gold_spans.append(decode_bio(example.labels))
        pred_spans.append(decode_bio(predicted))
    micro, _ = entity_prf(gold_spans, pred_spans)
    return (
        float(np.mean(losses)),
        micro.precision,
        micro.recall,
        micro.f1,
        token_accuracy(gold_labels, pred_labels),
    )


def load_embeddings(path) -> Tuple[WordVocab, np.ndarray]:
    """Parse a text embedding file: ``word v1 .. vD`` per line.

    A first line with exactly two integer fields is treated as a ``V D``
    header. Index 0 is UNK, initialized to the mean of all vectors.
    """
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    rows: List[Tuple[str, List[float]]] = []
    dim: Optional[int] = None
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        fields = line.split()
        if lineno == 1 and len(fields) == 2 and all(_is_int(f) for f in fields):
            continue  # header
        word, values = fields[0], fields[1:]
        if not values:
            raise WazobiaError("BAD_FORMAT", f"line {lineno}: no vector components")
        try:
            vector = [float(v) for v in values]
        except ValueError:
            raise WazobiaError("BAD_FORMAT", f"line {lineno}: non-numeric component") from None
        if dim is None:
            dim = len(vector)
        elif len(vector) != dim:
            raise WazobiaError(
                "BAD_FORMAT", f"line {lineno}: dimension {len(vector)} != {dim}"
            )
        rows.append((word, vector))
    if not rows:
        raise WazobiaError("EMPTY_FILE", f"no vectors in {path}")
    vocab = WordVocab()
    matrix = np.zeros((len(rows) + 1, dim))
    for k, (word, vector) in enumerate(rows, start=1):
        vocab.add(word)
        matrix[k] = vector
    matrix[UNK_INDEX] = matrix[1:].mean(axis=0)
    return vocab.freeze(), matrix


def _is_int(s: str) -> bool:
    try:
        int(s)
        return True
    except ValueError:
        return False
