"""Linear-chain CRF: log-space inference, exact gradients, AdaGrad training.

Parameterization: label-independent feature strings crossed with all labels
(an F x L emission weight matrix) plus a dense L x L transition matrix.
All inference runs in log space through logsumexp; nothing here exponentiates
an unnormalized sum, so finite weights can never produce NaN or Inf.

Training is bit-deterministic: the per-epoch shuffle comes from the repo's
SplitMix64 stream and AdaGrad has no stochastic state of its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import WazobiaError
from .features import FeatureVector, FeatureVocab, sentence_features
from .metrics import RunEpoch, entity_prf, token_accuracy
from .postprocess import Gazetteer
from .rng import SplitMix64
from .text import BIO_LABELS, LABEL_INDEX, N_LABELS, Sentence, decode_bio

_ADAGRAD_EPS = 1e-8


@dataclass
class TrainConfig:
    """Training knobs shared by both model families.

    ``embed_dim``/``hidden_dim``/``clip_norm`` only matter to the BiLSTM;
    ``l2_lambda``/``min_feat_freq`` only to the CRF. Updates are always
    per-sentence.
    """

    epochs: int = 50
    learning_rate: float = 0.1
    l2_lambda: float = 1e-4
    seed: int = 42
    embed_dim: int = 16
    hidden_dim: int = 16
    clip_norm: float = 5.0
    min_feat_freq: int = 1

    def __post_init__(self):
        if self.epochs < 1:
            raise WazobiaError("BAD_CONFIG", "epochs must be >= 1")
        if self.learning_rate <= 0:
            raise WazobiaError("BAD_CONFIG", "learning_rate must be > 0")
        if self.l2_lambda < 0:
            raise WazobiaError("BAD_CONFIG", "l2_lambda must be >= 0")


@dataclass
class CrfParams:
    emission: np.ndarray  # (F, L)
    transition: np.ndarray  # (L, L)

    @classmethod
    def zeros(cls, feature_count: int, label_count: int = N_LABELS) -> "CrfParams":
        return cls(
            np.zeros((feature_count, label_count)), np.zeros((label_count, label_count))
        )

    @property
    def feature_count(self) -> int:
        return self.emission.shape[0]

    def check_finite(self) -> None:
        if not (np.isfinite(self.emission).all() and np.isfinite(self.transition).all()):
            raise WazobiaError("NONFINITE_LOSS", "CRF weights contain NaN or Inf")


@dataclass
class Lattice:
    node_scores: np.ndarray  # (T, L)
    edge_scores: np.ndarray  # (L, L)

    @property
    def length(self) -> int:
        return self.node_scores.shape[0]


def build_lattice(params: CrfParams, features: Sequence[FeatureVector]) -> Lattice:
    """Sum active emission weights per position into node potentials."""
    n_labels = params.emission.shape[1]
    node = np.zeros((len(features), n_labels))
    for t, fv in enumerate(features):
        if fv.indices:
            node[t] = params.emission[list(fv.indices)].sum(axis=0)
    return Lattice(node, params.transition.copy())


def _logsumexp(x: np.ndarray, axis: int = -1) -> np.ndarray:
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)  # all -inf rows stay -inf below
    with np.errstate(invalid="ignore"):
        out = m.squeeze(axis) + np.log(np.sum(np.exp(x - m), axis=axis))
    return out


def log_forward(lattice: Lattice) -> Tuple[float, np.ndarray]:
    """Forward recursion in log space; returns (log partition, alpha)."""
    T = lattice.length
    if T == 0:
        raise WazobiaError("EMPTY_SEQUENCE", "forward pass needs at least one position")
    alpha = np.empty_like(lattice.node_scores)
    alpha[0] = lattice.node_scores[0]
    for t in range(1, T):
        alpha[t] = lattice.node_scores[t] + _logsumexp(
            alpha[t - 1][:, None] + lattice.edge_scores, axis=0
        )
    return float(_logsumexp(alpha[T - 1], axis=0)), alpha


def _log_backward(lattice: Lattice) -> np.ndarray:
    T, L = lattice.node_scores.shape
    beta = np.zeros((T, L))
    for t in range(T - 2, -1, -1):
        beta[t] = _logsumexp(
            lattice.edge_scores + (lattice.node_scores[t + 1] + beta[t + 1])[None, :],
            axis=1,
        )
    return beta


def _posteriors(lattice: Lattice) -> Tuple[float, np.ndarray, np.ndarray]:
    T, L = lattice.node_scores.shape
    if T == 0:
        raise WazobiaError("EMPTY_SEQUENCE", "marginals need at least one position")
    log_z, alpha = log_forward(lattice)
    beta = _log_backward(lattice)
    node_marg = np.exp(alpha + beta - log_z)
    edge_marg = np.zeros((max(T - 1, 0), L, L))
    for t in range(T - 1):
        combined = (
            alpha[t][:, None]
            + lattice.edge_scores
            + (lattice.node_scores[t + 1] + beta[t + 1])[None, :]
        )
        edge_marg[t] = np.exp(combined - log_z)
    return log_z, node_marg, edge_marg


def marginals(lattice: Lattice) -> Tuple[np.ndarray, np.ndarray]:
    """Posterior node and edge marginals via forward-backward."""
    _, node_marg, edge_marg = _posteriors(lattice)
    return node_marg, edge_marg


# Decode-time mask for --hard-bio-constraints: I-X is only reachable from
# B-X or I-X, and never starts a sequence. Training stays unmasked.
def bio_transition_mask() -> Tuple[np.ndarray, np.ndarray]:
    start = np.zeros(N_LABELS)
    trans = np.zeros((N_LABELS, N_LABELS))
    for j, to_label in enumerate(BIO_LABELS):
        if not to_label.startswith("I-"):
            continue
        start[j] = -math.inf
        allowed = {f"B-{to_label[2:]}", to_label}
        for i, from_label in enumerate(BIO_LABELS):
            if from_label not in allowed:
                trans[i, j] = -math.inf
    return start, trans


def viterbi(lattice: Lattice, hard_bio: bool = False) -> Tuple[List[str], float]:
    """Best label sequence; ties break toward the lower label index."""
    T, L = lattice.node_scores.shape
    if T == 0:
        raise WazobiaError("EMPTY_SEQUENCE", "viterbi needs at least one position")
    edge = lattice.edge_scores
    start_mask = np.zeros(L)
    if hard_bio:
        start_mask, trans_mask = bio_transition_mask()
        edge = edge + trans_mask
    delta = lattice.node_scores[0] + start_mask
    backptr = np.zeros((T, L), dtype=np.int64)
    for t in range(1, T):
        candidates = delta[:, None] + edge
        backptr[t] = np.argmax(candidates, axis=0)  # first max = lowest index
        delta = lattice.node_scores[t] + candidates[backptr[t], np.arange(L)]
    path = [int(np.argmax(delta))]
    for t in range(T - 1, 0, -1):
        path.append(int(backptr[t][path[-1]]))
    path.reverse()
    score = float(lattice.node_scores[0][path[0]])
    for t in range(1, T):
        score += float(lattice.edge_scores[path[t - 1]][path[t]])
        score += float(lattice.node_scores[t][path[t]])
    return [BIO_LABELS[i] for i in path], score


def score_labels(lattice: Lattice, label_indices: Sequence[int]) -> float:
    score = float(lattice.node_scores[0][label_indices[0]])
    for t in range(1, len(label_indices)):
        score += float(lattice.edge_scores[label_indices[t - 1]][label_indices[t]])
        score += float(lattice.node_scores[t][label_indices[t]])
    return score


def nll_and_grad(
    params: CrfParams,
    features: Sequence[FeatureVector],
    gold: Sequence[str],
    l2_lambda: float = 0.0,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Negative log-likelihood and its exact gradient for one sentence.

    loss = log Z - score(gold) + (lambda/2) * ||params||^2
    grad = expected feature counts - empirical counts + lambda * params
    """
    if len(gold) != len(features):
        raise WazobiaError(
            "LENGTH_MISMATCH", f"{len(gold)} labels for {len(features)} positions"
        )
    gold_idx = [LABEL_INDEX[g] for g in gold]
    lattice = build_lattice(params, features)
    log_z, node_marg, edge_marg = _posteriors(lattice)
    loss = log_z - score_labels(lattice, gold_idx)

    grad_emission = np.zeros_like(params.emission)
    for t, fv in enumerate(features):
        if not fv.indices:
            continue
        idx = list(fv.indices)
        grad_emission[idx] += node_marg[t]
        grad_emission[idx, gold_idx[t]] -= 1.0
    grad_transition = edge_marg.sum(axis=0)
    for t in range(1, len(gold_idx)):
        grad_transition[gold_idx[t - 1], gold_idx[t]] -= 1.0

    if l2_lambda:
        loss += 0.5 * l2_lambda * (
            float(np.sum(params.emission**2)) + float(np.sum(params.transition**2))
        )
        grad_emission += l2_lambda * params.emission
        grad_transition += l2_lambda * params.transition
    return loss, grad_emission, grad_transition


def sentence_nll(params: CrfParams, features: Sequence[FeatureVector], gold: Sequence[str]) -> float:
    """Pure NLL (no regularizer), for loss reporting."""
    gold_idx = [LABEL_INDEX[g] for g in gold]
    lattice = build_lattice(params, features)
    log_z, _ = log_forward(lattice)
    return log_z - score_labels(lattice, gold_idx)


def predict_labels(params: CrfParams, features: Sequence[FeatureVector], hard_bio: bool = False) -> List[str]:
    labels, _ = viterbi(build_lattice(params, features), hard_bio=hard_bio)
    return labels


def pipeline_labels(labels: Sequence[str], sentence: Sentence) -> List[str]:
    """Force O on punctuation tokens: entity spans never cover punctuation."""
    return [
        "O" if sentence.tokens[i].is_punct else label for i, label in enumerate(labels)
    ]


def _epoch_metrics(
    params: CrfParams,
    prepared: Sequence[Tuple[Sentence, List[FeatureVector], List[str]]],
) -> Tuple[float, float, float, float, float]:
    """(mean NLL, precision, recall, f1, token accuracy) on a prepared set."""
    if not prepared:
        return 0.0, 0.0, 0.0, 0.0, 0.0
    losses, gold_spans, pred_spans, gold_labels, pred_labels = [], [], [], [], []
    for sentence, feats, gold in prepared:
        losses.append(sentence_nll(params, feats, gold))
        predicted = pipeline_labels(predict_labels(params, feats), sentence)
        gold_labels.append(list(gold))
        pred_labels.append(predicted)
        gold_spans.append(decode_bio(gold))
        pred_spans.append(decode_bio(predicted))
    micro, _ = entity_prf(gold_spans, pred_spans)
    accuracy = token_accuracy(gold_labels, pred_labels)
    return float(np.mean(losses)), micro.precision, micro.recall, micro.f1, accuracy


def train(
    corpus: Sequence,  # LabeledSentence
    val: Sequence,
    config: TrainConfig,
    vocab: FeatureVocab,
    gazetteer: Optional[Gazetteer] = None,
    on_epoch: Optional[Callable[[RunEpoch], None]] = None,
) -> Tuple[CrfParams, List[RunEpoch]]:
    """Per-sentence AdaGrad over seeded-shuffled epochs.

    The recorded training loss is the mean pure NLL of each sentence as
    visited (before its update); validation metrics are computed with the
    end-of-epoch weights through the same decode path served at inference.
    """
    if not corpus:
        raise WazobiaError("EMPTY_CORPUS", "cannot train on an empty corpus")
    gaz = gazetteer if gazetteer is not None else Gazetteer()

    def prepare(examples):
        return [
            (ex.sentence, sentence_features(ex.sentence, vocab, gaz), list(ex.labels))
            for ex in examples
        ]

    train_prepared = prepare(corpus)
    val_prepared = prepare(val)

    params = CrfParams.zeros(len(vocab))
    accum_emission = np.zeros_like(params.emission)
    accum_transition = np.zeros_like(params.transition)
    rng = SplitMix64(config.seed)
    history: List[RunEpoch] = []

    for epoch in range(1, config.epochs + 1):
        order = list(range(len(train_prepared)))
        rng.shuffle(order)
        epoch_losses = []
        for i in order:
            sentence, feats, gold = train_prepared[i]
            loss, grad_e, grad_t = nll_and_grad(params, feats, gold, config.l2_lambda)
            if not math.isfinite(loss):
                raise WazobiaError("NONFINITE_LOSS", f"loss became {loss} at epoch {epoch}")
            reg = 0.5 * config.l2_lambda * (
                float(np.sum(params.emission**2)) + float(np.sum(params.transition**2))
            )
            epoch_losses.append(loss - reg)
            accum_emission += grad_e**2
            accum_transition += grad_t**2
            params.emission -= config.learning_rate * grad_e / (
                np.sqrt(accum_emission) + _ADAGRAD_EPS
            )
            params.transition -= config.learning_rate * grad_t / (
                np.sqrt(accum_transition) + _ADAGRAD_EPS
            )
        params.check_finite()
        val_loss, precision, recall, f1_score, accuracy = _epoch_metrics(params, val_prepared)
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
