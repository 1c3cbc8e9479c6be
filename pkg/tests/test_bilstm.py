import math

import numpy as np
import pytest

from wazobia.bilstm import (
    BilstmParams,
    WordVocab,
    build_word_vocab,
    forward,
    load_embeddings,
    loss_and_grad,
    predict_labels,
    train,
)
from wazobia.crf import TrainConfig
from wazobia.corpus import LabeledSentence
from wazobia.errors import WazobiaError
from wazobia.rng import SplitMix64
from wazobia.text import Language, sentence_from_text


def make_vocab(*words):
    vocab = WordVocab()
    for w in words:
        vocab.add(w)
    return vocab.freeze()


VOCAB = make_vocab("ngozi", "gara", "abuja", "kano", "musa", "tafi")


def sent(text):
    return sentence_from_text(text, Language.IGBO)


class TestForward:
    def test_zero_params_give_uniform_rows(self):
        params = BilstmParams.zeros(len(VOCAB), 4, 3)
        probs = forward(params, sent("Ngozi gara Abuja"), VOCAB)
        assert probs.shape == (3, 7)
        assert np.allclose(probs, 1.0 / 7, atol=1e-12)

    def test_single_token_row_normalized(self):
        params = BilstmParams.init(len(VOCAB), 4, 3, seed=9)
        probs = forward(params, sent("Ngozi"), VOCAB)
        assert probs.shape == (1, 7)
        assert probs[0].sum() == pytest.approx(1.0, abs=1e-9)

    def test_rows_sum_to_one(self):
        params = BilstmParams.init(len(VOCAB), 5, 4, seed=3)
        probs = forward(params, sent("Musa tafi Kano gara Abuja"), VOCAB)
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-9)

    def test_bidirectional_sensitivity(self):
        # changing the last token must move the distribution at position 0
        params = BilstmParams.init(len(VOCAB), 5, 4, seed=17)
        a = forward(params, sent("Ngozi gara Abuja"), VOCAB)
        b = forward(params, sent("Ngozi gara Kano"), VOCAB)
        assert not np.allclose(a[0], b[0], atol=1e-12)

    def test_empty_sentence_rejected(self):
        params = BilstmParams.zeros(len(VOCAB), 4, 3)
        with pytest.raises(WazobiaError) as err:
            forward(params, sent(""), VOCAB)
        assert err.value.code == "EMPTY_SEQUENCE"

    def test_unknown_words_map_to_unk(self):
        params = BilstmParams.init(len(VOCAB), 4, 3, seed=5)
        a = forward(params, sent("zzz gara"), VOCAB)
        b = forward(params, sent("qqq gara"), VOCAB)
        assert np.allclose(a, b, atol=0)


class TestInit:
    def test_seed_reproducible(self):
        a = BilstmParams.init(4, 3, 2, seed=11)
        b = BilstmParams.init(4, 3, 2, seed=11)
        for (_, x), (_, y) in zip(a.named_arrays(), b.named_arrays()):
            assert np.array_equal(x, y)

    def test_uniform_bounds(self):
        params = BilstmParams.init(6, 8, 8, seed=2)
        for _, array in params.named_arrays():
            assert np.all(np.abs(array) <= 0.1)


class TestLossAndGrad:
    def test_zero_params_loss_is_log7(self):
        params = BilstmParams.zeros(len(VOCAB), 4, 3)
        loss, _ = loss_and_grad(params, sent("Ngozi gara Abuja"), ["B-PER", "O", "B-LOC"], VOCAB)
        assert loss == pytest.approx(math.log(7), abs=1e-12)

    def test_length_mismatch(self):
        params = BilstmParams.zeros(len(VOCAB), 4, 3)
        with pytest.raises(WazobiaError) as err:
            loss_and_grad(params, sent("Ngozi gara"), ["O"], VOCAB)
        assert err.value.code == "LENGTH_MISMATCH"

    @pytest.mark.parametrize("seed", range(5))
    def test_gradient_matches_finite_differences_every_tensor(self, seed):
        rng = SplitMix64(seed)
        params = BilstmParams.init(len(VOCAB), 5, 4, seed=seed + 100)
        words = ["ngozi", "gara", "abuja", "kano", "musa", "tafi"]
        n = 3 + rng.next_below(3)
        sentence = sent(" ".join(words[rng.next_below(len(words))] for _ in range(n)))
        from wazobia.text import BIO_LABELS

        gold = [BIO_LABELS[rng.next_below(7)] for _ in range(n)]
        _, grads = loss_and_grad(params, sentence, gold, VOCAB)
        h = 1e-4
        for (name, array), (_, grad) in zip(params.named_arrays(), grads.named_arrays()):
            flat = array.reshape(-1)
            flat_grad = grad.reshape(-1)
            for k in range(flat.shape[0]):
                orig = flat[k]
                flat[k] = orig + h
                plus, _ = loss_and_grad(params, sentence, gold, VOCAB)
                flat[k] = orig - h
                minus, _ = loss_and_grad(params, sentence, gold, VOCAB)
                flat[k] = orig
                numeric = (plus - minus) / (2 * h)
                assert abs(flat_grad[k] - numeric) <= 1e-4 * abs(numeric) + 1e-6, (
                    f"{name}[{k}]: analytic {flat_grad[k]}, numeric {numeric}"
                )

    def test_one_sentence_overfit(self):
        # convergence smoke test: 200 plain SGD steps memorize one sentence
        params = BilstmParams.init(len(VOCAB), 16, 16, seed=42)
        sentence = sent("Ngozi gara Abuja")
        gold = ["B-PER", "O", "B-LOC"]
        for _ in range(200):
            _, grads = loss_and_grad(params, sentence, gold, VOCAB)
            for (_, p), (_, g) in zip(params.named_arrays(), grads.named_arrays()):
                p -= 0.5 * g
        loss, _ = loss_and_grad(params, sentence, gold, VOCAB)
        assert loss < 0.05


def make_corpus():
    data = [
        ("Ngozi gara Abuja", ["B-PER", "O", "B-LOC"]),
        ("Musa gara Kano", ["B-PER", "O", "B-LOC"]),
        ("Ngozi tafi Kano", ["B-PER", "O", "B-LOC"]),
        ("Musa tafi Abuja", ["B-PER", "O", "B-LOC"]),
    ]
    return [
        LabeledSentence(sent(words), tuple(labels), f"b{i}")
        for i, (words, labels) in enumerate(data)
    ]


class TestTrain:
    def test_history_rows(self):
        corpus = make_corpus()
        vocab = build_word_vocab(corpus)
        _, history = train(corpus, corpus[:1], TrainConfig(epochs=5, learning_rate=0.2), vocab)
        assert [row.epoch for row in history] == [1, 2, 3, 4, 5]

    def test_separable_corpus_high_accuracy(self):
        corpus = make_corpus()
        vocab = build_word_vocab(corpus)
        params, history = train(
            corpus, corpus, TrainConfig(epochs=50, seed=42, learning_rate=0.2), vocab
        )
        assert history[-1].accuracy >= 0.95

    def test_bit_identical_reruns(self):
        corpus = make_corpus()
        vocab = build_word_vocab(corpus)
        config = TrainConfig(epochs=3, seed=5, learning_rate=0.2)
        params_a, history_a = train(corpus, corpus[:2], config, vocab)
        params_b, history_b = train(corpus, corpus[:2], config, vocab)
        assert history_a == history_b
        for (_, x), (_, y) in zip(params_a.named_arrays(), params_b.named_arrays()):
            assert np.array_equal(x, y)

    def test_clipping_bounds_update_norm(self):
        # post-clip global norm must never exceed the threshold
        from wazobia.bilstm import _global_norm

        corpus = make_corpus()
        vocab = build_word_vocab(corpus)
        params = BilstmParams.init(len(vocab), 8, 8, seed=1)
        # inflate weights so raw gradients are large
        params.proj_w += 40.0
        _, grads = loss_and_grad(params, corpus[0].sentence, corpus[0].labels, vocab)
        norm = _global_norm(grads)
        clip = 5.0
        if norm > clip:
            scale = clip / norm
            for _, g in grads.named_arrays():
                g *= scale
            assert _global_norm(grads) <= clip + 1e-12


class TestLoadEmbeddings:
    def test_three_word_file(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text(
            "abuja 1 2 3 4\nkano 5 6 7 8\nngozi 9 10 11 12\n", encoding="utf-8"
        )
        vocab, matrix = load_embeddings(path)
        assert len(vocab) == 4  # 3 words + UNK
        assert matrix.shape == (4, 4)
        # UNK row: element-wise mean of the three vectors, computed by hand
        assert np.allclose(matrix[0], [5.0, 6.0, 7.0, 8.0])

    def test_header_detected(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("2 3\nabuja 1 2 3\nkano 4 5 6\n", encoding="utf-8")
        vocab, matrix = load_embeddings(path)
        assert len(vocab) == 3 and matrix.shape == (3, 3)

    def test_inconsistent_dimension(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("abuja 1 2 3 4\nkano 5 6 7\n", encoding="utf-8")
        with pytest.raises(WazobiaError) as err:
            load_embeddings(path)
        assert err.value.code == "BAD_FORMAT"
        assert "line 2" in err.value.message

    def test_non_numeric(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("abuja 1 x 3\n", encoding="utf-8")
        with pytest.raises(WazobiaError) as err:
            load_embeddings(path)
        assert err.value.code == "BAD_FORMAT"

    def test_empty_file(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("", encoding="utf-8")
        with pytest.raises(WazobiaError) as err:
            load_embeddings(path)
        assert err.value.code == "EMPTY_FILE"


class TestPredict:
    def test_labels_come_from_scheme(self):
        corpus = make_corpus()
        vocab = build_word_vocab(corpus)
        params = BilstmParams.init(len(vocab), 4, 3, seed=8)
        labels = predict_labels(params, corpus[0].sentence, vocab)
        from wazobia.text import BIO_LABELS

        assert len(labels) == 3 and all(l in BIO_LABELS for l in labels)
