import pytest

from wazobia.errors import WazobiaError
from wazobia.metrics import (
    HISTORY_CSV_HEADER,
    PRF,
    RunEpoch,
    entity_prf,
    export_history,
    f1,
    history_csv,
    parse_history_csv,
    token_accuracy,
)
from wazobia.rng import SplitMix64
from wazobia.text import EntitySpan, EntityType


def span(entity_type, start, end):
    return EntitySpan(entity_type, start, end)


class TestF1:
    def test_perfect(self):
        assert f1(1.0, 1.0) == 1.0

    def test_zero_precision(self):
        assert f1(0.0, 0.7) == 0.0

    def test_harmonic_mean_formula(self):
        # oracle: direct evaluation of 2PR/(P+R)
        p, r = 0.951086, 0.939985
        assert f1(p, r) == pytest.approx(2 * p * r / (p + r), abs=0)
        assert f1(p, r) == pytest.approx(0.945503, abs=1e-6)

    def test_domain_checked(self):
        with pytest.raises(WazobiaError) as err:
            f1(1.2, 0.5)
        assert err.value.code == "DOMAIN"

    def test_harmonic_mean_bounds(self):
        # min(P,R) <= F1 <= max(P,R) for the harmonic mean; a printed F1
        # above max(P,R) therefore cannot be one
        rng = SplitMix64(99)
        for _ in range(10_000):
            p, r = rng.next_float(), rng.next_float()
            score = f1(p, r)
            assert score <= max(p, r) + 1e-12
            if p > 0 and r > 0:
                assert score >= min(p, r) - 1e-12


class TestEntityPrf:
    def test_perfect_match(self):
        gold = [[span(EntityType.PER, 0, 0), span(EntityType.LOC, 3, 3)],
                [span(EntityType.ORG, 1, 2)], [span(EntityType.PER, 0, 1)],
                [span(EntityType.LOC, 2, 2)], [span(EntityType.LOC, 4, 4)]]
        micro, per_type = entity_prf(gold, gold)
        assert (micro.precision, micro.recall, micro.f1) == (1.0, 1.0, 1.0)
        assert micro.tp == 6

    def test_type_confusion(self):
        gold = [[span(EntityType.PER, 0, 0), span(EntityType.LOC, 3, 3)]]
        pred = [[span(EntityType.PER, 0, 0), span(EntityType.ORG, 3, 3)]]
        micro, per_type = entity_prf(gold, pred)
        assert (micro.tp, micro.fp, micro.fn) == (1, 1, 1)
        assert micro.precision == 0.5 and micro.recall == 0.5 and micro.f1 == 0.5
        assert per_type[EntityType.LOC].fn == 1
        assert per_type[EntityType.ORG].fp == 1

    def test_empty_prediction(self):
        gold = [[span(EntityType.PER, 0, 0)]]
        micro, _ = entity_prf(gold, [[]])
        assert micro.precision == 0.0 and micro.recall == 0.0 and micro.f1 == 0.0

    def test_length_mismatch(self):
        with pytest.raises(WazobiaError) as err:
            entity_prf([[]], [[], []])
        assert err.value.code == "LENGTH_MISMATCH"

    def test_swap_symmetry(self):
        gold = [[span(EntityType.PER, 0, 1), span(EntityType.LOC, 4, 4)]]
        pred = [[span(EntityType.PER, 0, 1), span(EntityType.ORG, 3, 3)]]
        forward_micro, _ = entity_prf(gold, pred)
        swapped_micro, _ = entity_prf(pred, gold)
        assert forward_micro.tp == swapped_micro.tp
        assert forward_micro.fp == swapped_micro.fn
        assert forward_micro.precision == swapped_micro.recall

    def test_micro_equals_type_sums(self):
        gold = [[span(EntityType.PER, 0, 0), span(EntityType.LOC, 2, 3)],
                [span(EntityType.ORG, 0, 1)]]
        pred = [[span(EntityType.PER, 0, 0), span(EntityType.LOC, 2, 2)],
                [span(EntityType.ORG, 0, 1), span(EntityType.PER, 3, 3)]]
        micro, per_type = entity_prf(gold, pred)
        assert micro.tp == sum(p.tp for p in per_type.values())
        assert micro.fp == sum(p.fp for p in per_type.values())
        assert micro.fn == sum(p.fn for p in per_type.values())


class TestTokenAccuracy:
    def test_identical(self):
        assert token_accuracy([["O", "B-PER"]], [["O", "B-PER"]]) == 1.0

    def test_half(self):
        assert token_accuracy([["O", "B-PER"]], [["O", "O"]]) == 0.5

    def test_exclude_o_variant(self):
        gold = [["B-PER", "I-PER", "B-LOC"] + ["O"] * 7]
        pred = [["O"] * 10]
        assert token_accuracy(gold, pred) == pytest.approx(0.7)
        assert token_accuracy(gold, pred, exclude_o=True) == 0.0

    def test_mismatched_sentence(self):
        with pytest.raises(WazobiaError):
            token_accuracy([["O"]], [["O", "O"]])

    def test_self_accuracy_is_one(self):
        rng = SplitMix64(4)
        from wazobia.text import BIO_LABELS

        for _ in range(50):
            labels = [[BIO_LABELS[rng.next_below(7)] for _ in range(rng.next_below(9) + 1)]]
            assert token_accuracy(labels, labels) == 1.0


class TestPrfInvariants:
    def test_zero_denominators(self):
        prf = PRF.from_counts(0, 0, 0)
        assert (prf.precision, prf.recall, prf.f1) == (0.0, 0.0, 0.0)

    def test_f1_bounded_by_components(self):
        rng = SplitMix64(8)
        for _ in range(500):
            prf = PRF.from_counts(rng.next_below(20), rng.next_below(20), rng.next_below(20))
            assert prf.f1 <= max(prf.precision, prf.recall) + 1e-12
            if prf.precision > 0 and prf.recall > 0:
                assert prf.f1 >= min(prf.precision, prf.recall) - 1e-12


def history(n=5):
    return [
        RunEpoch(i + 1, 1.9 - 0.1 * i, 1.85 - 0.05 * i, 0.9 + 0.01 * i, 0.9, 0.9, 0.92)
        for i in range(n)
    ]


class TestHistoryExport:
    def test_header_exact(self):
        assert HISTORY_CSV_HEADER == (
            "epoch,training_loss,validation_loss,precision,recall,f1_score,accuracy"
        )
        assert history_csv(history(1)).splitlines()[0] == HISTORY_CSV_HEADER

    def test_five_epochs_six_lines(self, tmp_path):
        path = tmp_path / "h.csv"
        export_history(history(5), path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 6

    def test_round_trip_within_1e6(self, tmp_path):
        rows = history(4)
        path = tmp_path / "h.csv"
        export_history(rows, path)
        parsed = parse_history_csv(path.read_text(encoding="utf-8"))
        assert len(parsed) == 4
        for original, reread in zip(rows, parsed):
            assert reread.epoch == original.epoch
            for field in ("training_loss", "validation_loss", "precision", "recall", "f1", "accuracy"):
                assert getattr(reread, field) == pytest.approx(getattr(original, field), abs=1e-6)

    def test_empty_history_rejected(self, tmp_path):
        with pytest.raises(WazobiaError) as err:
            export_history([], tmp_path / "h.csv")
        assert err.value.code == "EMPTY_HISTORY"
