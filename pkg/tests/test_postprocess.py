import pytest

from wazobia.postprocess import Gazetteer, disambiguate, fold_diacritics
from wazobia.rng import SplitMix64
from wazobia.text import EntitySpan, EntityType, Language, decode_bio, sentence_from_text


def sent(text):
    return sentence_from_text(text, Language.UNKNOWN)


class TestFoldDiacritics:
    def test_tone_marks_stripped(self):
        assert fold_diacritics("Àbújá") == "abuja"

    def test_dotted_letters(self):
        # mapping table applied character by character
        assert fold_diacritics("Ọbáfẹ́mi") == "obafemi"
        assert fold_diacritics("ṣọ ịbụ ṅa") == "so ibu na"

    def test_ascii_identity(self):
        assert fold_diacritics("gara") == "gara"

    def test_idempotent(self):
        for word in ("Ọlabisi", "lánàá", "akwụkwọ", "Ifẹ", "PLAIN"):
            once = fold_diacritics(word)
            assert fold_diacritics(once) == once


class TestGazetteer:
    def test_load_and_membership(self, tmp_path):
        path = tmp_path / "gaz.tsv"
        path.write_text("# comment\nLOC\tAbuja\nORG\tLagos Food Bank\n", encoding="utf-8")
        gaz = Gazetteer.load(path)
        assert gaz.phrase_types("abuja") == {EntityType.LOC}
        assert gaz.max_phrase_len == 3
        assert gaz.token_types("food") == {EntityType.ORG}

    def test_bad_line(self, tmp_path):
        path = tmp_path / "gaz.tsv"
        path.write_text("LOC Abuja\n", encoding="utf-8")
        from wazobia.errors import WazobiaError

        with pytest.raises(WazobiaError) as err:
            Gazetteer.load(path)
        assert err.value.code == "BAD_LINE"

    def test_diacritic_insensitive(self):
        gaz = Gazetteer()
        gaz.add(EntityType.LOC, "Àbújá")
        assert gaz.phrase_types("abuja") == {EntityType.LOC}


def lagos_gazetteer():
    gaz = Gazetteer()
    gaz.add(EntityType.ORG, "Lagos Food Bank")
    gaz.add(EntityType.LOC, "Lagos")
    return gaz


class TestDisambiguate:
    def test_widening_to_longest_match(self):
        sentence = sent("He visited Lagos Food Bank today")
        pred = [EntitySpan(EntityType.LOC, 2, 2, 11, 16, "Lagos")]
        out = disambiguate(pred, sentence, lagos_gazetteer())
        assert len(out) == 1
        assert (out[0].entity_type, out[0].start_tok, out[0].end_tok) == (EntityType.ORG, 2, 4)
        assert out[0].surface == "Lagos Food Bank"

    def test_empty_gazetteer_identity(self):
        sentence = sent("Ngozi gara Abuja")
        pred = [EntitySpan(EntityType.PER, 0, 0)]
        assert disambiguate(pred, sentence, Gazetteer()) == pred

    def test_unique_type_retype(self):
        gaz = Gazetteer()
        gaz.add(EntityType.LOC, "abuja")
        sentence = sent("gara Abuja")
        pred = [EntitySpan(EntityType.PER, 1, 1, 5, 10, "Abuja")]
        out = disambiguate(pred, sentence, gaz)
        assert out[0].entity_type is EntityType.LOC
        assert (out[0].start_tok, out[0].end_tok) == (1, 1)

    def test_ambiguous_type_unchanged(self):
        gaz = Gazetteer()
        gaz.add(EntityType.LOC, "eko")
        gaz.add(EntityType.ORG, "eko")
        sentence = sent("ni Eko")
        pred = [EntitySpan(EntityType.PER, 1, 1, 3, 6, "Eko")]
        out = disambiguate(pred, sentence, gaz)
        assert out[0].entity_type is EntityType.PER

    def test_diacritic_insensitive_match(self):
        gaz = Gazetteer()
        gaz.add(EntityType.ORG, "Ajo Omo Oduduwa")
        sentence = sent("Àjọ Ọmọ Oduduwa wà")
        pred = [EntitySpan(EntityType.LOC, 0, 0)]
        out = disambiguate(pred, sentence, gaz)
        assert (out[0].entity_type, out[0].start_tok, out[0].end_tok) == (EntityType.ORG, 0, 2)

    def test_never_overlapping_and_idempotent(self):
        gaz = lagos_gazetteer()
        sentence = sent("Lagos Food Bank and Lagos")
        pred = [
            EntitySpan(EntityType.LOC, 0, 0),
            EntitySpan(EntityType.ORG, 1, 2),
            EntitySpan(EntityType.LOC, 4, 4),
        ]
        once = disambiguate(pred, sentence, gaz)
        for a, b in zip(once, once[1:]):
            assert a.end_tok < b.start_tok
        twice = disambiguate(once, sentence, gaz)
        assert twice == once

    def test_matched_count_never_decreases(self):
        gaz = lagos_gazetteer()
        sentence = sent("Lagos Food Bank near Lagos")
        rng = SplitMix64(21)
        types = list(EntityType)
        n = len(sentence.tokens)

        def matched_count(spans):
            from wazobia.postprocess import fold_diacritics

            count = 0
            for sp in spans:
                phrase = " ".join(
                    fold_diacritics(sentence.tokens[i].normalized)
                    for i in range(sp.start_tok, sp.end_tok + 1)
                )
                count += sp.entity_type in gaz.phrase_types(phrase)
            return count

        for _ in range(200):
            spans = []
            cursor = 0
            while cursor < n:
                if rng.next_below(2):
                    end = min(n - 1, cursor + rng.next_below(3))
                    spans.append(EntitySpan(types[rng.next_below(3)], cursor, end))
                    cursor = end + 1
                else:
                    cursor += 1
            out = disambiguate(spans, sentence, gaz)
            assert matched_count(out) >= matched_count(spans)
            for a, b in zip(out, out[1:]):
                assert a.end_tok < b.start_tok
            assert disambiguate(out, sentence, gaz) == out


class TestPipelineIntegration:
    def test_model_spans_resolved_against_bundled_gazetteer(self, bundled_gazetteer):
        sentence = sent("Ngozi gara Abuja")
        spans = decode_bio(["B-PER", "O", "B-LOC"], sentence.tokens)
        out = disambiguate(spans, sentence, bundled_gazetteer)
        assert [(s.entity_type, s.start_tok) for s in out] == [
            (EntityType.PER, 0), (EntityType.LOC, 2),
        ]
