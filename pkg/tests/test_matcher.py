import json
import random

import pytest

from oracles import oracle_match, sort_entries
from termkit.corpus_io import (
    SentencePair,
    TermDictionary,
    TermPair,
    tokenize,
)
from termkit.errors import FormatError, ValidationError
from termkit.matcher import (
    MatchedSentence,
    TermAnnotation,
    build_matched_corpus,
    find_subsequence,
    match_terms,
    read_matched_jsonl,
    write_matched_jsonl,
)

from helpers import FIXTURES


def dictionary(*pairs):
    return TermDictionary.from_pairs(
        TermPair(tokenize(s), tokenize(t)) for s, t in pairs
    )


def pair(src, tgt, sid=0):
    return SentencePair(sid, tokenize(src), tokenize(tgt))


class TestFindSubsequence:
    def test_leftmost_occurrence(self):
        assert find_subsequence(["a", "b", "a", "b"], ["a", "b"]) == 0

    def test_absent(self):
        assert find_subsequence(["a", "b"], ["b", "a"]) == -1

    def test_needle_longer_than_haystack(self):
        assert find_subsequence(["a"], ["a", "b"]) == -1

    def test_no_match_across_token_boundaries(self):
        # "officer" must not match inside "officers"
        assert find_subsequence(["the", "officers"], ["officer"]) == -1


class TestMatchTerms:
    def test_nested_term_consumed_longest_first(self):
        d = dictionary(
            ("öffentlicher Beamter", "public officer"), ("Beamter", "officer")
        )
        ms = match_terms(
            pair("der öffentlicher Beamter trat zurück", "the public officer resigned"),
            d,
        )
        assert [" ".join(a.term.target_term) for a in ms.annotations] == [
            "public officer"
        ]
        assert ms.max_ngram == 2

    def test_empty_dictionary_matches_nothing(self):
        assert match_terms(pair("ein Satz", "a sentence"), dictionary()) is None

    def test_repeated_occurrence_counted_once_per_pass(self):
        d = dictionary(("Wasser zur Injektion", "water for injection"))
        ms = match_terms(
            pair(
                "Wasser zur Injektion und Wasser zur Injektion",
                "water for injection and water for injection",
            ),
            d,
        )
        assert len(ms.annotations) == 1
        assert ms.annotations[0].count_in_sentence == 1

    def test_multi_pass_counts_repeats(self):
        d = dictionary(("Wasser zur Injektion", "water for injection"))
        ms = match_terms(
            pair(
                "Wasser zur Injektion und Wasser zur Injektion",
                "water for injection and water for injection",
            ),
            d,
            multi_pass=True,
        )
        assert ms.annotations[0].count_in_sentence == 2

    def test_both_sides_must_contain_the_term(self):
        d = dictionary(("Beamter", "officer"))
        assert match_terms(pair("der Mann kam", "the officer arrived"), d) is None
        assert match_terms(pair("der Beamter kam", "the man arrived"), d) is None

    def test_casefold_flag(self):
        d = dictionary(("beamter", "officer"))
        sentence = pair("der Beamter kam", "the Officer arrived")
        assert match_terms(sentence, d) is None
        ms = match_terms(sentence, d, casefold=True)
        assert ms is not None

    def test_longest_first_dominance(self):
        # the sub-term is absent elsewhere, so consuming the long term hides it
        d = dictionary(("a b c", "x y z"), ("b", "y"))
        ms = match_terms(pair("p a b c q", "p x y z q"), d)
        assert [" ".join(a.term.target_term) for a in ms.annotations] == ["x y z"]

    def test_consumed_tokens_never_exceed_sentence(self):
        rng = random.Random(11)
        d = dictionary(("a", "x"), ("b b", "y y"), ("c", "z"), ("a c", "x z"))
        for _ in range(100):
            n = rng.randrange(1, 12)
            src = " ".join(rng.choice("a b c d".split()) for _ in range(n))
            tgt = " ".join(rng.choice("x y z w".split()) for _ in range(n))
            ms = match_terms(pair(src, tgt), d)
            if ms is None:
                continue
            consumed = sum(
                a.target_ngram * a.count_in_sentence for a in ms.annotations
            )
            assert consumed <= n

    def test_matches_agree_with_enumeration_oracle(self):
        rng = random.Random(23)
        entries = [
            ("alpha", "one"),
            ("beta gamma", "two three"),
            ("gamma", "three"),
            ("delta beta", "four two"),
        ]
        d = dictionary(*entries)
        sorted_entries = sort_entries(
            [(tokenize(s), tokenize(t)) for s, t in entries]
        )
        src_vocab = "alpha beta gamma delta epsilon".split()
        tgt_vocab = "one two three four five".split()
        for trial in range(300):
            n = rng.randrange(1, 10)
            source = tuple(rng.choice(src_vocab) for _ in range(n))
            target = tuple(rng.choice(tgt_vocab) for _ in range(n))
            ms = match_terms(SentencePair(trial, source, target), d)
            expected = oracle_match(source, target, sorted_entries)
            if ms is None:
                assert expected == []
                continue
            got = [
                (tuple(a.term.source_term), tuple(a.term.target_term), a.count_in_sentence)
                for a in ms.annotations
            ]
            want = [
                (sorted_entries[i][0], sorted_entries[i][1], count)
                for i, count in expected
            ]
            assert got == want


class TestBuildMatchedCorpus:
    def test_non_matching_pairs_dropped(self):
        d = dictionary(("Rat", "Council"))
        corpus = [
            pair("der Rat tagt", "the Council meets", 0),
            pair("kein Begriff", "no term here", 1),
            pair("der Rat kommt", "the Council comes", 2),
        ]
        mc = build_matched_corpus(corpus, d)
        assert [ms.pair.id for ms in mc.sentences] == [0, 2]

    def test_all_matching_pairs_kept_in_order(self):
        d = dictionary(("Rat", "Council"))
        corpus = [pair(f"der Rat {i}", f"the Council {i}", i) for i in range(5)]
        mc = build_matched_corpus(corpus, d)
        assert [ms.pair.id for ms in mc.sentences] == [0, 1, 2, 3, 4]

    def test_thread_count_does_not_change_output(self, fixture_matched):
        from termkit.corpus_io import (
            filter_corpus_by_length,
            filter_dictionary,
            load_corpus,
            load_dictionary,
        )

        corpus = load_corpus(FIXTURES / "corpus.de", FIXTURES / "corpus.en")
        corpus = filter_corpus_by_length(corpus)
        d = filter_dictionary(load_dictionary(FIXTURES / "terms.tsv"))
        threaded = build_matched_corpus(corpus, d, threads=4)
        assert threaded.sentences == fixture_matched.sentences


class TestMatchedSentence:
    def test_needs_annotations(self):
        with pytest.raises(ValidationError):
            MatchedSentence(pair("a", "b"), ())

    def test_max_ngram_is_longest_annotation(self):
        term1 = TermPair(("s",), ("t",))
        term3 = TermPair(("s1", "s2", "s3"), ("t1", "t2", "t3"))
        ms = MatchedSentence(
            pair("s s1 s2 s3", "t t1 t2 t3"),
            (TermAnnotation(term1), TermAnnotation(term3)),
        )
        assert ms.max_ngram == 3
        assert ms.n_term_instances == 2


class TestMatchedJsonl:
    def test_round_trip(self, fixture_matched, tmp_path):
        path = tmp_path / "m.jsonl"
        write_matched_jsonl(fixture_matched, path)
        back = read_matched_jsonl(path)
        assert len(back.sentences) == len(fixture_matched.sentences)
        for a, b in zip(back.sentences, fixture_matched.sentences):
            assert a.pair == b.pair
            assert [t.term.target_term for t in a.annotations] == [
                t.term.target_term for t in b.annotations
            ]
        # provenance dictionary covers exactly the annotated terms
        annotated = {
            (a.term.source_term, a.term.target_term)
            for ms in fixture_matched.sentences
            for a in ms.annotations
        }
        rebuilt = {(e.source_term, e.target_term) for e in back.dictionary.entries}
        assert rebuilt == annotated

    def test_fixture_output_matches_golden_bytes(self, fixture_matched, tmp_path):
        path = tmp_path / "m.jsonl"
        write_matched_jsonl(fixture_matched, path)
        assert path.read_bytes() == (FIXTURES / "golden_matched.jsonl").read_bytes()

    def test_bad_length_field_rejected(self, tmp_path):
        row = {
            "id": 0,
            "src": ["a"],
            "tgt": ["b"],
            "terms": [{"src": ["a"], "tgt": ["b"], "l": 2, "count": 1}],
            "max_ngram": 1,
        }
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps(row) + "\n", encoding="utf-8")
        with pytest.raises(FormatError, match="line 1"):
            read_matched_jsonl(path)

    def test_inconsistent_max_ngram_rejected(self, tmp_path):
        row = {
            "id": 0,
            "src": ["a"],
            "tgt": ["b"],
            "terms": [{"src": ["a"], "tgt": ["b"], "l": 1, "count": 1}],
            "max_ngram": 7,
        }
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps(row) + "\n", encoding="utf-8")
        with pytest.raises(FormatError, match="max_ngram"):
            read_matched_jsonl(path)

    def test_garbage_line_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": 0}\n', encoding="utf-8")
        with pytest.raises(FormatError, match="line 1"):
            read_matched_jsonl(path)
