import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tddetect import embeddings, features
from tddetect.corpus import Comment, Ticket
from tddetect.errors import DataError
from tests.test_corpus import T0, make_ticket


class TestRegistry:
    def test_default_has_105_features(self):
        reg = features.FeatureRegistry.default()
        assert len(reg) == 105
        assert len(set(reg.names)) == 105

    def test_family_sizes(self):
        reg = features.FeatureRegistry.default()
        counts = {}
        for fam in reg.families:
            counts[fam] = counts.get(fam, 0) + 1
        assert counts == {
            "metadata": 19, "count": 9, "keyphrase": 25,
            "concept": 10, "wordvec": 22, "docvec": 20,
        }

    def test_notable_names_present(self):
        reg = features.FeatureRegistry.default()
        for name in (
            "wordvec_4_percentile_5", "wordvec_10_percentile_95",
            "KEYPHRASE_debt", "KEYPHRASE_doesnt_work", "KEYPHRASE_clean-up",
            "KEYPHRASE_clean_up", "CONCEPT_outdated", "docvec_1", "docvec_20",
            "n_sha1", "author_domain_chromium_org",
        ):
            assert name in reg.names, name

    def test_ngram_extension(self):
        reg = features.FeatureRegistry.default().with_ngrams(["foo", "bar_baz"])
        assert len(reg) == 107
        assert reg.names[-2:] == ("NGRAM_foo", "NGRAM_bar_baz")
        assert reg.version.endswith("+ngrams")


class TestPercentile:
    def test_interpolation(self):
        assert features.percentile([1, 2, 3, 4], 0.5) == pytest.approx(2.5)
        assert features.percentile([10], 0.95) == 10

    def test_endpoints(self):
        vals = [3, 1, 2]
        assert features.percentile(vals, 0.0) == 1
        assert features.percentile(vals, 1.0) == 3

    @given(
        st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=30),
        st.floats(0, 1),
    )
    def test_matches_numpy_linear(self, vals, q):
        ours = features.percentile(vals, q)
        theirs = float(np.percentile(np.array(vals), q * 100, method="linear"))
        assert ours == pytest.approx(theirs, abs=1e-9)

    def test_empty_is_error(self):
        with pytest.raises(ValueError):
            features.percentile([], 0.5)


class TestMetadata:
    def test_domain_suffix_match(self):
        t = make_ticket()
        t = Ticket(**{**t.__dict__, "author_email": "dev@sub.chromium.org"})
        vec = features.metadata_features(t)
        assert vec[0] == 1.0  # chromium.org
        assert vec[1] == 0.0

    def test_priority_and_status(self):
        t = make_ticket()  # priority 2, status Fixed
        vec = features.metadata_features(t)
        names = [n for n, f in zip(
            features.FeatureRegistry.default().names,
            features.FeatureRegistry.default().families) if f == "metadata"]
        as_map = dict(zip(names, vec))
        assert as_map["priority_2"] == 1.0
        assert as_map["priority_1"] == 0.0
        assert as_map["status_fixed"] == 1.0
        assert as_map["type_starts_bug"] == 1.0
        assert as_map["type_starts_bug_dash"] == 0.0
        assert as_map["type_not_bug"] == 0.0

    def test_status_case_insensitive(self):
        t = Ticket(**{**make_ticket().__dict__, "status": "wontfix"})
        vec = features.metadata_features(t)
        assert vec[8] == 1.0  # status_wontfix is the first status flag


class TestCounts:
    def test_two_sentence_example(self):
        t = make_ticket(title="Fix it. Fix it again.", description="")
        # free_text is "Fix it. Fix it again.\n"
        vec = features.count_features(t)
        assert vec[0] == 22.0  # n_char includes the join newline
        assert vec[7] == 2.0  # n_sent
        assert vec[1] == len("Fix it again")

    def test_empty_denominators_are_zero(self):
        t = make_ticket(title="", description="")
        vec = features.count_features(t)
        assert not np.isnan(vec).any()
        assert vec[5] == 0.0 and vec[6] == 0.0


class TestKeyphrases:
    def test_substring_case_insensitive(self):
        t = make_ticket(title="Huge REFACTOR needed", description="")
        vec = features.keyphrase_features(t)
        idx = features.KEY_PHRASES.index("refactor")
        assert vec[idx] == 1.0

    def test_phrase_order_is_frozen(self):
        assert features.KEY_PHRASES[0] == "debt"
        assert features.KEY_PHRASES[11] == "deviate"
        assert features.KEY_PHRASES[12] == "tweak"
        assert len(features.KEY_PHRASES) == 25


class TestConcepts:
    def test_missing_target_fatal(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("hello " + " ".join(["0.1"] * 100) + "\n")
        emb = embeddings.load_pretrained(path)
        with pytest.raises(DataError, match="concept"):
            features.validate_concept_targets(emb)

    def test_max_cosine(self, pretrained_path):
        emb = embeddings.load_pretrained(pretrained_path)
        vec = features.concept_features(["stale", "crash"], emb)
        idx = features.CONCEPT_TARGETS.index("outdated")
        # "stale" sits near the "outdated" anchor in the fixture embedding
        assert vec[idx] > 0.5
        assert vec[features.CONCEPT_TARGETS.index("regret")] < 0.5

    def test_oov_only_gives_zeros(self, pretrained_path):
        emb = embeddings.load_pretrained(pretrained_path)
        assert np.array_equal(
            features.concept_features(["zzzzzz"], emb), np.zeros(10)
        )


class TestWordvec:
    def test_shapes_and_oov(self):
        model = embeddings.WordEmbedding(
            dim=3, vocab=["aa", "bb"], vectors=np.array([[1., 2, 3], [4, 5, 6]])
        )
        out = features.wordvec_features(["aa", "bb", "zz"], model)
        assert out.shape == (8,)
        assert out[0] == pytest.approx(np.percentile([1, 4], 5))  # dim-1 5th pct
        assert out[3] == pytest.approx(np.percentile([1, 4], 95))
        # sequential distance defined with 2+ in-vocab tokens
        assert out[6] > 0

    def test_no_tokens_gives_zeros(self):
        model = embeddings.WordEmbedding(dim=3, vocab=["aa"], vectors=np.ones((1, 3)))
        assert np.array_equal(features.wordvec_features(["zz"], model), np.zeros(8))

    def test_single_token_distance_zero(self):
        model = embeddings.WordEmbedding(dim=2, vocab=["aa"], vectors=np.ones((1, 2)))
        out = features.wordvec_features(["aa"], model)
        assert out[4] == 0.0 and out[5] == 0.0


class TestNgrams:
    def test_rarity_rule(self):
        docs = [["a", "b"]] * 3 + [["c", "d"]] * 3 + [["e"]] * 3
        vocab = features.extract_ngram_vocab(docs)
        # "a", "b", "a_b" appear in 3 docs and are absent from 6 -> kept
        assert "a_b" in vocab and "a" in vocab
        # nothing present in fewer than 3 docs survives
        docs2 = [["x", "y"]] * 2 + [["z"]] * 7
        assert "x_y" not in features.extract_ngram_vocab(docs2)

    def test_flags(self):
        flags = features.ngram_flags(["a", "b", "c"], ["a_b", "b_c", "q"])
        assert flags.tolist() == [1.0, 1.0, 0.0]


class TestFeaturize:
    def test_vector_matches_registry_length(self, bundle):
        t = next(iter(bundle.corpus.tickets.values()))
        vec = features.featurize(t, bundle.context)
        assert vec.shape == (105,)

    def test_matrix_sorted_and_reproducible(self, bundle):
        fm = features.featurize_corpus(bundle.corpus, bundle.context)
        assert fm.ticket_ids == sorted(fm.ticket_ids)
        assert np.array_equal(fm.X, bundle.fmatrix.X)

    def test_subset(self, bundle):
        ids = bundle.fmatrix.ticket_ids[:5]
        sub = bundle.fmatrix.subset(ids)
        assert sub.ticket_ids == ids
        assert np.array_equal(sub.X, bundle.fmatrix.X[:5])

    def test_csv_round_trip(self, bundle, tmp_path):
        from tddetect.cli import _load_feature_csv

        path = tmp_path / "features.csv"
        sub = bundle.fmatrix.subset(bundle.fmatrix.ticket_ids[:10])
        sub.to_csv(path)
        loaded = _load_feature_csv(path)
        assert loaded.ticket_ids == sub.ticket_ids
        assert np.array_equal(loaded.X, sub.X)
        assert loaded.registry.names == sub.registry.names
