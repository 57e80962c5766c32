"""Built-in backend behavior against hand-counted and closed-form oracles."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beamtree.backends import (
    BackendLimits,
    FineTuneConfig,
    MaskedQueryConfig,
    NGramBackend,
    SoftmaxBigramBackend,
    Token,
)
from beamtree.errors import (
    ContextEmptyError,
    InvalidParameterError,
    LayerOutOfRangeError,
    NotTrainableError,
    UnknownSnapshotError,
    UnknownTokenError,
)

CORPUS = "the cat sat . the cat ran ."


@pytest.fixture()
def bigram():
    return NGramBackend.from_corpus(CORPUS)


class TestTokenizer:
    def test_empty_text_gives_empty_sequence(self, bigram):
        assert bigram.tokenize("") == []

    def test_round_trip(self, bigram):
        assert bigram.detokenize(bigram.tokenize("the cat")) == "the cat"

    def test_ids_by_first_appearance(self, bigram):
        toks = bigram.tokenize("the cat sat . ran")
        assert [t.id for t in toks] == [0, 1, 2, 3, 4]

    def test_out_of_vocabulary_rejected(self, bigram):
        with pytest.raises(UnknownTokenError) as err:
            bigram.tokenize("the dog")
        assert err.value.detail == "dog"


class TestAddOneSmoothing:
    def test_hand_counted_conditional(self, bigram):
        # corpus has count(the cat)=2, count(the .)=2 total, |V|=5
        dist = bigram.next_distribution(bigram.tokenize("the"))
        assert dist.probability_of(1) == pytest.approx(3 / 7, abs=1e-15)
        assert dist.entries[0][0].text == "cat"

    def test_other_contexts_hand_counted(self, bigram):
        dist = bigram.next_distribution(bigram.tokenize("cat"))
        assert dist.probability_of(bigram.tokenize("sat")[0].id) == pytest.approx(2 / 7)
        assert dist.probability_of(bigram.tokenize("ran")[0].id) == pytest.approx(2 / 7)
        dist = bigram.next_distribution(bigram.tokenize("sat"))
        assert dist.probability_of(bigram.tokenize(".")[0].id) == pytest.approx(1 / 3)

    def test_full_distribution_sums_to_one(self, bigram):
        for word in CORPUS.split():
            dist = bigram.next_distribution(bigram.tokenize(word))
            assert abs(dist.total_mass() - 1.0) < 1e-9

    def test_unseen_context_is_uniform(self):
        # "sat" never follows "ran", and trigram contexts are sparser still
        b = NGramBackend.from_corpus(CORPUS, order=3)
        dist = b.next_distribution(b.tokenize("ran the"))
        assert all(p == pytest.approx(1 / 5) for _, p in dist.entries)

    def test_uniform_vocabulary_backend(self):
        b = NGramBackend.from_vocabulary(["a", "b", "c", "d"])
        dist = b.next_distribution(b.tokenize("a"))
        assert [p for _, p in dist.entries] == [0.25, 0.25, 0.25, 0.25]

    def test_equal_probability_ties_sorted_by_id(self):
        b = NGramBackend.from_vocabulary(["z", "y", "x"])
        dist = b.next_distribution(b.tokenize("z"))
        assert [t.id for t, _ in dist.entries] == [0, 1, 2]

    def test_empty_context_rejected(self, bigram):
        with pytest.raises(ContextEmptyError):
            bigram.next_distribution([])

    def test_truncation_matches_short_context(self):
        b = NGramBackend.from_corpus(CORPUS, limits=BackendLimits(max_context=2))
        long = b.tokenize("the cat sat . the")
        short = b.tokenize(". the")
        assert b.next_distribution(long).entries == b.next_distribution(short).entries

    def test_trigram_order(self):
        b = NGramBackend.from_corpus(CORPUS, order=3)
        # "the cat" is followed by sat once and ran once
        dist = b.next_distribution(b.tokenize("the cat"))
        assert dist.probability_of(b.tokenize("sat")[0].id) == pytest.approx(2 / 7)


class TestEmbeddings:
    def test_dimension_and_determinism(self, bigram):
        toks = bigram.tokenize("the cat the")
        vecs = bigram.token_embeddings(toks, layer=11)
        assert all(len(v) == 16 for v in vecs)
        assert vecs[0] == vecs[2]
        assert vecs[0] != vecs[1]

    def test_layer_changes_vectors(self, bigram):
        toks = bigram.tokenize("cat")
        assert bigram.token_embeddings(toks, 0) != bigram.token_embeddings(toks, 11)

    def test_layer_out_of_range(self, bigram):
        with pytest.raises(LayerOutOfRangeError):
            bigram.token_embeddings(bigram.tokenize("cat"), layer=12)


class TestMaskedPrediction:
    def test_top_entry_is_bigram_continuation(self, bigram):
        dist = bigram.masked_top_k(
            bigram.tokenize("the"), bigram.tokenize("."), MaskedQueryConfig()
        )
        assert dist.entries[0][0].text == "cat"

    def test_mask_k_truncates(self, bigram):
        dist = bigram.masked_top_k(
            bigram.tokenize("the"), [], MaskedQueryConfig(mask_k=1)
        )
        assert len(dist.entries) == 1


class TestSnapshots:
    def test_restore_is_bit_exact(self):
        b = SoftmaxBigramBackend.from_corpus(CORPUS)
        snap = b.snapshot()
        before = b.next_distribution(b.tokenize("the")).entries
        b.fine_tune(b.tokenize("the ran"), FineTuneConfig(learning_rate=0.5))
        changed = b.next_distribution(b.tokenize("the")).entries
        assert changed != before
        b.restore(snap.snapshot_id)
        assert b.next_distribution(b.tokenize("the")).entries == before

    def test_identical_states_serialize_identically(self):
        b = SoftmaxBigramBackend.from_corpus(CORPUS)
        s1 = b.snapshot(label="one")
        s2 = b.snapshot(label="two")
        assert s1.snapshot_id != s2.snapshot_id
        assert b.snapshot_bytes(s1.snapshot_id) == b.snapshot_bytes(s2.snapshot_id)

    def test_unknown_snapshot(self, bigram):
        with pytest.raises(UnknownSnapshotError):
            bigram.restore("nope")

    def test_state_round_trip(self, bigram):
        blob = bigram.state_bytes()
        other = NGramBackend.from_vocabulary(["x"])
        other.load_state_bytes(blob)
        assert other.state_bytes() == blob


class TestFineTune:
    def test_ngram_backend_not_trainable(self, bigram):
        with pytest.raises(NotTrainableError):
            bigram.fine_tune(bigram.tokenize("the cat"), FineTuneConfig())

    def test_zero_steps_rejected(self):
        with pytest.raises(InvalidParameterError):
            FineTuneConfig(steps=0)

    def test_initial_distribution_matches_smoothed_bigram(self):
        counts = NGramBackend.from_corpus(CORPUS)
        soft = SoftmaxBigramBackend.from_corpus(CORPUS)
        for word in ["the", "cat", "."]:
            a = counts.next_distribution(counts.tokenize(word))
            b = soft.next_distribution(soft.tokenize(word))
            for (ta, pa), (tb, pb) in zip(a.entries, b.entries):
                assert ta == tb
                assert pa == pytest.approx(pb, abs=1e-12)

    def test_single_step_matches_closed_form(self):
        """One gradient step on 'a b' must equal the hand-derived update."""
        corpus = "a b a c"
        soft = SoftmaxBigramBackend.from_corpus(corpus)
        a_id, b_id = soft.tokenize("a")[0].id, soft.tokenize("b")[0].id
        q = np.array(
            [soft.next_distribution(soft.tokenize("a")).probability_of(i) for i in range(3)]
        )
        lr = 0.7
        logits = np.log(q)
        grad = q.copy()
        grad[b_id] -= 1.0
        expected = np.exp(logits - lr * grad)
        expected /= expected.sum()

        trace = soft.fine_tune(soft.tokenize("a b"), FineTuneConfig(learning_rate=lr))
        got = soft.next_distribution(soft.tokenize("a"))
        assert trace == [pytest.approx(-math.log(q[b_id]))]
        for i in range(3):
            assert got.probability_of(i) == pytest.approx(expected[i], abs=1e-12)

    def test_target_probability_strictly_increases(self):
        soft = SoftmaxBigramBackend.from_corpus(CORPUS)
        seq = soft.tokenize("the ran")
        before = soft.next_distribution(seq[:1]).probability_of(seq[1].id)
        soft.fine_tune(seq, FineTuneConfig(learning_rate=0.1))
        after = soft.next_distribution(seq[:1]).probability_of(seq[1].id)
        assert after > before

    def test_too_short_sequence_rejected(self):
        soft = SoftmaxBigramBackend.from_corpus(CORPUS)
        with pytest.raises(InvalidParameterError):
            soft.fine_tune(soft.tokenize("the"), FineTuneConfig())

    @given(st.lists(st.integers(0, 3), min_size=2, max_size=12), st.floats(0.05, 2.0))
    @settings(max_examples=60, deadline=None)
    def test_loss_decreases_monotonically_below_stability_bound(self, ids, lr):
        soft = SoftmaxBigramBackend.from_corpus("p q r s p q")
        seq = [Token(i, "pqrs"[i]) for i in ids]
        trace = soft.fine_tune(seq, FineTuneConfig(learning_rate=lr, steps=5))
        assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))


class TestDescriptor:
    def test_capabilities(self, bigram):
        d = bigram.describe()
        assert d.capabilities.generate and d.capabilities.embed and d.capabilities.masked
        assert not d.capabilities.trainable
        assert d.vocab_size == 5
        assert d.embedding_dim == 16

    def test_trainable_flag_on_softmax(self):
        d = SoftmaxBigramBackend.from_corpus(CORPUS).describe()
        assert d.capabilities.trainable

    def test_continuation_text_prepends_space(self, bigram):
        tok = bigram.tokenize("cat")[0]
        assert bigram.continuation_text(tok) == " cat"
