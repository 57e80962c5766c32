"""Decoder behavior: sampling math, beam semantics, determinism, comparatives."""

from __future__ import annotations

import itertools
import math
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beamtree.backends import NGramBackend, Token, TokenDistribution
from beamtree.decode import (
    ComparativeSpec,
    PredictionParams,
    apply_temperature,
    auto_predict,
    beam_step,
    instantiate_comparative,
    nucleus_filter,
)
from beamtree.errors import CapabilityError, InvalidParameterError, PlaceholderError
from beamtree.tree import create_tree, edit_node, select_head, sequence_text, serialize
from helpers import TableBigramBackend, random_bigram_instance
from oracles import exhaustive_best_logprob


def spec_example_backend() -> TableBigramBackend:
    return TableBigramBackend(["a", "b"], {0: [0.9, 0.1], 1: [0.5, 0.5]})


class TestParams:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"top_k": 0},
            {"next_n": 0},
            {"temperature": -0.1},
            {"top_p": 0.0},
            {"top_p": 1.5},
            {"no_repeat_ngram": 1},
        ],
    )
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(InvalidParameterError):
            PredictionParams(**kwargs)

    def test_dict_round_trip(self):
        p = PredictionParams(top_k=4, next_n=2, temperature=0.5, seed=7)
        assert PredictionParams.from_dict(p.to_dict()) == p

    def test_unknown_field_rejected(self):
        with pytest.raises(InvalidParameterError):
            PredictionParams.from_dict({"beam": 3})


class TestTemperature:
    def test_identity_at_one(self):
        dist = TokenDistribution([(Token(0, "x"), 0.7), (Token(1, "y"), 0.3)])
        out = apply_temperature(dist, 1.0)
        assert [p for _, p in out.entries] == [pytest.approx(0.7), pytest.approx(0.3)]

    def test_symmetric_is_fixed_point(self):
        dist = TokenDistribution([(Token(0, "x"), 0.5), (Token(1, "y"), 0.5)])
        for t in [0.25, 1.0, 4.0]:
            out = apply_temperature(dist, t)
            assert [p for _, p in out.entries] == [pytest.approx(0.5)] * 2

    def test_formula_oracle(self):
        dist = TokenDistribution([(Token(0, "x"), 0.8), (Token(1, "y"), 0.2)])
        out = apply_temperature(dist, 0.5)
        assert out.entries[0][1] == pytest.approx(0.64 / 0.68)
        assert out.entries[1][1] == pytest.approx(0.04 / 0.68)

    def test_nonpositive_rejected(self):
        dist = TokenDistribution([(Token(0, "x"), 1.0)])
        with pytest.raises(InvalidParameterError):
            apply_temperature(dist, 0.0)

    @given(
        st.lists(st.floats(0.01, 1.0), min_size=2, max_size=6),
        st.floats(0.1, 5.0),
    )
    @settings(max_examples=80, deadline=None)
    def test_preserves_order_and_mass(self, weights, t):
        total = math.fsum(weights)
        dist = TokenDistribution(
            [(Token(i, f"w{i}"), w / total) for i, w in enumerate(weights)]
        )
        out = apply_temperature(dist, t)
        probs = [p for _, p in out.entries]
        assert abs(math.fsum(probs) - 1.0) < 1e-9
        assert probs == sorted(probs, reverse=True)
        assert {t.id for t, _ in out.entries} == {t.id for t, _ in dist.entries}
        # monotone map: a strictly likelier token never drops below a rarer
        # one, though near-ties may collapse to exact ties and re-break by id
        in_p = {t.id: p for t, p in dist.entries}
        for (hi, hp), (lo, lp) in itertools.combinations(out.entries, 2):
            if hp > lp:
                assert in_p[hi.id] >= in_p[lo.id]


class TestNucleus:
    def test_full_mass_is_identity(self):
        dist = TokenDistribution([(Token(0, "x"), 0.6), (Token(1, "y"), 0.4)])
        out = nucleus_filter(dist, 1.0)
        assert [p for _, p in out.entries] == [pytest.approx(0.6), pytest.approx(0.4)]

    def test_formula_oracle(self):
        dist = TokenDistribution(
            [(Token(0, "x"), 0.6), (Token(1, "y"), 0.3), (Token(2, "z"), 0.1)]
        )
        out = nucleus_filter(dist, 0.8)
        assert len(out.entries) == 2
        assert out.entries[0][1] == pytest.approx(2 / 3)
        assert out.entries[1][1] == pytest.approx(1 / 3)

    def test_singleton(self):
        dist = TokenDistribution([(Token(0, "x"), 1.0)])
        assert nucleus_filter(dist, 0.01).entries == [(Token(0, "x"), 1.0)]


class TestBeamStep:
    def test_spec_example_head_is_aaa(self):
        backend = spec_example_backend()
        tree = create_tree("a", backend)
        beam_step(tree, 0, PredictionParams(top_k=2, next_n=2), backend)
        head = tree.nodes[tree.head]
        assert sequence_text(tree, head.node_id) == "a a a"
        assert math.exp(head.cum_logprob) == pytest.approx(0.81)

    def test_stalled_branch_stays_as_leaf(self):
        backend = spec_example_backend()
        tree = create_tree("a", backend)
        beam_step(tree, 0, PredictionParams(top_k=2, next_n=2), backend)
        # level 1: a(0.9), b(0.1); level 2 survivors aa(0.81), ab(0.09)
        by_depth = Counter(n.depth for n in tree.nodes.values())
        assert by_depth == {0: 1, 1: 2, 2: 2}
        b_node = next(n for n in tree.nodes.values() if n.depth == 1 and n.text == " b")
        assert b_node.children == []

    def test_greedy_chain(self):
        backend = spec_example_backend()
        tree = create_tree("a", backend)
        beam_step(tree, 0, PredictionParams(top_k=1, next_n=3), backend)
        assert len(tree.nodes) == 4
        assert sequence_text(tree, tree.head) == "a a a a"

    def test_deterministic_bytes_at_zero_temperature(self):
        def run():
            backend = NGramBackend.from_corpus("the cat sat . the cat ran .")
            tree = create_tree("the", backend)
            beam_step(tree, 0, PredictionParams(top_k=3, next_n=4), backend)
            return serialize(tree)

        assert run() == run()

    def test_per_level_width_bounded(self):
        backend = NGramBackend.from_corpus("a b c d a c b d a d b c")
        tree = create_tree("a", backend)
        beam_step(tree, 0, PredictionParams(top_k=2, next_n=5), backend)
        by_depth = Counter(n.depth for n in tree.nodes.values())
        assert all(v <= 2 for d, v in by_depth.items() if d > 0)

    def test_generation_capability_required(self):
        class NoGen(TableBigramBackend):
            def describe(self):
                d = super().describe()
                return type(d)(
                    backend_id=d.backend_id,
                    kind=d.kind,
                    capabilities=type(d.capabilities)(),
                    limits=d.limits,
                )

        backend = NoGen(["a"], {0: [1.0]})
        tree = create_tree("a", backend)
        with pytest.raises(CapabilityError):
            beam_step(tree, 0, PredictionParams(), backend)

    def test_stale_path_recomputed(self):
        backend = NGramBackend.from_corpus("the cat sat . the cat ran .")
        tree = create_tree("the", backend)
        beam_step(tree, 0, PredictionParams(top_k=1, next_n=2), backend)
        middle = tree.nodes[1]
        edit_node(tree, 1, " ran", backend)
        assert middle.stale
        leaf = [n.node_id for n in tree.nodes.values() if not n.children][0]
        beam_step(tree, leaf, PredictionParams(top_k=1, next_n=1), backend)
        assert not middle.stale
        # ran follows the 0 times: add-one gives 1/7
        assert middle.cond_prob == pytest.approx(1 / 7)

    def test_no_repeat_ngram_blocks_candidates(self):
        backend = spec_example_backend()
        tree = create_tree("a b a", backend)
        beam_step(
            tree, 0, PredictionParams(top_k=2, next_n=1, no_repeat_ngram=2), backend
        )
        children = [tree.nodes[c] for c in tree.nodes[0].children]
        # bigram (a,b) already on the path, so only "a" survives
        assert [c.text for c in children] == [" a"]

    def test_seeded_sampling_reproducible(self):
        def run(seed):
            backend = NGramBackend.from_corpus("a b c a c b b a c a b")
            tree = create_tree("a", backend)
            beam_step(
                tree,
                0,
                PredictionParams(top_k=2, next_n=3, temperature=0.8, seed=seed),
                backend,
            )
            return serialize(tree)

        assert run(1) == run(1)
        assert run(2) == run(2)

    def test_sampled_probabilities_are_raw_model_probs(self):
        backend = spec_example_backend()
        tree = create_tree("a", backend)
        beam_step(
            tree, 0, PredictionParams(top_k=2, next_n=1, temperature=2.0), backend
        )
        for cid in tree.nodes[0].children:
            c = tree.nodes[cid]
            assert c.cond_prob in (0.9, 0.1)


class TestBeamOracle:
    @given(st.integers(0, 10**9), st.integers(1, 4))
    @settings(max_examples=60, deadline=None)
    def test_exhaustive_when_width_covers_space(self, seed, horizon):
        rng = random.Random(seed)
        backend, prompt = random_bigram_instance(rng)
        v = len(backend.vocab)
        tree = create_tree(prompt, backend)
        beam_step(
            tree, 0, PredictionParams(top_k=v**horizon, next_n=horizon), backend
        )
        best = exhaustive_best_logprob(backend, backend.tokenize(prompt), horizon)
        head = tree.nodes[tree.head]
        assert head.depth == horizon
        assert head.cum_logprob == pytest.approx(best, abs=1e-9)

    @given(st.integers(0, 10**9), st.integers(1, 4), st.integers(1, 3))
    @settings(max_examples=60, deadline=None)
    def test_admissible_with_small_width(self, seed, horizon, top_k):
        rng = random.Random(seed)
        backend, prompt = random_bigram_instance(rng)
        tree = create_tree(prompt, backend)
        beam_step(tree, 0, PredictionParams(top_k=top_k, next_n=horizon), backend)
        best = exhaustive_best_logprob(backend, backend.tokenize(prompt), horizon)
        assert tree.nodes[tree.head].cum_logprob <= best + 1e-9


class TestAutoPredict:
    def test_stop_before_first_step(self):
        backend = spec_example_backend()
        tree = create_tree("a", backend)
        steps = list(
            auto_predict(tree, PredictionParams(), backend, stop=lambda: True)
        )
        assert steps == []
        assert len(tree.nodes) == 1

    def test_two_auto_steps_equal_two_manual(self):
        backend = spec_example_backend()
        params = PredictionParams(top_k=2, next_n=1)

        auto = create_tree("a", backend)
        assert list(auto_predict(auto, params, backend, max_steps=2)) == [1, 2]

        manual = create_tree("a", backend)
        beam_step(manual, manual.head, params, backend)
        beam_step(manual, manual.head, params, backend)
        assert serialize(auto) == serialize(manual)

    def test_requires_some_bound(self):
        backend = spec_example_backend()
        tree = create_tree("a", backend)
        with pytest.raises(InvalidParameterError):
            list(auto_predict(tree, PredictionParams(), backend))

    def test_stops_when_fully_blocked(self):
        backend = TableBigramBackend(["a"], {0: [1.0]})
        tree = create_tree("a", backend)
        params = PredictionParams(top_k=1, next_n=1, no_repeat_ngram=2)
        steps = list(auto_predict(tree, params, backend, max_steps=10))
        # "a a" exists after step 1; every later candidate repeats it
        assert len(steps) < 10


class TestComparative:
    def test_one_tree_per_replacement(self):
        backend = NGramBackend.from_corpus("x went to work . y went home .")
        spec = ComparativeSpec(
            template="<PH> went",
            replacements=("x", "y"),
            params=PredictionParams(top_k=2, next_n=2),
        )
        trees = instantiate_comparative(spec, backend)
        assert [t.prompt for t in trees] == ["x went", "y went"]
        assert all(len(t.nodes) > 1 for t in trees)

    def test_replacement_span_recorded(self):
        backend = NGramBackend.from_corpus("alice went home . bob went home .")
        spec = ComparativeSpec(
            template="<PH> went", replacements=("alice",), params=PredictionParams()
        )
        [tree] = instantiate_comparative(spec, backend)
        assert tree.replacement == "alice"
        start, end = tree.replacement_span
        assert tree.prompt[start:end] == "alice"

    def test_identical_replacements_identical_bytes(self):
        backend = NGramBackend.from_corpus("a b c a c b")
        spec = ComparativeSpec(
            template="<PH> b", replacements=("a", "a"), params=PredictionParams(top_k=2)
        )
        t1, t2 = instantiate_comparative(spec, backend)
        assert serialize(t1) == serialize(t2)

    def test_placeholder_required_and_unique(self):
        with pytest.raises(PlaceholderError):
            ComparativeSpec(template="no slot", replacements=("x",))
        with pytest.raises(PlaceholderError):
            ComparativeSpec(template="<PH> and <PH>", replacements=("x",))

    def test_temperature_forced_to_zero(self):
        spec = ComparativeSpec(
            template="<PH> b",
            replacements=("a",),
            params=PredictionParams(temperature=0.9),
        )
        assert spec.params.temperature == 0.0

    def test_empty_replacements_rejected(self):
        with pytest.raises(InvalidParameterError):
            ComparativeSpec(template="<PH>", replacements=())
