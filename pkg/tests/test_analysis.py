import csv
import io
import json
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beamtree.analysis import (
    AdaptationRecord,
    WordList,
    adaptation_to_csv,
    bundled_wordlist,
    curve_to_csv,
    global_adaptation_report,
    load_wordlist,
    local_adaptation_report,
    match_wordlists,
    normalized_words,
    parse_wordlist,
    perplexity,
    report_to_json,
    split_perplexity,
    tree_words,
    upset,
    upset_to_csv,
)
from beamtree.backends import NGramBackend, SoftmaxBigramBackend, Token
from beamtree.backends.base import FineTuneConfig
from beamtree.errors import (
    EmptyWordListError,
    InvalidParameterError,
    NotTrainableError,
)
from beamtree.tree import append_children, create_tree

from helpers import TableBigramBackend
from oracles import brute_force_upset


def word_tree(tree_id: str, node_texts: list[str]):
    """Chain tree: root text = first entry, one child per remaining entry."""
    tree = create_tree(node_texts[0], tree_id=tree_id)
    parent = 0
    for i, text in enumerate(node_texts[1:]):
        [parent] = append_children(
            tree, parent, [(Token(i % 5, text.strip() or "x"), 0.5)], texts=[text]
        )
    return tree


def wl(name, *words):
    return WordList(name=name, words=frozenset(w.casefold() for w in words))


# --- word lists ---


def test_casefold_dedup():
    parsed = parse_wordlist("jobs", "Nurse\nnurse\n")
    assert parsed.words == frozenset({"nurse"})


def test_comments_and_blanks_ignored():
    parsed = parse_wordlist("jobs", "# heading\nnurse  # inline\n\nlawyer\n")
    assert parsed.words == frozenset({"nurse", "lawyer"})


def test_comments_only_file_rejected():
    with pytest.raises(EmptyWordListError):
        parse_wordlist("jobs", "# nothing\n# here\n")


def test_empty_name_rejected():
    with pytest.raises(InvalidParameterError):
        WordList(name="", words=frozenset({"x"}))


def test_load_wordlist_uses_stem_as_name(tmp_path):
    p = tmp_path / "occupations.txt"
    p.write_text("pilot\n", encoding="utf-8")
    loaded = load_wordlist(p)
    assert loaded.name == "occupations"
    assert loaded.words == frozenset({"pilot"})


def test_bundled_occupation_lists_load():
    female = bundled_wordlist("occupations_female")
    male = bundled_wordlist("occupations_male")
    assert "nurse" in female.words
    assert "lawyer" in male.words
    assert not (female.words & male.words)


# --- matching ---


def test_punctuation_and_case_normalized():
    assert normalized_words(" Nurse,") == ["nurse"]
    tree = word_tree("t1", ["start", " Nurse,"])
    badges = match_wordlists([tree], [wl("jobs", "nurse")])
    assert badges["t1"] == {1: {"jobs": ["nurse"]}}


def test_no_badge_without_match():
    tree = word_tree("t1", ["start", " the"])
    badges = match_wordlists([tree], [wl("jobs", "nurse")])
    assert badges["t1"] == {}


def test_multiple_badges_on_one_node():
    tree = word_tree("t1", ["start", " nurse pilot"])
    badges = match_wordlists(
        [tree], [wl("a", "nurse"), wl("b", "pilot"), wl("c", "doctor")]
    )
    assert badges["t1"][1] == {"a": ["nurse"], "b": ["pilot"]}


def test_matching_order_independent():
    trees = [
        word_tree("t1", ["a nurse", " pilot"]),
        word_tree("t2", ["pilot pilot", " nurse"]),
    ]
    lists = [wl("x", "nurse"), wl("y", "pilot")]
    forward = match_wordlists(trees, lists)
    backward = match_wordlists(list(reversed(trees)), list(reversed(lists)))
    assert forward == backward


def test_matching_equals_naive_scan():
    rng = random.Random(11)
    vocab = ["nurse", "pilot", "the", "Stone,", "engineer", "x1"]
    trees = [
        word_tree(f"t{i}", [" ".join(rng.choices(vocab, k=3)) for _ in range(4)])
        for i in range(3)
    ]
    lists = [wl("a", "nurse", "stone"), wl("b", "pilot", "engineer")]
    got = match_wordlists(trees, lists)
    for tree in trees:
        for nid, node in tree.nodes.items():
            for lst in lists:
                expected = sorted(
                    {w for w in normalized_words(node.text) if w in lst.words}
                )
                actual = got[tree.tree_id].get(nid, {}).get(lst.name, [])
                assert actual == expected


# --- upset ---


def as_oracle_shape(result):
    out = {}
    for col in result.columns:
        bucket = {}
        for name, entries in col.per_list_words.items():
            for w, c in entries:
                bucket[(name, w)] = c
        out[frozenset(col.member_trees)] = bucket
    return out


def test_no_matches_empty_result():
    tree = word_tree("t1", ["nothing here"])
    assert upset([tree], [wl("jobs", "nurse")]).columns == []


def test_shared_word_single_column():
    t1 = word_tree("t1", ["he was a", " player"])
    t2 = word_tree("t2", ["a player and", " player"])
    result = upset([t1, t2], [wl("occupations_m", "player")])
    assert len(result.columns) == 1
    col = result.columns[0]
    assert col.member_trees == ("t1", "t2")
    assert col.per_list_words == {"occupations_m": [("player", 3)]}


def test_columns_ordered_by_size_then_ids():
    t1 = word_tree("t1", ["nurse player"])
    t2 = word_tree("t2", ["player"])
    t3 = word_tree("t3", ["pilot"])
    result = upset(
        [t1, t2, t3], [wl("a", "nurse", "player", "pilot")]
    )
    assert [c.member_trees for c in result.columns] == [
        ("t1", "t2"),
        ("t1",),
        ("t3",),
    ]


def test_same_word_in_two_lists_counted_per_list():
    t1 = word_tree("t1", ["nurse nurse"])
    result = upset([t1], [wl("a", "nurse"), wl("b", "nurse")])
    (col,) = result.columns
    assert col.per_list_words == {"a": [("nurse", 2)], "b": [("nurse", 2)]}


@st.composite
def upset_instances(draw):
    n_trees = draw(st.integers(min_value=1, max_value=5))
    vocab = ["alpha", "beta", "gamma", "delta", "eps"]
    trees = []
    for i in range(n_trees):
        n_nodes = draw(st.integers(min_value=1, max_value=4))
        node_texts = [
            " ".join(
                draw(
                    st.lists(st.sampled_from(vocab), min_size=1, max_size=3)
                )
            )
            for _ in range(n_nodes)
        ]
        trees.append(word_tree(f"t{i}", node_texts))
    n_lists = draw(st.integers(min_value=1, max_value=4))
    lists = []
    for j in range(n_lists):
        words = draw(
            st.sets(st.sampled_from(vocab), min_size=1, max_size=len(vocab))
        )
        lists.append(WordList(name=f"L{j}", words=frozenset(words)))
    return trees, lists


@settings(max_examples=100, deadline=None)
@given(upset_instances())
def test_upset_equals_brute_force_oracle(case):
    trees, lists = case
    result = upset(trees, lists)
    oracle = brute_force_upset(
        {t.tree_id: tree_words(t) for t in trees},
        {l.name: set(l.words) for l in lists},
    )
    assert as_oracle_shape(result) == oracle
    sizes = [len(c.member_trees) for c in result.columns]
    assert sizes == sorted(sizes, reverse=True)


# --- perplexity ---


def test_uniform_backend_gives_vocab_size():
    backend = NGramBackend.from_vocabulary(["a", "b", "c", "d"])
    tokens = backend.tokenize("a b c d a")
    assert perplexity(backend, tokens).value == pytest.approx(4.0, abs=1e-9)


def test_deterministic_chain_gives_one():
    backend = TableBigramBackend(["a", "b"], {0: [0.0, 1.0], 1: [0.0, 1.0]})
    tokens = backend.tokenize("a b b b")
    result = perplexity(backend, tokens)
    assert result.value == 1.0 and not result.zero_probability


def test_bigram_sequence_matches_hand_computation():
    backend = NGramBackend.from_corpus("the cat sat . the cat ran .")
    tokens = backend.tokenize("the cat sat")
    # V=5; the->cat: (2+1)/(2+5); cat->sat: (1+1)/(2+5)
    expected = math.exp(-(math.log(3 / 7) + math.log(2 / 7)) / 2)
    assert perplexity(backend, tokens).value == pytest.approx(expected, rel=1e-12)


def test_zero_probability_flags_infinity():
    backend = TableBigramBackend(["a", "b"], {0: [1.0, 0.0], 1: [0.0, 1.0]})
    tokens = backend.tokenize("a b")
    result = perplexity(backend, tokens)
    assert math.isinf(result.value) and result.zero_probability


def test_too_short_sequence_rejected():
    backend = NGramBackend.from_vocabulary(["a"])
    with pytest.raises(InvalidParameterError):
        perplexity(backend, backend.tokenize("a"))


def test_invariant_under_retokenization():
    backend = NGramBackend.from_corpus("the cat sat . the cat ran .")
    tokens = backend.tokenize("the cat ran .")
    again = backend.tokenize(backend.detokenize(tokens))
    assert perplexity(backend, tokens).value == perplexity(backend, again).value


def test_split_perplexity_pools_transitions():
    backend = NGramBackend.from_vocabulary(["a", "b", "c", "d"])
    samples = [backend.tokenize("a b"), backend.tokenize("c d a")]
    assert split_perplexity(backend, samples).value == pytest.approx(4.0, abs=1e-9)


# --- local adaptation ---


def trainable():
    return SoftmaxBigramBackend.from_corpus("a b a c a b . a b a b .")


def test_requires_trainable_backend():
    backend = NGramBackend.from_corpus("a b")
    with pytest.raises(NotTrainableError):
        local_adaptation_report(backend, backend.tokenize("a b"), Token(1, "b"), 1)


def test_step_zero_equals_direct_query():
    backend = trainable()
    seq = backend.tokenize("a b")
    target = seq[-1]
    direct = backend.next_distribution(seq[:-1])
    report = local_adaptation_report(backend, seq, target, steps=0)
    assert len(report.records) == 1
    rec = report.records[0]
    assert rec.step == 0
    assert rec.target_prob == direct.probability_of(target.id)
    assert rec.target_rank == direct.rank_of(target.id)


def test_prob_increases_rank_non_increasing():
    backend = trainable()
    seq = backend.tokenize("a c")
    report = local_adaptation_report(
        backend, seq, seq[-1], steps=2, config=FineTuneConfig(learning_rate=0.5)
    )
    probs = [r.target_prob for r in report.records]
    ranks = [r.target_rank for r in report.records]
    losses = [r.loss for r in report.records]
    assert probs[0] < probs[1] < probs[2]
    assert ranks[0] >= ranks[1] >= ranks[2]
    assert losses[0] > losses[1] > losses[2]


def test_backend_restored_by_default():
    backend = trainable()
    before = backend.state_bytes()
    local_adaptation_report(
        backend,
        backend.tokenize("a c"),
        backend.tokenize("c")[0],
        steps=3,
        config=FineTuneConfig(learning_rate=0.5),
    )
    assert backend.state_bytes() == before


def test_keep_leaves_tuned_state():
    backend = trainable()
    before = backend.state_bytes()
    local_adaptation_report(
        backend,
        backend.tokenize("a c"),
        backend.tokenize("c")[0],
        steps=2,
        config=FineTuneConfig(learning_rate=0.5),
        keep=True,
    )
    assert backend.state_bytes() != before


def test_target_must_be_final_token():
    backend = trainable()
    seq = backend.tokenize("a b")
    with pytest.raises(InvalidParameterError):
        local_adaptation_report(backend, seq, seq[0], steps=1)


def test_record_validation():
    with pytest.raises(InvalidParameterError):
        AdaptationRecord(step=0, target_prob=0.5, target_rank=0, loss=1.0)
    with pytest.raises(InvalidParameterError):
        AdaptationRecord(step=0, target_prob=1.5, target_rank=1, loss=1.0)


# --- global adaptation ---


def corpus_samples():
    return [
        "a b a b .",
        "a c a b .",
        "a b a c .",
        "b a b a .",
        "a b . a b",
        "c a b a .",
        "a b a b .",
        "b a . a b",
    ]


def test_global_requires_trainable():
    backend = NGramBackend.from_corpus("a b")
    with pytest.raises(NotTrainableError):
        global_adaptation_report(backend, ["a b", "a b"], 0.5, [0])


def test_identical_train_test_at_baseline():
    backend = trainable()
    curve = global_adaptation_report(backend, ["a b a", "a b a"], 0.5, [0])
    (point,) = curve.points
    assert point.train_samples == 0
    assert point.train_ppl == point.test_ppl


def test_train_ppl_improves_with_samples():
    backend = trainable()
    curve = global_adaptation_report(
        backend,
        corpus_samples(),
        0.75,
        [0, 2, 6],
        config=FineTuneConfig(learning_rate=0.5, steps=2),
    )
    train = [p.train_ppl for p in curve.points]
    assert train[2] < train[0]
    for prev, nxt in zip(train, train[1:]):
        assert nxt <= prev * 1.02
    for p in curve.points:
        assert p.train_ppl >= 1.0 and p.test_ppl >= 1.0


def test_runs_are_deterministic_and_restore_state():
    backend = trainable()
    before = backend.state_bytes()
    kwargs = dict(
        samples=corpus_samples(),
        split_ratio=0.75,
        step_schedule=[0, 3],
        config=FineTuneConfig(learning_rate=0.5),
    )
    first = global_adaptation_report(backend, **kwargs)
    assert backend.state_bytes() == before
    second = global_adaptation_report(backend, **kwargs)
    assert first.points == second.points


def test_schedule_entry_out_of_range_rejected():
    backend = trainable()
    with pytest.raises(InvalidParameterError):
        global_adaptation_report(backend, ["a b", "a c", "b a"], 0.5, [99])


def test_bad_split_ratio_rejected():
    backend = trainable()
    with pytest.raises(InvalidParameterError):
        global_adaptation_report(backend, ["a b", "a c"], 1.0, [0])


# --- export ---


def test_report_json_envelope():
    backend = trainable()
    report = local_adaptation_report(
        backend, backend.tokenize("a b"), backend.tokenize("b")[0], steps=1
    )
    doc = json.loads(report_to_json("local-adaptation", report.to_payload()))
    assert doc["format"] == "beamtree.report"
    assert doc["version"] == 1
    assert doc["kind"] == "local-adaptation"
    assert len(doc["records"]) == 2


def test_upset_csv_round_trip():
    t1 = word_tree("t1", ["nurse player"])
    t2 = word_tree("t2", ["player"])
    text = upset_to_csv(upset([t1, t2], [wl("a", "nurse", "player")]))
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["member_trees", "list", "word", "count"]
    assert ["t1|t2", "a", "player", "2"] in rows
    assert ["t1", "a", "nurse", "1"] in rows


def test_adaptation_csv_columns():
    backend = trainable()
    report = local_adaptation_report(
        backend, backend.tokenize("a b"), backend.tokenize("b")[0], steps=1
    )
    rows = list(csv.reader(io.StringIO(adaptation_to_csv(report))))
    assert rows[0] == ["step", "target_prob", "target_rank", "loss"]
    assert len(rows) == 3
    assert float(rows[1][1]) == report.records[0].target_prob


def test_curve_csv_columns():
    backend = trainable()
    curve = global_adaptation_report(backend, ["a b a", "a b c"], 0.5, [0, 1])
    rows = list(csv.reader(io.StringIO(curve_to_csv(curve))))
    assert rows[0] == ["train_samples", "train_ppl", "test_ppl"]
    assert [r[0] for r in rows[1:]] == ["0", "1"]
