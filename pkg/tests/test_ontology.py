import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beamtree.backends.base import MaskedQueryConfig
from beamtree.backends.ngram import NGramBackend
from beamtree.decode import PredictionParams, beam_step
from beamtree.demo import (
    DEMO_MASKED_CONFIG,
    demo_anchors,
    demo_backend,
    demo_colormap,
    demo_network,
)
from beamtree.errors import (
    CapabilityError,
    DanglingReferenceError,
    DimensionMismatchError,
    FixtureFormatError,
    InvalidParameterError,
    KeywordNotFoundError,
    NetworkCycleError,
    NoSynsetFoundError,
)
from beamtree.ontology import (
    KIND_DOMAIN,
    KIND_KEYWORD,
    KIND_SYNSET,
    Domain,
    KeywordInstance,
    SemanticNetwork,
    Synset,
    build_graph,
    disambiguate,
    graph_for_tree,
    layered,
    load_network,
    nn_index,
    nn_query,
    save_network,
    simplify,
    suggest_replacements,
)
from beamtree.semantics.annotate import annotate_tree
from beamtree.tree import create_tree

from helpers import TableBigramBackend
from oracles import linear_scan_nn


def vec(*xs):
    return tuple(float(x) for x in xs)


def make_network(synsets, domains):
    net = SemanticNetwork(synsets={s.synset_id: s for s in synsets}, domains=domains)
    net.validate()
    return net


ONE_DOMAIN = {"D": Domain("D", {"S": vec(0, 0), "T": vec(10, 10)})}


# --- fixture loading ---


def test_empty_file_gives_empty_network():
    net = load_network("")
    assert net.synsets == {} and net.domains == {}


def test_round_trip_preserves_records():
    net = make_network(
        [
            Synset("s.a.n.01", ("a",), "n", (), "D", (), vec(1, 2)),
            Synset("s.b.n.01", ("b", "bee"), "n", ("s.a.n.01",), None, (), None),
        ],
        ONE_DOMAIN,
    )
    again = load_network(save_network(net))
    assert again.synsets == net.synsets
    assert again.domains == net.domains


def test_cycle_detected():
    net = SemanticNetwork(
        synsets={
            "s.a": Synset("s.a", ("a",), "n", ("s.b",)),
            "s.b": Synset("s.b", ("b",), "n", ("s.a",)),
        }
    )
    with pytest.raises(NetworkCycleError):
        net.validate()


def test_cycle_detected_in_file():
    text = save_network(
        SemanticNetwork(
            synsets={
                "s.a": Synset("s.a", ("a",), "n", ("s.b",)),
                "s.b": Synset("s.b", ("b",), "n", ("s.a",)),
            }
        )
    )
    with pytest.raises(NetworkCycleError):
        load_network(text)


def test_dangling_hypernym_rejected():
    with pytest.raises(DanglingReferenceError):
        make_network([Synset("s.a", ("a",), "n", ("s.ghost",))], {})


def test_unregistered_domain_rejected():
    with pytest.raises(DanglingReferenceError):
        make_network([Synset("s.a", ("a",), "n", (), "NOWHERE")], {})


def test_header_required():
    with pytest.raises(FixtureFormatError):
        load_network('{"record":"synset","synset_id":"s.a","lemmas":["a"],"pos":"n"}')


def test_unsupported_version_rejected():
    with pytest.raises(FixtureFormatError):
        load_network('{"record":"header","format":"beamtree.semnet","version":99}')


def test_bad_json_line_rejected():
    header = '{"record":"header","format":"beamtree.semnet","version":1}'
    with pytest.raises(FixtureFormatError):
        load_network(header + "\nnot json")


def test_bundled_fixture_loads_and_has_50_synsets():
    net = demo_network()
    assert len(net.synsets) == 50
    assert set(net.domains) == {"BIOLOGY", "Politics", "GEOGRAPHY", "ECONOMY"}


# --- disambiguation ---


def test_unique_lemma_match():
    net = demo_network()
    inst = KeywordInstance(0, "dog", ())
    assert disambiguate(inst, net) == "s.dog.n.01"


def test_casefolded_lemma_match():
    net = demo_network()
    assert disambiguate(KeywordInstance(0, "DOG", ()), net) == "s.dog.n.01"


def test_absent_surface_raises():
    with pytest.raises(NoSynsetFoundError):
        disambiguate(KeywordInstance(0, "zzz-not-here", ()), demo_network())


def test_nearest_sense_embedding_wins():
    # hand-check with an independent cosine computation on fixture vectors
    net = demo_network()
    senses = {
        sid: np.array(net.synsets[sid].sense_embedding)
        for sid in ("s.bank.n.01", "s.bank.n.02")
    }
    query = senses["s.bank.n.02"] * 0.9 + 0.01
    def cos_dist(a, b):
        return 1.0 - float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))
    expected = min(senses, key=lambda sid: (cos_dist(query, senses[sid]), sid))
    got = disambiguate(KeywordInstance(0, "bank", tuple(query)), net)
    assert got == expected == "s.bank.n.02"


def test_equal_embeddings_tie_break_by_synset_id():
    shared = vec(1, 0)
    net = make_network(
        [
            Synset("s.w.n.02", ("w",), "n", (), "D", (), shared),
            Synset("s.w.n.01", ("w",), "n", (), "D", (), shared),
        ],
        ONE_DOMAIN,
    )
    assert disambiguate(KeywordInstance(0, "w", vec(1, 0)), net) == "s.w.n.01"


def test_embeddingless_candidates_sort_last():
    net = make_network(
        [
            Synset("s.w.n.01", ("w",), "n", (), "D", (), None),
            Synset("s.w.n.02", ("w",), "n", (), "D", (), vec(0, 1)),
        ],
        ONE_DOMAIN,
    )
    assert disambiguate(KeywordInstance(0, "w", vec(0, 1)), net) == "s.w.n.02"


# --- graph building ---


def test_dog_path_keyword_synset_subdomain_domain():
    net = demo_network()
    backend = demo_backend()
    emb = tuple(
        backend.token_embeddings(backend.tokenize("dog"), 11)[0]
    )
    inst = KeywordInstance(7, "dog", emb)
    graph = build_graph([(inst, disambiguate(inst, net))], net)
    (leaf,) = graph.leaves()
    path = graph.path_to_root(leaf)
    assert [graph.nodes[n].kind for n in path] == [
        "keyword",
        "synset",
        "subdomain",
        "domain",
    ]
    assert [graph.nodes[n].label for n in path] == [
        "dog",
        "s.dog.n.01",
        "Animal",
        "BIOLOGY",
    ]


def test_zero_keywords_empty_graph():
    graph = build_graph([], demo_network())
    assert graph.nodes == {} and graph.edges() == []


def test_shared_synset_one_node_two_leaves():
    net = demo_network()
    a = KeywordInstance(1, "dog", ())
    b = KeywordInstance(5, "dog", ())
    graph = build_graph([(a, "s.dog.n.01"), (b, "s.dog.n.01")], net)
    syn_nodes = [n for n in graph.nodes.values() if n.kind == KIND_SYNSET]
    assert len(syn_nodes) == 1
    assert len(graph.leaves()) == 2


def test_verb_places_at_noun_expansion():
    net = demo_network()
    inst = KeywordInstance(2, "walk", ())
    graph = build_graph([(inst, "s.walk.v.01")], net)
    (leaf,) = graph.leaves()
    assert graph.nodes[graph.parent[leaf]].label == "s.walk.n.01"


def test_dead_end_attaches_to_most_similar_subdomain():
    net = make_network(
        [Synset("s.x.n.01", ("x",), "n", (), None, (), vec(9.5, 9.5))],
        ONE_DOMAIN,
    )
    inst = KeywordInstance(0, "x", ())
    graph = build_graph([(inst, "s.x.n.01")], net)
    (leaf,) = graph.leaves()
    labels = [graph.nodes[n].label for n in graph.path_to_root(leaf)]
    assert labels == ["x", "s.x.n.01", "T", "D"]


def test_every_instance_reaches_exactly_one_domain():
    net = demo_network()
    words = ["dog", "cat", "walk", "immigrants", "president", "storm", "grain"]
    assignments = []
    for i, w in enumerate(words):
        inst = KeywordInstance(i, w, ())
        assignments.append((inst, disambiguate(inst, net)))
    graph = build_graph(assignments, net)
    assert len(graph.leaves()) == len(words)
    for leaf in graph.leaves():
        path = graph.path_to_root(leaf)
        assert graph.nodes[path[-1]].kind == KIND_DOMAIN
        assert sum(graph.nodes[n].kind == KIND_DOMAIN for n in path) == 1


def test_unknown_synset_reported_not_raised():
    inst = KeywordInstance(0, "dog", ())
    graph = build_graph([(inst, "s.ghost.n.01")], demo_network())
    assert graph.nodes == {}
    assert graph.unattached == [(inst, "unknown-synset")]


# --- simplify ---


def chain_network():
    # x -> mid -> top(D); mid is a pure connector
    return make_network(
        [
            Synset("s.top.n.01", ("top",), "n", (), "D", (), vec(0, 0)),
            Synset("s.mid.n.01", ("mid",), "n", ("s.top.n.01",), None, (), vec(1, 1)),
            Synset("s.x.n.01", ("x",), "n", ("s.mid.n.01",), None, (), vec(2, 2)),
        ],
        ONE_DOMAIN,
    )


def test_connector_spliced_out():
    net = chain_network()
    inst = KeywordInstance(0, "x", ())
    graph = build_graph([(inst, "s.x.n.01")], net)
    assert "syn:s.mid.n.01" in graph.nodes
    slim = simplify(graph)
    assert "syn:s.mid.n.01" not in slim.nodes
    (leaf,) = slim.leaves()
    labels = [slim.nodes[n].label for n in slim.path_to_root(leaf)]
    assert labels == ["x", "s.x.n.01", "s.top.n.01", "S", "D"]


def test_simplify_idempotent():
    net = chain_network()
    inst = KeywordInstance(0, "x", ())
    slim = simplify(build_graph([(inst, "s.x.n.01")], net))
    assert simplify(slim) == slim


def test_placement_synset_kept_even_when_degree_one():
    # the synset holding the keyword is never spliced
    net = make_network(
        [Synset("s.top.n.01", ("top",), "n", (), "D", (), vec(0, 0))],
        ONE_DOMAIN,
    )
    inst = KeywordInstance(0, "top", ())
    graph = simplify(build_graph([(inst, "s.top.n.01")], net))
    (leaf,) = graph.leaves()
    assert graph.nodes[graph.parent[leaf]].label == "s.top.n.01"


def test_branching_synset_kept():
    net = chain_network()
    insts = [KeywordInstance(0, "x", ()), KeywordInstance(1, "mid", ())]
    graph = simplify(
        build_graph([(insts[0], "s.x.n.01"), (insts[1], "s.mid.n.01")], net)
    )
    # mid now hosts a keyword, so it must survive
    assert "syn:s.mid.n.01" in graph.nodes


# --- layered ---


def test_single_keyword_all_layers_weight_one():
    net = demo_network()
    inst = KeywordInstance(3, "dog", ())
    h = layered(simplify(build_graph([(inst, "s.dog.n.01")], net)))
    for kind in ("domain", "subdomain", "synset", "keyword"):
        assert h.total_weight(kind) == 1


def test_walk_twice_two_cells_synset_weight_two():
    net = demo_network()
    insts = [KeywordInstance(2, "walk", ()), KeywordInstance(9, "walk", ())]
    assignments = [(i, disambiguate(i, net)) for i in insts]
    h = layered(simplify(build_graph(assignments, net)))
    assert len(h.keywords) == 2
    assert len(h.synsets) == 1
    assert h.synsets[0].weight == 2
    assert h.synsets[0].label == "s.walk.n.01"


def test_payload_layers_reference_parents():
    net = demo_network()
    insts = [KeywordInstance(0, "dog", ()), KeywordInstance(1, "city", ())]
    assignments = [(i, disambiguate(i, net)) for i in insts]
    h = layered(simplify(build_graph(assignments, net)))
    payload = h.to_payload()
    sub_ids = {c["cell_id"] for c in payload["subdomain"]}
    for cell in payload["synset"]:
        assert cell["parent"] in sub_ids


# --- randomized structure properties ---


@st.composite
def network_and_instances(draw):
    n_syn = draw(st.integers(min_value=2, max_value=10))
    dims = 3
    domains = {}
    for d in range(draw(st.integers(min_value=1, max_value=2))):
        name = f"D{d}"
        subdomains = {}
        for s in range(draw(st.integers(min_value=1, max_value=2))):
            emb = draw(
                st.lists(
                    st.integers(min_value=-5, max_value=5),
                    min_size=dims,
                    max_size=dims,
                )
            )
            subdomains[f"S{d}{s}"] = vec(*emb)
        domains[name] = Domain(name, subdomains)
    dom_names = sorted(domains)

    synsets = []
    for i in range(n_syn):
        # hypernyms point to strictly higher indices, so acyclicity holds
        hyper = ()
        if i + 1 < n_syn and draw(st.booleans()):
            hyper = (f"s.w{draw(st.integers(min_value=i + 1, max_value=n_syn - 1))}",)
        domain = draw(st.sampled_from([None] + dom_names))
        emb = draw(
            st.one_of(
                st.none(),
                st.lists(
                    st.integers(min_value=-5, max_value=5),
                    min_size=dims,
                    max_size=dims,
                ),
            )
        )
        synsets.append(
            Synset(
                f"s.w{i}",
                (f"w{i}",),
                "n",
                hyper,
                domain,
                (),
                vec(*emb) if emb is not None else None,
            )
        )
    net = make_network(synsets, domains)

    k = draw(st.integers(min_value=0, max_value=5))
    instances = []
    for j in range(k):
        idx = draw(st.integers(min_value=0, max_value=n_syn - 1))
        instances.append((KeywordInstance(j, f"w{idx}", ()), f"s.w{idx}"))
    return net, instances


@settings(max_examples=120, deadline=None)
@given(network_and_instances())
def test_simplify_postconditions_on_random_graphs(case):
    net, instances = case
    graph = build_graph(instances, net)
    slim = simplify(graph)

    assert set(slim.leaves()) == set(graph.leaves())
    assert slim.domains() == graph.domains()
    assert simplify(slim) == slim

    for leaf in slim.leaves():
        before = graph.nodes[graph.path_to_root(leaf)[-1]].label
        after = slim.nodes[slim.path_to_root(leaf)[-1]].label
        assert before == after

    for nid, node in slim.nodes.items():
        if node.kind != KIND_SYNSET or node.has_domain:
            continue
        kids = slim.children(nid)
        if len(kids) == 1 and slim.parent[nid] is not None:
            assert slim.nodes[kids[0]].kind == KIND_KEYWORD


@settings(max_examples=120, deadline=None)
@given(network_and_instances())
def test_layer_weights_conserved_on_random_graphs(case):
    net, instances = case
    slim = simplify(build_graph(instances, net))
    h = layered(slim)
    attached = len(slim.leaves())
    for kind in ("domain", "subdomain", "synset", "keyword"):
        assert h.total_weight(kind) == attached
    for cells, parents in (
        (h.keywords, h.synsets),
        (h.synsets, h.subdomains),
        (h.subdomains, h.domains),
    ):
        by_parent = {}
        for c in cells:
            by_parent[c.parent_id] = by_parent.get(c.parent_id, 0) + c.weight
        assert by_parent == {p.cell_id: p.weight for p in parents}


# --- nearest neighbors ---


def test_stored_vector_is_its_own_nearest():
    index = nn_index([[0.0, 0.0], [3.0, 4.0], [1.0, 1.0]])
    assert nn_query(index, [3.0, 4.0], 1) == [1]


def test_m_larger_than_store_returns_all():
    index = nn_index([[0.0], [1.0], [2.0]])
    assert nn_query(index, [0.9], 10) == [1, 0, 2]


def test_dimension_mismatch_rejected():
    index = nn_index([[0.0, 0.0]])
    with pytest.raises(DimensionMismatchError):
        nn_query(index, [0.0, 0.0, 0.0], 1)


def test_ties_break_by_insertion_index():
    index = nn_index([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
    assert nn_query(index, [0.0, 0.0], 3) == [0, 1, 2]


def test_matches_linear_scan_oracle_seeded():
    rng = np.random.default_rng(7)
    vectors = rng.uniform(-1, 1, size=(300, 8))
    index = nn_index(vectors)
    for q in rng.uniform(-1, 1, size=(30, 8)):
        assert nn_query(index, q, 12) == linear_scan_nn(vectors.tolist(), q.tolist(), 12)


@settings(max_examples=80, deadline=None)
@given(
    st.integers(min_value=1, max_value=20),
    st.integers(min_value=1, max_value=8),
    st.integers(min_value=0, max_value=2**32 - 1),
)
def test_matches_linear_scan_oracle_property(n, m, seed):
    rng = np.random.default_rng(seed)
    vectors = rng.integers(-4, 5, size=(n, 3)).astype(float)
    query = rng.integers(-4, 5, size=3).astype(float)
    index = nn_index(vectors)
    assert nn_query(index, query, m) == linear_scan_nn(
        vectors.tolist(), query.tolist(), m
    )


# --- replacement suggestions ---


def tiny_replacement_setup(sub_embedding, overlap_m):
    backend = NGramBackend.from_corpus("a b c a c b", backend_id="tiny")
    net = make_network(
        [Synset("s.x.n.01", ("x",), "n", (), "D", (), vec(0, 0))],
        {"D": Domain("D", {"S": tuple(float(v) for v in sub_embedding)})},
    )
    tree = create_tree("a", backend=backend)
    config = MaskedQueryConfig(
        mask_k=10, embed_length=16, layer_range=(11, 11), overlap_m=overlap_m
    )
    beam_step(tree, 0, PredictionParams(top_k=1), backend)
    annotate_tree(tree, backend=backend)
    kw_node = next(
        nid
        for nid in tree.nodes
        if tree.nodes[nid].annotations and tree.nodes[nid].annotations.keywords
    )
    return backend, net, tree, kw_node, config


def embed_of(backend, word):
    return backend.token_embeddings(backend.tokenize(word), 11)[0]


def test_candidate_equal_to_subdomain_scores_full_overlap():
    probe = NGramBackend.from_corpus("a b c a c b", backend_id="tiny")
    backend, net, tree, kw_node, config = tiny_replacement_setup(
        embed_of(probe, "c"), overlap_m=2
    )
    kw = tree.nodes[kw_node].annotations.keywords[0].surface
    sugg = suggest_replacements(
        tree, kw_node, ["D"], backend, net, config=config
    )
    assert sugg.per_domain["D"][0] == ("c", 2)
    assert kw not in sugg.words()


def test_no_overlap_means_empty_suggestions():
    backend, net, tree, kw_node, config = tiny_replacement_setup(
        [100.0] * 16, overlap_m=1
    )
    sugg = suggest_replacements(tree, kw_node, ["D"], backend, net, config=config)
    assert sugg.per_domain == {}


def test_unannotated_node_raises():
    backend = demo_backend()
    tree = create_tree("the dog", backend=backend)
    with pytest.raises(KeywordNotFoundError):
        suggest_replacements(tree, 0, [], backend, demo_network())


def test_capability_required():
    table = TableBigramBackend(["a", "b"], {0: [0.5, 0.5], 1: [0.5, 0.5]})
    tree = create_tree("a", backend=table)
    with pytest.raises(CapabilityError):
        suggest_replacements(tree, 0, [], table, demo_network())


def test_unknown_extra_domain_rejected():
    backend, net, tree, kw_node, config = tiny_replacement_setup([0.0] * 16, 1)
    with pytest.raises(InvalidParameterError):
        suggest_replacements(tree, kw_node, ["Nowhere"], backend, net, config=config)


def test_surface_selects_among_keywords():
    backend = demo_backend()
    tree = create_tree("the dog chased the cat", backend=backend)
    annotate_tree(tree, backend=backend)
    root_keywords = [k.surface for k in tree.nodes[0].annotations.keywords]
    assert {"dog", "cat"} <= set(root_keywords)
    sugg = suggest_replacements(
        tree,
        0,
        [],
        backend,
        demo_network(),
        config=DEMO_MASKED_CONFIG,
        surface="cat",
    )
    assert sugg.keyword == "cat"
    with pytest.raises(KeywordNotFoundError):
        suggest_replacements(
            tree,
            0,
            [],
            backend,
            demo_network(),
            config=DEMO_MASKED_CONFIG,
            surface="zebra",
        )


def oracle_suggestion_scores(tree, node_id, extra, backend, network, config, surface):
    """Brute-force reimplementation with the linear-scan NN oracle."""
    node = tree.node(node_id)
    kw = next(
        rec
        for rec in node.annotations.keywords
        if surface is None or rec.surface.casefold() == surface.casefold()
    )
    ctx = tree.path_tokens(node_id)
    ids = [t.id for t in ctx]
    needle = [t.id for t in backend.tokenize(kw.surface)]
    start = max(
        i
        for i in range(len(ids) - len(needle) + 1)
        if ids[i : i + len(needle)] == needle
    )
    prefix, suffix = ctx[:start], ctx[start + len(needle) :]

    graph = graph_for_tree(tree, network)
    eligible = {d.casefold(): d for d in graph.domains()}
    for name in extra:
        dom = network.domain_named(name)
        eligible[dom.name.casefold()] = dom.name
    subs = [
        (d, s, e)
        for d, s, e in network.all_subdomains()
        if d.casefold() in eligible
    ]
    cands = [
        t
        for t, _ in backend.masked_top_k(prefix, suffix, config).entries
        if t.text.casefold() != kw.surface.casefold()
    ]

    def pad(v):
        return list(v) + [0.0] * (config.embed_length - len(v))

    def cand_embed(tok):
        seq = prefix + [tok] + suffix
        parts = []
        for layer in range(config.layer_range[0], config.layer_range[1] + 1):
            parts.extend(backend.token_embeddings(seq, layer)[len(prefix)])
        return pad(parts)

    vectors = [pad(e) for _, _, e in subs] + [cand_embed(t) for t in cands]
    m = min(config.overlap_m, len(vectors))
    sets = [set(linear_scan_nn(vectors, v, m)) for v in vectors]

    out = {}
    for ci, tok in enumerate(cands):
        for si, (d, _, _) in enumerate(subs):
            ov = len(sets[len(subs) + ci] & sets[si])
            if ov > 0:
                bucket = out.setdefault(d, {})
                bucket[tok.text] = max(bucket.get(tok.text, 0), ov)
    return {
        d: sorted(w.items(), key=lambda e: (-e[1], e[0].casefold(), e[0]))
        for d, w in sorted(out.items())
    }


def walkthrough_tree():
    backend = demo_backend()
    tree = create_tree("The United States of America is a nation of", backend=backend)
    beam_step(tree, 0, PredictionParams(top_k=1), backend)
    annotate_tree(
        tree, backend=backend, anchors=demo_anchors(), colormap=demo_colormap()
    )
    kw_node = max(tree.nodes)
    assert tree.nodes[kw_node].text == " immigrants"
    return backend, tree, kw_node


def test_democracy_suggested_under_politics():
    backend, tree, kw_node = walkthrough_tree()
    net = demo_network()
    sugg = suggest_replacements(
        tree, kw_node, ["Politics"], backend, net, config=DEMO_MASKED_CONFIG
    )
    politics = dict(sugg.per_domain["Politics"])
    assert "democracy" in politics
    assert sugg.per_domain["Politics"][0] == ("democracy", DEMO_MASKED_CONFIG.overlap_m)


def test_suggestions_match_brute_force_oracle():
    backend, tree, kw_node = walkthrough_tree()
    net = demo_network()
    sugg = suggest_replacements(
        tree, kw_node, ["Politics"], backend, net, config=DEMO_MASKED_CONFIG
    )
    expected = oracle_suggestion_scores(
        tree, kw_node, ["Politics"], backend, net, DEMO_MASKED_CONFIG, None
    )
    assert sugg.per_domain == expected


def test_suggestions_subset_of_masked_top_k():
    backend, tree, kw_node = walkthrough_tree()
    sugg = suggest_replacements(
        tree, kw_node, ["Politics"], backend, demo_network(), config=DEMO_MASKED_CONFIG
    )
    ctx = tree.path_tokens(kw_node)
    masked = backend.masked_top_k(ctx[:-1], [], DEMO_MASKED_CONFIG)
    allowed = {t.text for t, _ in masked.entries}
    assert set(sugg.words()) <= allowed


def test_graph_for_tree_reports_unmatched_keywords():
    backend, tree, _ = walkthrough_tree()
    graph = graph_for_tree(tree, demo_network())
    assert "Politics" in graph.domains()  # via "nation"
    reasons = {reason for _, reason in graph.unattached}
    assert reasons <= {"no-synset", "no-noun-placement", "unknown-synset"}
    surfaces = {inst.surface.casefold() for inst, _ in graph.unattached}
    assert "united" in surfaces  # not in the fixture lexicon
