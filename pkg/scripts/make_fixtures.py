"""Regenerate the bundled demo fixtures, deterministically.

Writes into src/beamtree/data/:
  - semnet_demo.jsonl   50-synset semantic network whose geometry is seeded
                        from the demo backend's token embeddings, so e.g.
                        "dog" lands under Animal/BIOLOGY and the Government
                        subdomain coincides with the embedding of
                        "democracy" (making it the canonical replacement
                        suggestion under Politics)
  - anchors_demo.txt    projection anchors placing topic clusters in the
                        four corners of the unit square
  - colormap_default.txt  2x2 quadrant-blend colormap

Run from anywhere: python3 scripts/make_fixtures.py
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from beamtree.backends.ngram import NGramBackend  # noqa: E402
from beamtree.ontology.graph import KeywordInstance, build_graph, disambiguate  # noqa: E402
from beamtree.ontology.network import (  # noqa: E402
    Domain,
    SemanticNetwork,
    Synset,
    load_network,
    save_network,
)
from beamtree.semantics.colormap import Colormap2D, save_colormap  # noqa: E402
from beamtree.semantics.projection import ProjectionAnchors, save_anchors  # noqa: E402

DATA = ROOT / "src" / "beamtree" / "data"
EMBED_LAYER = 11
NOISE_SCALE = 0.01
FIXTURE_SEED = 20260814


def main() -> None:
    corpus = (DATA / "corpus_demo.txt").read_text(encoding="utf-8")
    backend = NGramBackend.from_corpus(corpus, order=2, backend_id="demo-ngram")
    rng = np.random.default_rng(FIXTURE_SEED)

    def e(word: str) -> list[float]:
        tok = backend.tokenize(word)
        assert len(tok) == 1
        return [float(x) for x in backend.token_embeddings(tok, EMBED_LAYER)[0]]

    def near(vec: list[float]) -> list[float]:
        noise = rng.normal(0.0, NOISE_SCALE, len(vec))
        return [float(v + n) for v, n in zip(vec, noise)]

    def rand_vec() -> list[float]:
        return [float(x) for x in rng.uniform(-1.0, 1.0, 16)]

    # subdomain sense embeddings, seeded from demo-token embeddings so the
    # walkthrough geometry is guaranteed: Government IS the embedding of
    # "democracy" (exact), every other subdomain sits a hair off its seed word
    subs = {
        ("BIOLOGY", "Animal"): near(e("dog")),
        ("BIOLOGY", "Person"): near(e("John")),
        ("BIOLOGY", "Plant"): near(e("grain")),
        ("Politics", "Government"): e("democracy"),
        ("Politics", "Society"): near(e("nation")),
        ("GEOGRAPHY", "Place"): near(e("city")),
        ("GEOGRAPHY", "Water"): near(e("ocean")),
        ("ECONOMY", "Work"): near(e("work")),
        ("ECONOMY", "Trade"): near(e("trade")),
    }
    domains: dict[str, Domain] = {}
    for (dom, sub), emb in subs.items():
        domains.setdefault(dom, Domain(name=dom, subdomains={}))
        domains[dom].subdomains[sub] = tuple(emb)

    def sub_emb(dom: str, sub: str) -> list[float]:
        return list(subs[(dom, sub)])

    # (synset_id, lemmas, pos, hypernyms, domain, expansions, sense)
    rows = [
        ("s.entity.n.01", ["entity"], "n", [], None, [], rand_vec()),
        ("s.animal.n.01", ["animal", "creature"], "n", ["s.entity.n.01"], "BIOLOGY", [], near(sub_emb("BIOLOGY", "Animal"))),
        ("s.dog.n.01", ["dog"], "n", ["s.animal.n.01"], "BIOLOGY", [], e("dog")),
        ("s.cat.n.01", ["cat"], "n", ["s.animal.n.01"], "BIOLOGY", [], near(sub_emb("BIOLOGY", "Animal"))),
        ("s.person.n.01", ["person", "people"], "n", ["s.animal.n.01"], "BIOLOGY", [], near(sub_emb("BIOLOGY", "Person"))),
        ("s.immigrant.n.01", ["immigrant", "immigrants"], "n", ["s.person.n.01"], None, [], e("immigrants")),
        ("s.john.n.01", ["john"], "n", ["s.person.n.01"], None, [], e("John")),
        ("s.jessica.n.01", ["jessica"], "n", ["s.person.n.01"], None, [], e("Jessica")),
        ("s.professional.n.01", ["professional"], "n", ["s.person.n.01"], None, [], rand_vec()),
        ("s.lawyer.n.01", ["lawyer"], "n", ["s.professional.n.01"], None, [], e("lawyer")),
        ("s.nurse.n.01", ["nurse"], "n", ["s.professional.n.01"], None, [], e("nurse")),
        ("s.leader.n.01", ["leader"], "n", ["s.person.n.01"], None, [], rand_vec()),
        ("s.president.n.01", ["president"], "n", ["s.leader.n.01"], None, [], e("president")),
        ("s.democracy.n.01", ["democracy"], "n", [], "Politics", [], e("democracy")),
        ("s.government.n.01", ["government"], "n", [], "Politics", [], near(sub_emb("Politics", "Government"))),
        ("s.nation.n.01", ["nation", "country"], "n", [], "Politics", [], e("nation")),
        ("s.society.n.01", ["society"], "n", [], "Politics", [], near(sub_emb("Politics", "Society"))),
        ("s.vote.n.01", ["vote"], "n", ["s.act.n.01"], None, [], e("vote")),
        ("s.vote.v.01", ["vote"], "v", [], None, ["s.vote.n.01"], rand_vec()),
        ("s.act.n.01", ["act"], "n", [], None, [], near(sub_emb("ECONOMY", "Work"))),
        ("s.america.n.01", ["america"], "n", [], "GEOGRAPHY", [], near(sub_emb("GEOGRAPHY", "Place"))),
        ("s.city.n.01", ["city"], "n", ["s.place.n.01"], "GEOGRAPHY", [], e("city")),
        ("s.ocean.n.01", ["ocean", "sea"], "n", ["s.water.n.01"], "GEOGRAPHY", [], e("ocean")),
        ("s.mountain.n.01", ["mountain"], "n", ["s.place.n.01"], "GEOGRAPHY", [], near(sub_emb("GEOGRAPHY", "Place"))),
        ("s.park.n.01", ["park"], "n", ["s.place.n.01"], None, [], e("park")),
        ("s.place.n.01", ["place"], "n", ["s.entity.n.01"], "GEOGRAPHY", [], near(sub_emb("GEOGRAPHY", "Place"))),
        ("s.water.n.01", ["water"], "n", ["s.entity.n.01"], "GEOGRAPHY", [], near(sub_emb("GEOGRAPHY", "Water"))),
        ("s.flood.n.01", ["flood"], "n", ["s.water.n.01"], None, [], e("flood")),
        ("s.storm.n.01", ["storm"], "n", ["s.event.n.01"], None, [], e("storm")),
        ("s.event.n.01", ["event"], "n", [], None, [], rand_vec()),
        ("s.work.n.01", ["work", "job"], "n", ["s.act.n.01"], "ECONOMY", [], e("work")),
        ("s.trade.n.01", ["trade"], "n", ["s.act.n.01"], "ECONOMY", [], e("trade")),
        ("s.market.n.01", ["market"], "n", ["s.trade.n.01"], None, [], e("market")),
        ("s.economy.n.01", ["economy"], "n", [], "ECONOMY", [], near(sub_emb("ECONOMY", "Trade"))),
        ("s.grain.n.01", ["grain"], "n", ["s.plant.n.01"], None, [], e("grain")),
        ("s.plant.n.01", ["plant"], "n", ["s.entity.n.01"], "BIOLOGY", [], near(sub_emb("BIOLOGY", "Plant"))),
        ("s.harvest.n.01", ["harvest"], "n", ["s.act.n.01"], None, [], e("harvest")),
        ("s.feast.n.01", ["feast"], "n", ["s.event.n.01"], None, [], e("feast")),
        ("s.walk.n.01", ["walk"], "n", ["s.act.n.01"], None, [], rand_vec()),
        ("s.walk.v.01", ["walk"], "v", [], None, ["s.walk.n.01"], rand_vec()),
        ("s.bank.n.01", ["bank"], "n", ["s.market.n.01"], None, [], rand_vec()),
        ("s.bank.n.02", ["bank"], "n", ["s.water.n.01"], None, [], rand_vec()),
        ("s.law.n.01", ["law"], "n", ["s.act.n.01"], None, [], e("law")),
        ("s.medicine.n.01", ["medicine"], "n", ["s.act.n.01"], None, [], e("medicine")),
        ("s.degree.n.01", ["degree"], "n", ["s.act.n.01"], None, [], e("degree")),
        ("s.states.n.01", ["state", "states"], "n", ["s.nation.n.01"], None, [], e("States")),
        ("s.merchant.n.01", ["merchant", "merchants"], "n", ["s.professional.n.01"], None, [], e("merchants")),
        ("s.mat.n.01", ["mat"], "n", ["s.entity.n.01"], None, [], e("mat")),
        ("s.life.n.01", ["life", "lives"], "n", ["s.entity.n.01"], None, [], e("lives")),
        ("s.arm.n.01", ["arm", "arms"], "n", ["s.entity.n.01"], None, [], e("arms")),
    ]
    assert len(rows) == 50, len(rows)
    synsets = {
        sid: Synset(
            synset_id=sid,
            lemmas=tuple(lemmas),
            pos=pos,
            hypernyms=tuple(hyp),
            domain=dom,
            noun_expansions=tuple(exp),
            sense_embedding=tuple(sense),
        )
        for sid, lemmas, pos, hyp, dom, exp, sense in rows
    }
    network = SemanticNetwork(synsets=synsets, domains=domains)
    network.validate()

    text = save_network(network)
    assert load_network(text).synsets.keys() == synsets.keys()
    (DATA / "semnet_demo.jsonl").write_text(text, encoding="utf-8")

    # sanity: the walkthrough geometry holds
    reloaded = load_network(text)
    dog = KeywordInstance(tree_node_id=0, surface="dog", embedding=tuple(e("dog")))
    sid = disambiguate(dog, reloaded)
    assert sid == "s.dog.n.01", sid
    graph = build_graph([(dog, sid)], reloaded)
    path = graph.path_to_root("kw:0:0")
    labels = [graph.nodes[n].label for n in path]
    assert labels == ["dog", "s.dog.n.01", "Animal", "BIOLOGY"], labels
    assert list(reloaded.domains["Politics"].subdomains["Government"]) == e("democracy")

    anchor_words = [
        ("dog", (0.15, 0.15)),
        ("cat", (0.25, 0.10)),
        ("animal", (0.20, 0.25)),
        ("democracy", (0.85, 0.15)),
        ("government", (0.80, 0.25)),
        ("nation", (0.90, 0.10)),
        ("ocean", (0.15, 0.85)),
        ("city", (0.10, 0.75)),
        ("mountain", (0.25, 0.90)),
        ("trade", (0.85, 0.85)),
        ("work", (0.75, 0.80)),
        ("market", (0.90, 0.75)),
    ]
    anchors = ProjectionAnchors(
        vectors=np.array([e(w) for w, _ in anchor_words]),
        coords=np.array([c for _, c in anchor_words]),
        neighbor_count=5,
    )
    (DATA / "anchors_demo.txt").write_text(save_anchors(anchors), encoding="utf-8")

    colormap = Colormap2D(
        grid=[
            [(59, 130, 246), (16, 185, 129)],
            [(239, 68, 68), (245, 158, 11)],
        ],
        name="quadrant-blend",
    )
    (DATA / "colormap_default.txt").write_text(save_colormap(colormap), encoding="utf-8")

    print(f"wrote {DATA / 'semnet_demo.jsonl'} ({len(rows)} synsets)")
    print(f"wrote {DATA / 'anchors_demo.txt'} ({len(anchor_words)} anchors)")
    print(f"wrote {DATA / 'colormap_default.txt'}")


if __name__ == "__main__":
    main()
