"""Fixture-backed semantic network.

The network ships as a line-delimited JSON file: one header record, then
domain records (name + subdomains with sense embeddings) and synset
records (lemmas, hypernyms, optional domain, noun expansions, optional
sense embedding).  Loading validates referential integrity and hypernym
acyclicity; networks are immutable once built and safe to share.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..errors import DanglingReferenceError, FixtureFormatError, NetworkCycleError

SEMNET_FORMAT = "beamtree.semnet"
SEMNET_VERSION = 1


@dataclass(frozen=True)
class Synset:
    synset_id: str
    lemmas: tuple[str, ...]
    pos: str
    hypernyms: tuple[str, ...] = ()
    domain: str | None = None
    noun_expansions: tuple[str, ...] = ()
    sense_embedding: tuple[float, ...] | None = None


@dataclass(frozen=True)
class Domain:
    name: str
    # subdomain name -> sense embedding
    subdomains: dict[str, tuple[float, ...]] = field(default_factory=dict)


@dataclass
class SemanticNetwork:
    synsets: dict[str, Synset] = field(default_factory=dict)
    domains: dict[str, Domain] = field(default_factory=dict)

    def __post_init__(self):
        self._lemma_index: dict[str, list[str]] = {}
        for sid in sorted(self.synsets):
            for lemma in self.synsets[sid].lemmas:
                self._lemma_index.setdefault(lemma.casefold(), []).append(sid)

    def synsets_for_lemma(self, surface: str) -> list[str]:
        return list(self._lemma_index.get(surface.casefold(), []))

    def domain_named(self, name: str) -> Domain | None:
        """Case-insensitive domain lookup."""
        folded = name.casefold()
        for d in self.domains.values():
            if d.name.casefold() == folded:
                return d
        return None

    def all_subdomains(self) -> list[tuple[str, str, tuple[float, ...]]]:
        """(domain, subdomain, embedding) rows, deterministically ordered."""
        out = []
        for dname in sorted(self.domains):
            for sname in sorted(self.domains[dname].subdomains):
                out.append((dname, sname, self.domains[dname].subdomains[sname]))
        return out

    def validate(self) -> None:
        for sid, syn in self.synsets.items():
            for ref in list(syn.hypernyms) + list(syn.noun_expansions):
                if ref not in self.synsets:
                    raise DanglingReferenceError(
                        f"synset {sid} references unknown synset {ref}"
                    )
            if syn.domain is not None and syn.domain not in self.domains:
                raise DanglingReferenceError(
                    f"synset {sid} references unregistered domain {syn.domain}"
                )
        for name, dom in self.domains.items():
            if not dom.subdomains:
                raise FixtureFormatError(f"domain {name} declares no subdomains")
        self._check_acyclic()

    def _check_acyclic(self) -> None:
        WHITE, GRAY, BLACK = 0, 1, 2
        state = {sid: WHITE for sid in self.synsets}

        def visit(sid: str, trail: list[str]) -> None:
            state[sid] = GRAY
            trail.append(sid)
            for h in self.synsets[sid].hypernyms:
                if state[h] == GRAY:
                    raise NetworkCycleError(
                        f"hypernym cycle through {h}", detail=trail + [h]
                    )
                if state[h] == WHITE:
                    visit(h, trail)
            trail.pop()
            state[sid] = BLACK

        for sid in sorted(self.synsets):
            if state[sid] == WHITE:
                visit(sid, [])


def load_network(text: str) -> SemanticNetwork:
    """Parse and validate a line-delimited network fixture."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        return SemanticNetwork()
    records = []
    for i, ln in enumerate(lines, start=1):
        try:
            records.append(json.loads(ln))
        except json.JSONDecodeError as exc:
            raise FixtureFormatError(f"line {i} is not JSON: {exc}") from exc
    header = records[0]
    if header.get("record") != "header" or header.get("format") != SEMNET_FORMAT:
        raise FixtureFormatError("first record must be the semnet header")
    if header.get("version") != SEMNET_VERSION:
        raise FixtureFormatError(f"unsupported semnet version {header.get('version')!r}")

    synsets: dict[str, Synset] = {}
    domains: dict[str, Domain] = {}
    for i, rec in enumerate(records[1:], start=2):
        kind = rec.get("record")
        try:
            if kind == "domain":
                name = rec["name"]
                if name in domains:
                    raise FixtureFormatError(f"duplicate domain {name} (line {i})")
                domains[name] = Domain(
                    name=name,
                    subdomains={
                        sub["name"]: tuple(float(x) for x in sub["embedding"])
                        for sub in rec["subdomains"]
                    },
                )
            elif kind == "synset":
                sid = rec["synset_id"]
                if sid in synsets:
                    raise FixtureFormatError(f"duplicate synset {sid} (line {i})")
                emb = rec.get("sense_embedding")
                synsets[sid] = Synset(
                    synset_id=sid,
                    lemmas=tuple(rec["lemmas"]),
                    pos=rec["pos"],
                    hypernyms=tuple(rec.get("hypernyms", [])),
                    domain=rec.get("domain"),
                    noun_expansions=tuple(rec.get("noun_expansions", [])),
                    sense_embedding=(
                        tuple(float(x) for x in emb) if emb is not None else None
                    ),
                )
            else:
                raise FixtureFormatError(f"unknown record type {kind!r} (line {i})")
        except (KeyError, TypeError, ValueError) as exc:
            raise FixtureFormatError(f"bad record on line {i}: {exc}") from exc

    network = SemanticNetwork(synsets=synsets, domains=domains)
    network.validate()
    return network


def save_network(network: SemanticNetwork) -> str:
    lines = [
        json.dumps(
            {"record": "header", "format": SEMNET_FORMAT, "version": SEMNET_VERSION},
            separators=(",", ":"),
        )
    ]
    for name in sorted(network.domains):
        dom = network.domains[name]
        lines.append(
            json.dumps(
                {
                    "record": "domain",
                    "name": dom.name,
                    "subdomains": [
                        {"name": s, "embedding": list(e)}
                        for s, e in sorted(dom.subdomains.items())
                    ],
                },
                separators=(",", ":"),
            )
        )
    for sid in sorted(network.synsets):
        syn = network.synsets[sid]
        lines.append(
            json.dumps(
                {
                    "record": "synset",
                    "synset_id": syn.synset_id,
                    "lemmas": list(syn.lemmas),
                    "pos": syn.pos,
                    "hypernyms": list(syn.hypernyms),
                    "domain": syn.domain,
                    "noun_expansions": list(syn.noun_expansions),
                    "sense_embedding": (
                        list(syn.sense_embedding)
                        if syn.sense_embedding is not None
                        else None
                    ),
                },
                separators=(",", ":"),
            )
        )
    return "\n".join(lines) + "\n"
