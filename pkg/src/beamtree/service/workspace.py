"""Durable workspace: every registry the service exposes, on one data dir.

Layout:

    lock.pid                     pid of the owning process
    index.json                   registry index (everything but bulk bodies)
    trees/<tree_id>.json         canonical tree files
    snapshots/<snapshot_id>.bin  opaque model-state blobs
    backends/<backend_id>.bin    live model state, present once mutated
    wordlists/<name>.txt         one word per line
    fixtures/                    semantic network, anchors, colormap

Writes are atomic (tmp + fsync + rename) and ordered body-before-index, so
a crash at any point leaves a loadable directory; a mutation counts as
committed only once both writes land, and the constructor refuses to start
on data it cannot parse, naming the offending file.
"""

from __future__ import annotations

import json
import os
import re
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from ..analysis import (
    WordList,
    bundled_wordlist,
    match_wordlists,
    parse_wordlist,
    upset,
)
from ..backends import Backend, FineTuneConfig, MaskedQueryConfig, build_backend
from ..decode import ComparativeSpec, PredictionParams, beam_step, instantiate_comparative
from ..demo import (
    DEMO_BACKEND_ID,
    DEMO_MASKED_CONFIG,
    DEMO_TRAINABLE_ID,
    demo_anchors,
    demo_colormap,
    demo_corpus_text,
    demo_network,
)
from ..errors import (
    BeamTreeError,
    ConflictError,
    CorruptDataError,
    InvalidParameterError,
    NotFoundError,
    WorkspaceLockedError,
)
from ..ontology import (
    SemanticNetwork,
    graph_for_tree,
    layered,
    load_network,
    save_network,
    suggest_replacements,
)
from ..semantics import (
    Colormap2D,
    LexiconSentimentProvider,
    ProjectionAnchors,
    annotate_tree,
    load_anchors,
    load_colormap,
    save_anchors,
    save_colormap,
)
from ..tree import BeamTree
from ..tree import create_tree as make_tree
from ..tree import (
    deserialize,
    detect_loops,
    edit_node,
    remove_subtree,
    sequence_text,
    serialize,
    set_end_node,
    set_start_node,
)
from .locks import LockTable, ReadWriteLock

INDEX_FORMAT = "beamtree.workspace"
INDEX_VERSION = 1
LOCK_FILE = "lock.pid"

_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]{0,99}$")

# comparison-oriented bundled lists seeded into fresh workspaces; the
# stopword/negation lexicons stay internal to keyword extraction
SEED_WORDLISTS = (
    "occupations_female",
    "occupations_male",
    "sentiment_positive",
    "sentiment_negative",
)


def default_backend_configs() -> list[dict]:
    corpus = demo_corpus_text()
    return [
        {"kind": "ngram", "backend_id": DEMO_BACKEND_ID, "order": 2, "corpus": corpus},
        {"kind": "softmax-bigram", "backend_id": DEMO_TRAINABLE_ID, "corpus": corpus},
    ]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _check_id(kind: str, value: str) -> str:
    if not _ID_RE.match(value):
        raise InvalidParameterError(
            f"{kind} id {value!r} must match {_ID_RE.pattern}"
        )
    return value


def _atomic_write(path: Path, blob: bytes) -> None:
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    with open(tmp, "wb") as fh:
        fh.write(blob)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)
    dir_fd = os.open(path.parent, os.O_RDONLY)
    try:
        os.fsync(dir_fd)
    finally:
        os.close(dir_fd)


class Workspace:
    """All service state behind one directory lock.

    Per-tree writer locks serialize tree mutations; per-backend read/write
    locks let queries share a model while fine-tune and restore get
    exclusive access.
    """

    def __init__(
        self,
        data_dir: str | Path,
        backend_configs: Sequence[dict] | None = None,
        masked_config: MaskedQueryConfig = DEMO_MASKED_CONFIG,
    ):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        for sub in ("trees", "snapshots", "backends", "wordlists", "fixtures"):
            (self.data_dir / sub).mkdir(exist_ok=True)
        self._acquire_lock()
        try:
            self.masked_config = masked_config
            self._index_guard = threading.Lock()
            self._tree_locks = LockTable(threading.RLock)
            self._backend_locks = LockTable(ReadWriteLock)
            self.trees: dict[str, BeamTree] = {}
            self.backends: dict[str, Backend] = {}
            self._backend_configs: dict[str, dict] = {}
            self._snapshots: dict[str, dict] = {}
            self._snapshot_counter = 0
            self.wordlists: dict[str, WordList] = {}
            self.network: SemanticNetwork
            self.anchors: ProjectionAnchors
            self.colormap: Colormap2D
            self.sentiment = LexiconSentimentProvider.bundled()
            if (self.data_dir / "index.json").exists():
                self._load(backend_configs)
            else:
                self._init_fresh(backend_configs)
        except BaseException:
            self._release_lock()
            raise

    # --- lifecycle ---

    def _acquire_lock(self) -> None:
        path = self.data_dir / LOCK_FILE
        for attempt in range(2):
            try:
                fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_EXCL)
            except FileExistsError:
                holder = self._lock_holder(path)
                if holder is not None:
                    raise WorkspaceLockedError(
                        f"data directory {self.data_dir} is locked by pid {holder}",
                        detail=str(path),
                    )
                # stale lock from a dead process: steal it once
                try:
                    path.unlink()
                except FileNotFoundError:
                    pass
                continue
            with os.fdopen(fd, "w") as fh:
                fh.write(str(os.getpid()))
            return
        raise WorkspaceLockedError(f"could not acquire lock in {self.data_dir}")

    @staticmethod
    def _lock_holder(path: Path) -> int | None:
        """Pid holding the lock, or None when the holder is gone."""
        try:
            pid = int(path.read_text().strip())
        except (OSError, ValueError):
            return None
        try:
            os.kill(pid, 0)
        except ProcessLookupError:
            return None
        except PermissionError:
            return pid
        return pid

    def _release_lock(self) -> None:
        try:
            (self.data_dir / LOCK_FILE).unlink()
        except FileNotFoundError:
            pass

    def close(self) -> None:
        self._release_lock()

    def __enter__(self) -> "Workspace":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    # --- initial state ---

    def _init_fresh(self, backend_configs: Sequence[dict] | None) -> None:
        self.network = demo_network()
        self.anchors = demo_anchors()
        self.colormap = demo_colormap()
        _atomic_write(
            self.data_dir / "fixtures" / "semnet.jsonl",
            save_network(self.network).encode(),
        )
        _atomic_write(
            self.data_dir / "fixtures" / "anchors.txt",
            save_anchors(self.anchors).encode(),
        )
        _atomic_write(
            self.data_dir / "fixtures" / "colormap.txt",
            save_colormap(self.colormap).encode(),
        )
        for name in SEED_WORDLISTS:
            wl = bundled_wordlist(name)
            self.wordlists[name] = wl
            self._write_wordlist(name, wl)
        for config in backend_configs or default_backend_configs():
            self._register_backend(config)
        self._write_index()

    def _register_backend(self, config: dict) -> None:
        backend = build_backend(config)
        backend_id = backend.describe().backend_id
        _check_id("backend", backend_id)
        if backend_id in self.backends:
            raise ConflictError(f"backend {backend_id!r} already registered")
        self.backends[backend_id] = backend
        self._backend_configs[backend_id] = dict(config)

    def _load(self, backend_configs: Sequence[dict] | None) -> None:
        index_path = self.data_dir / "index.json"
        try:
            index = json.loads(index_path.read_text("utf-8"))
        except (OSError, ValueError) as exc:
            raise CorruptDataError(
                f"cannot parse {index_path}: {exc}", detail=str(index_path)
            ) from exc
        if index.get("format") != INDEX_FORMAT or index.get("version") != INDEX_VERSION:
            raise CorruptDataError(
                f"{index_path} is not a version-{INDEX_VERSION} workspace index",
                detail=str(index_path),
            )

        for config in index.get("backends", {}).values():
            self._register_backend(config)
        # explicit configs at load time add backends missing from the index
        for config in backend_configs or []:
            if config.get("backend_id") not in self.backends:
                self._register_backend(config)
        for backend_id in self.backends:
            state_path = self.data_dir / "backends" / f"{backend_id}.bin"
            if state_path.exists():
                try:
                    self.backends[backend_id].load_state_bytes(state_path.read_bytes())
                except Exception as exc:
                    raise CorruptDataError(
                        f"cannot load model state {state_path}: {exc}",
                        detail=str(state_path),
                    ) from exc

        for tree_id in index.get("trees", []):
            path = self._tree_path(tree_id)
            try:
                self.trees[tree_id] = deserialize(path.read_bytes())
            except (OSError, BeamTreeError) as exc:
                raise CorruptDataError(
                    f"cannot load tree file {path}: {exc}", detail=str(path)
                ) from exc

        for name in index.get("wordlists", []):
            path = self.data_dir / "wordlists" / f"{name}.txt"
            try:
                self.wordlists[name] = parse_wordlist(name, path.read_text("utf-8"))
            except (OSError, BeamTreeError) as exc:
                raise CorruptDataError(
                    f"cannot load wordlist {path}: {exc}", detail=str(path)
                ) from exc

        self._snapshots = dict(index.get("snapshots", {}))
        self._snapshot_counter = int(index.get("snapshot_counter", 0))
        for snapshot_id in self._snapshots:
            if not self._snapshot_path(snapshot_id).exists():
                raise CorruptDataError(
                    f"missing snapshot blob {self._snapshot_path(snapshot_id)}",
                    detail=str(self._snapshot_path(snapshot_id)),
                )

        self._load_fixtures()

    def _load_fixtures(self) -> None:
        fixtures = self.data_dir / "fixtures"
        loaders = [
            ("semnet.jsonl", load_network, "network"),
            ("anchors.txt", load_anchors, "anchors"),
            ("colormap.txt", load_colormap, "colormap"),
        ]
        for file_name, loader, attr in loaders:
            path = fixtures / file_name
            try:
                setattr(self, attr, loader(path.read_text("utf-8")))
            except (OSError, BeamTreeError) as exc:
                raise CorruptDataError(
                    f"cannot load fixture {path}: {exc}", detail=str(path)
                ) from exc

    # --- persistence ---

    def _tree_path(self, tree_id: str) -> Path:
        return self.data_dir / "trees" / f"{tree_id}.json"

    def _snapshot_path(self, snapshot_id: str) -> Path:
        return self.data_dir / "snapshots" / f"{snapshot_id}.bin"

    def _write_index(self) -> None:
        with self._index_guard:
            payload = {
                "format": INDEX_FORMAT,
                "version": INDEX_VERSION,
                "backends": {
                    bid: self._backend_configs[bid] for bid in sorted(self._backend_configs)
                },
                "trees": sorted(self.trees),
                "wordlists": sorted(self.wordlists),
                "snapshots": {
                    sid: self._snapshots[sid] for sid in sorted(self._snapshots)
                },
                "snapshot_counter": self._snapshot_counter,
            }
            blob = (json.dumps(payload, separators=(",", ":"), sort_keys=True) + "\n").encode()
            _atomic_write(self.data_dir / "index.json", blob)

    def _write_wordlist(self, name: str, wl: WordList) -> None:
        body = "".join(w + "\n" for w in sorted(wl.words))
        _atomic_write(self.data_dir / "wordlists" / f"{name}.txt", body.encode())

    def save_tree(self, tree_id: str) -> None:
        """Persist the in-memory tree body (the index already lists it)."""
        _atomic_write(self._tree_path(tree_id), serialize(self.get_tree(tree_id)))

    def _persist_backend_state(self, backend_id: str) -> None:
        blob = self.backends[backend_id].state_bytes()
        _atomic_write(self.data_dir / "backends" / f"{backend_id}.bin", blob)

    # --- tree registry ---

    def tree_ids(self) -> list[str]:
        return sorted(self.trees)

    def get_tree(self, tree_id: str) -> BeamTree:
        tree = self.trees.get(tree_id)
        if tree is None:
            raise NotFoundError(f"no tree {tree_id!r}")
        return tree

    def tree_bytes(self, tree_id: str) -> bytes:
        return serialize(self.get_tree(tree_id))

    def tree_lock(self, tree_id: str):
        return self._tree_locks.get(tree_id)

    def _admit_tree(self, tree: BeamTree, overwrite: bool = False) -> BeamTree:
        _check_id("tree", tree.tree_id)
        if not overwrite and tree.tree_id in self.trees:
            raise ConflictError(f"tree {tree.tree_id!r} already exists")
        self.trees[tree.tree_id] = tree
        _atomic_write(self._tree_path(tree.tree_id), serialize(tree))
        self._write_index()
        return tree

    def create_tree(
        self,
        prompt: str,
        backend_id: str | None = None,
        tree_id: str | None = None,
    ) -> BeamTree:
        backend = self.get_backend(backend_id or self.default_backend_id())
        with self._backend_locks.get(backend.describe().backend_id).read():
            tree = make_tree(prompt, backend, tree_id=tree_id)
        return self._admit_tree(tree)

    def import_tree(self, blob: bytes) -> BeamTree:
        tree = deserialize(blob)
        return self._admit_tree(tree)

    def delete_tree(self, tree_id: str) -> None:
        self.get_tree(tree_id)
        with self.tree_lock(tree_id):
            del self.trees[tree_id]
            self._write_index()
            try:
                self._tree_path(tree_id).unlink()
            except FileNotFoundError:
                pass
        self._tree_locks.drop(tree_id)

    # --- backend registry ---

    def backend_ids(self) -> list[str]:
        return sorted(self.backends)

    def default_backend_id(self) -> str:
        if not self.backends:
            raise NotFoundError("no backends registered")
        return min(self.backends)

    def get_backend(self, backend_id: str) -> Backend:
        backend = self.backends.get(backend_id)
        if backend is None:
            raise NotFoundError(f"no backend {backend_id!r}")
        return backend

    def delete_backend(self, backend_id: str) -> None:
        self.get_backend(backend_id)
        holders = sorted(
            t.tree_id for t in self.trees.values() if t.backend_id == backend_id
        )
        if holders:
            raise ConflictError(
                f"backend {backend_id!r} is used by trees {holders}", detail=holders
            )
        with self._backend_locks.get(backend_id).write():
            del self.backends[backend_id]
            del self._backend_configs[backend_id]
            self._write_index()
            try:
                (self.data_dir / "backends" / f"{backend_id}.bin").unlink()
            except FileNotFoundError:
                pass
        self._backend_locks.drop(backend_id)

    def _tree_backend(self, tree: BeamTree) -> Backend:
        if tree.backend_id is None:
            return self.get_backend(self.default_backend_id())
        return self.get_backend(tree.backend_id)

    # --- decoding and node operations ---

    def predict(
        self, tree_id: str, node_id: int | None, params: PredictionParams
    ) -> list[int]:
        tree = self.get_tree(tree_id)
        backend = self._tree_backend(tree)
        bid = backend.describe().backend_id
        with self.tree_lock(tree_id), self._backend_locks.get(bid).read():
            created = beam_step(
                tree, tree.head if node_id is None else node_id, params, backend
            )
            detect_loops(tree)
            self.save_tree(tree_id)
        return created

    def edit(self, tree_id: str, node_id: int, text: str) -> None:
        tree = self.get_tree(tree_id)
        backend = self._tree_backend(tree)
        with self.tree_lock(tree_id):
            edit_node(tree, node_id, text, backend)
            detect_loops(tree)
            self.save_tree(tree_id)

    def remove(self, tree_id: str, node_id: int) -> None:
        tree = self.get_tree(tree_id)
        with self.tree_lock(tree_id):
            remove_subtree(tree, node_id)
            detect_loops(tree)
            self.save_tree(tree_id)

    def set_start(self, tree_id: str, node_id: int | None) -> None:
        tree = self.get_tree(tree_id)
        with self.tree_lock(tree_id):
            set_start_node(tree, node_id)
            self.save_tree(tree_id)

    def set_end(self, tree_id: str, node_id: int | None) -> None:
        tree = self.get_tree(tree_id)
        with self.tree_lock(tree_id):
            set_end_node(tree, node_id)
            self.save_tree(tree_id)

    def text(self, tree_id: str, node_id: int | None = None) -> str:
        tree = self.get_tree(tree_id)
        return sequence_text(tree, tree.head if node_id is None else node_id)

    # --- annotation and ontology ---

    def annotate(self, tree_id: str) -> list[tuple[int, str]]:
        tree = self.get_tree(tree_id)
        backend = self._tree_backend(tree)
        bid = backend.describe().backend_id
        with self.tree_lock(tree_id), self._backend_locks.get(bid).read():
            warnings = annotate_tree(
                tree,
                backend=backend,
                anchors=self.anchors,
                colormap=self.colormap,
                provider=self.sentiment,
            )
            self.save_tree(tree_id)
        return warnings

    def ontology_payload(self, tree_id: str) -> dict:
        tree = self.get_tree(tree_id)
        if all(n.annotations is None for n in tree.nodes.values()):
            raise ConflictError(
                f"tree {tree_id!r} has no annotations; run annotate first"
            )
        graph = graph_for_tree(tree, self.network)
        hierarchy = layered(graph)
        payload = hierarchy.to_payload()
        instances = {}
        for node in graph.nodes.values():
            if node.instance is not None:
                instances[node.node_id] = {
                    "tree_node_id": node.instance.tree_node_id,
                    "surface": node.instance.surface,
                }
        payload["instances"] = instances
        payload["unattached"] = [
            {
                "tree_node_id": inst.tree_node_id,
                "surface": inst.surface,
                "reason": reason,
            }
            for inst, reason in graph.unattached
        ]
        return payload

    def suggestions_payload(
        self,
        tree_id: str,
        node_id: int,
        extra_domains: Sequence[str] | None = None,
        surface: str | None = None,
    ) -> dict:
        tree = self.get_tree(tree_id)
        backend = self._tree_backend(tree)
        bid = backend.describe().backend_id
        with self._backend_locks.get(bid).read():
            result = suggest_replacements(
                tree,
                node_id,
                extra_domains=extra_domains,
                backend=backend,
                network=self.network,
                config=self.masked_config,
                surface=surface,
            )
        return result.to_payload()

    # --- comparative and analysis ---

    def comparative(self, spec: ComparativeSpec) -> list[BeamTree]:
        backend = self.get_backend(self.default_backend_id())
        bid = backend.describe().backend_id
        with self._backend_locks.get(bid).read():
            trees = instantiate_comparative(spec, backend)
        for tree in trees:
            detect_loops(tree)
        # rerunning a spec reproduces identical ids and bodies: upsert
        return [self._admit_tree(tree, overwrite=True) for tree in trees]

    def _resolve_lists(self, list_names: Sequence[str]) -> list[WordList]:
        out = []
        for name in list_names:
            wl = self.wordlists.get(name)
            if wl is None:
                raise NotFoundError(f"no wordlist {name!r}")
            out.append(wl)
        return out

    def badges_payload(
        self, tree_ids: Sequence[str], list_names: Sequence[str]
    ) -> dict:
        trees = [self.get_tree(tid) for tid in tree_ids]
        lists = self._resolve_lists(list_names)
        badges = match_wordlists(trees, lists)
        return {
            tree_id: {
                str(node_id): matches for node_id, matches in per_tree.items()
            }
            for tree_id, per_tree in badges.items()
        }

    def upset_payload(
        self, tree_ids: Sequence[str], list_names: Sequence[str]
    ) -> dict:
        trees = [self.get_tree(tid) for tid in tree_ids]
        lists = self._resolve_lists(list_names)
        result = upset(trees, lists)
        return result.to_payload()

    # --- wordlists ---

    def wordlist_names(self) -> list[str]:
        return sorted(self.wordlists)

    def get_wordlist(self, name: str) -> WordList:
        wl = self.wordlists.get(name)
        if wl is None:
            raise NotFoundError(f"no wordlist {name!r}")
        return wl

    def put_wordlist(self, name: str, words: Sequence[str]) -> WordList:
        _check_id("wordlist", name)
        wl = WordList(name=name, words=frozenset(w.casefold() for w in words if w.strip()))
        self.wordlists[name] = wl
        self._write_wordlist(name, wl)
        self._write_index()
        return wl

    def delete_wordlist(self, name: str) -> None:
        self.get_wordlist(name)
        del self.wordlists[name]
        self._write_index()
        try:
            (self.data_dir / "wordlists" / f"{name}.txt").unlink()
        except FileNotFoundError:
            pass

    # --- model adaptation and snapshots ---

    def fine_tune_to_node(
        self,
        backend_id: str,
        tree_id: str,
        node_id: int,
        config: FineTuneConfig | None = None,
    ) -> list[float]:
        backend = self.get_backend(backend_id)
        tree = self.get_tree(tree_id)
        tokens = tree.path_tokens(node_id)
        if len(tokens) < 2:
            raise InvalidParameterError(
                "fine-tune target must span at least two tokens"
            )
        with self._backend_locks.get(backend_id).write():
            losses = backend.fine_tune(tokens, config or FineTuneConfig())
            self._persist_backend_state(backend_id)
        return losses

    def create_snapshot(self, backend_id: str, label: str = "") -> dict:
        backend = self.get_backend(backend_id)
        with self._backend_locks.get(backend_id).read():
            blob = backend.state_bytes()
        self._snapshot_counter += 1
        snapshot_id = f"snap-{self._snapshot_counter:06d}"
        meta = {
            "snapshot_id": snapshot_id,
            "backend_id": backend_id,
            "created_at": _now(),
            "label": label,
        }
        _atomic_write(self._snapshot_path(snapshot_id), blob)
        self._snapshots[snapshot_id] = meta
        self._write_index()
        return dict(meta)

    def snapshots(self) -> list[dict]:
        return [dict(self._snapshots[sid]) for sid in sorted(self._snapshots)]

    def restore_snapshot(self, snapshot_id: str) -> dict:
        meta = self._snapshots.get(snapshot_id)
        if meta is None:
            raise NotFoundError(f"no snapshot {snapshot_id!r}")
        backend_id = meta["backend_id"]
        backend = self.get_backend(backend_id)
        blob = self._snapshot_path(snapshot_id).read_bytes()
        with self._backend_locks.get(backend_id).write():
            backend.load_state_bytes(blob)
            self._persist_backend_state(backend_id)
        return dict(meta)

    def backend_lock(self, backend_id: str) -> ReadWriteLock:
        return self._backend_locks.get(backend_id)
