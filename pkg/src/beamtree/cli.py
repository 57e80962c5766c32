"""Command-line surface: serve, predict, annotate, compare, report, export.

Failures print the {code, message, detail} envelope as JSON on stderr and
exit nonzero; the code maps to the exit status the same way it maps to
HTTP statuses:

    0  success
    1  internal error
    2  invalid input (bad flags, malformed files, bad parameters)
    3  missing resource (tree, node, wordlist, snapshot)
    4  conflict (duplicate ids, locked workspace, port in use)
    5  backend unavailable

Offline commands (everything but serve) need no data directory; they read
and write canonical tree files directly, and at temperature 0 their output
bytes are identical across runs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .analysis import (
    bundled_wordlist,
    global_adaptation_report,
    load_wordlist,
    local_adaptation_report,
    match_wordlists,
    report_to_json,
    upset,
    upset_to_csv,
)
from .backends import Backend, FineTuneConfig, build_backend
from .decode import ComparativeSpec, PredictionParams, beam_step, instantiate_comparative
from .demo import (
    DEMO_BACKEND_ID,
    DEMO_TRAINABLE_ID,
    demo_anchors,
    demo_backend,
    demo_colormap,
    demo_corpus_text,
    demo_trainable_backend,
)
from .errors import BeamTreeError, InvalidParameterError
from .semantics import LexiconSentimentProvider, annotate_tree
from .tree import create_tree, deserialize, detect_loops, sequence_text, serialize

# error code -> HTTP-equivalent status -> exit code
_EXIT_BY_STATUS = {400: 2, 404: 3, 409: 4, 423: 4, 502: 5, 500: 1}
_STATUS_HINTS = {
    "not-found": 404,
    "unknown-node": 404,
    "unknown-snapshot": 404,
    "keyword-not-found": 404,
    "conflict": 409,
    "workspace-locked": 423,
    "corrupt-data": 409,
    "backend-unavailable": 502,
    "internal-error": 500,
}


def exit_code_for(exc: BeamTreeError) -> int:
    return _EXIT_BY_STATUS[_STATUS_HINTS.get(exc.code, 400)]


def _print_error(exc: BeamTreeError) -> None:
    detail = exc.detail
    if detail is not None and not isinstance(detail, (str, int, float, bool, list, dict)):
        detail = repr(detail)
    envelope = {"code": exc.code, "message": exc.message, "detail": detail}
    print(json.dumps(envelope, separators=(",", ":")), file=sys.stderr)


def _write_bytes(out: str, blob: bytes) -> None:
    if out == "-":
        sys.stdout.buffer.write(blob)
        sys.stdout.buffer.flush()
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_bytes(blob)


def _write_text(out: str, text: str) -> None:
    _write_bytes(out, text.encode())


def _resolve_backend(args: argparse.Namespace) -> Backend:
    config_path = getattr(args, "backend_config", None) or os.environ.get(
        "BEAMTREE_BACKEND_CONFIG"
    )
    if config_path:
        try:
            config = json.loads(Path(config_path).read_text("utf-8"))
        except (OSError, ValueError) as exc:
            raise InvalidParameterError(
                f"cannot read backend config {config_path}: {exc}"
            ) from exc
        return build_backend(config)
    name = getattr(args, "backend", DEMO_BACKEND_ID)
    if name == DEMO_BACKEND_ID:
        return demo_backend()
    if name == DEMO_TRAINABLE_ID:
        return demo_trainable_backend()
    raise InvalidParameterError(
        f"unknown backend {name!r}; use {DEMO_BACKEND_ID}, {DEMO_TRAINABLE_ID}, "
        "or --backend-config"
    )


def _params_from(args: argparse.Namespace) -> PredictionParams:
    return PredictionParams(
        top_k=args.top_k,
        next_n=args.next_n,
        temperature=args.temperature,
        top_p=args.top_p,
        no_repeat_ngram=args.no_repeat_ngram,
        seed=args.seed,
    )


def _add_param_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--top-k", type=int, default=3, help="beam width (default 3)")
    parser.add_argument(
        "--next-n", type=int, default=1, help="expansion iterations (default 1)"
    )
    parser.add_argument(
        "--temperature",
        type=float,
        default=0.0,
        help="0 = deterministic top-k; >0 samples from the nucleus (default 0)",
    )
    parser.add_argument(
        "--top-p", type=float, default=0.9, help="nucleus mass (default 0.9)"
    )
    parser.add_argument(
        "--no-repeat-ngram",
        type=int,
        default=None,
        help="block candidates completing a repeated n-gram of this size",
    )
    parser.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")


def _add_backend_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--backend",
        default=DEMO_BACKEND_ID,
        help=f"built-in backend id (default {DEMO_BACKEND_ID})",
    )
    parser.add_argument(
        "--backend-config",
        default=None,
        help="JSON file describing the backend (overrides --backend; "
        "env BEAMTREE_BACKEND_CONFIG)",
    )


def _load_tree_file(path: str):
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise InvalidParameterError(f"cannot read tree file {path}: {exc}") from exc
    return deserialize(blob)


# --- subcommands ---


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import ServiceConfig, serve

    configs = ()
    if args.backend_config:
        config = json.loads(Path(args.backend_config).read_text("utf-8"))
        configs = tuple(config) if isinstance(config, list) else (config,)
    serve(
        ServiceConfig(
            data_dir=args.data_dir,
            host=args.host,
            port=args.port,
            backend_configs=configs,
            read_only=args.read_only,
        )
    )
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    backend = _resolve_backend(args)
    params = _params_from(args)
    tree = create_tree(args.prompt, backend, tree_id=args.tree_id)
    beam_step(tree, tree.root, params, backend)
    detect_loops(tree)
    _write_bytes(args.out, serialize(tree))
    return 0


def cmd_annotate(args: argparse.Namespace) -> int:
    backend = _resolve_backend(args)
    tree = _load_tree_file(args.tree)
    warnings = annotate_tree(
        tree,
        backend=backend,
        anchors=demo_anchors(),
        colormap=demo_colormap(),
        provider=LexiconSentimentProvider.bundled(),
    )
    _write_bytes(args.out or args.tree, serialize(tree))
    summary = {
        "tree_id": tree.tree_id,
        "nodes": len(tree.nodes),
        "warnings": [{"node_id": nid, "code": code} for nid, code in warnings],
    }
    print(json.dumps(summary, separators=(",", ":")))
    return 0


def _resolve_wordlists(names: list[str]):
    lists = []
    for name in names:
        if name.endswith(".txt") or "/" in name:
            lists.append(load_wordlist(name))
        else:
            lists.append(bundled_wordlist(name))
    return lists


def cmd_compare(args: argparse.Namespace) -> int:
    backend = _resolve_backend(args)
    spec = ComparativeSpec(
        template=args.template,
        replacements=tuple(args.replacements),
        params=_params_from(args),
    )
    trees = instantiate_comparative(spec, backend)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for tree in trees:
        detect_loops(tree)
        (out_dir / f"{tree.tree_id}.json").write_bytes(serialize(tree))

    manifest = {
        "template": args.template,
        "replacements": list(args.replacements),
        "tree_ids": [t.tree_id for t in trees],
    }
    if args.lists:
        lists = _resolve_wordlists(args.lists)
        badges = match_wordlists(trees, lists)
        result = upset(trees, lists, badges)
        report = report_to_json("upset", result.to_payload())
        _write_text(str(out_dir / "upset.json"), report)
        if args.csv:
            _write_text(str(out_dir / "upset.csv"), upset_to_csv(result))
        manifest["upset_columns"] = len(result.columns)
    print(json.dumps(manifest, separators=(",", ":")))
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    backend = _resolve_backend(args)
    config = FineTuneConfig(learning_rate=args.learning_rate, steps=1)
    if args.mode == "local":
        tokens = backend.tokenize(args.sequence)
        if len(tokens) < 2:
            raise InvalidParameterError("sequence must have at least 2 tokens")
        report = local_adaptation_report(
            backend, tokens, tokens[-1], args.steps, config
        )
        payload = report_to_json("local-adaptation", report.to_payload())
    else:
        if args.corpus:
            text = Path(args.corpus).read_text("utf-8")
        else:
            text = demo_corpus_text()
        samples = [line for line in text.splitlines() if line.strip()]
        schedule = [int(x) for x in args.schedule.split(",") if x != ""]
        curve = global_adaptation_report(
            backend, samples, args.split_ratio, schedule, config
        )
        payload = report_to_json("global-adaptation", curve.to_payload())
    _write_text(args.out, payload)
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    tree = _load_tree_file(args.tree)
    if args.format == "json":
        _write_bytes(args.out, serialize(tree))
    elif args.format == "text":
        node = tree.end_override if tree.end_override is not None else tree.head
        _write_text(args.out, sequence_text(tree, node) + "\n")
    else:  # nodes-csv
        import csv
        import io

        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["node_id", "parent", "depth", "cond_prob", "cum_logprob", "text"])
        for nid in sorted(tree.nodes):
            n = tree.nodes[nid]
            writer.writerow(
                [n.node_id, "" if n.parent is None else n.parent, n.depth,
                 repr(n.cond_prob), repr(n.cum_logprob), n.text]
            )
        _write_text(args.out, buf.getvalue())
    return 0


# --- argument parsing ---


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamtree",
        description="Interactive beam-search-tree engine over pluggable language models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP service on a data directory")
    p.add_argument(
        "--data-dir",
        default=os.environ.get("BEAMTREE_DATA_DIR", "./beamtree-data"),
        help="workspace directory (env BEAMTREE_DATA_DIR)",
    )
    p.add_argument("--host", default=os.environ.get("BEAMTREE_HOST", "127.0.0.1"))
    p.add_argument(
        "--port", type=int, default=int(os.environ.get("BEAMTREE_PORT", "8765"))
    )
    p.add_argument("--read-only", action="store_true", help="disable mutation endpoints")
    p.add_argument("--backend-config", default=None, help="JSON backend config (or list)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("predict", help="expand a prompt into a canonical tree file")
    p.add_argument("--prompt", required=True)
    p.add_argument("--out", required=True, help="output tree file ('-' for stdout)")
    p.add_argument("--tree-id", default=None)
    _add_param_flags(p)
    _add_backend_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("annotate", help="fill keyword/sentiment annotations in a tree file")
    p.add_argument("--tree", required=True, help="tree file to annotate")
    p.add_argument("--out", default=None, help="output path (default: in place)")
    _add_backend_flags(p)
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser(
        "compare", help="instantiate a placeholder template into comparable trees"
    )
    p.add_argument("--template", required=True, help="prompt containing <PH>")
    p.add_argument("--replacements", nargs="+", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument(
        "--lists",
        nargs="*",
        default=[],
        help="wordlists for the intersection report (bundled names or .txt paths)",
    )
    p.add_argument("--csv", action="store_true", help="also write upset.csv")
    _add_param_flags(p)
    _add_backend_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="adaptation reports on a trainable backend")
    p.add_argument("mode", choices=["local", "global"])
    p.add_argument("--out", required=True, help="output JSON path ('-' for stdout)")
    p.add_argument("--sequence", default=None, help="local: text whose final token is the target")
    p.add_argument("--steps", type=int, default=2, help="local: fine-tune steps (default 2)")
    p.add_argument("--corpus", default=None, help="global: sample file, one per line (default: bundled)")
    p.add_argument("--split-ratio", type=float, default=0.75)
    p.add_argument("--schedule", default="0,2,6", help="global: comma-separated train sizes")
    p.add_argument("--learning-rate", type=float, default=2.0)
    p.add_argument(
        "--backend",
        default=DEMO_TRAINABLE_ID,
        help=f"built-in backend id (default {DEMO_TRAINABLE_ID})",
    )
    p.add_argument("--backend-config", default=None)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("export", help="convert a tree file to json, text, or nodes-csv")
    p.add_argument("--tree", required=True)
    p.add_argument("--out", required=True, help="output path ('-' for stdout)")
    p.add_argument("--format", choices=["json", "text", "nodes-csv"], default="json")
    p.set_defaults(func=cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "report" and args.mode == "local" and not args.sequence:
        parser.error("report local requires --sequence")
    try:
        return args.func(args)
    except BeamTreeError as exc:
        _print_error(exc)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
