"""Command line interface: every pipeline stage as a subcommand with uniform I/O.

Conventions: primary output goes only to the --out target ("-" for stdout);
diagnostics and errors go to stderr as one JSON object per line; files are
written to a temp name and renamed so failures never leave partial output.
Exit codes: 0 success, 1 usage error, 2 input-validation error, 3 internal.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
import tempfile
from pathlib import Path

from . import graph as graph_mod
from .diagnostics import Diagnostic
from .embed import TableProvider, default_onehot_provider, embed, export_bundle, import_bundle
from .errors import ClevrGraphError
from .grounding import ground_result
from .projection import PooledVector, kmeans, pca2, pool, scatter_svg, to_csv, tsne2
from .scene import check_scene_consistency, load_scenes, parse_scene
from .text import analyze_text
from .viz import render_svg, to_dot

_INPUT_ERRORS = (ClevrGraphError, FileNotFoundError, IsADirectoryError, PermissionError)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _emit(diagnostic: Diagnostic) -> None:
    print(diagnostic.to_json(), file=sys.stderr)


def _emit_error(category: str, message: str) -> None:
    print(json.dumps({"kind": "error", "category": category, "message": message},
                     sort_keys=True), file=sys.stderr)


def _write_bytes(out: str, data: bytes) -> None:
    if out == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
        return
    target = Path(out)
    fd, tmp = tempfile.mkstemp(prefix=target.name + ".", dir=target.parent or Path("."))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_bytes(path: str) -> bytes:
    return Path(path).read_bytes()


def _load_graph(path: str):
    return graph_mod.deserialize(_read_bytes(path))


def _make_provider(spec: str):
    if spec == "onehot":
        return default_onehot_provider()
    if spec.startswith("table:"):
        return TableProvider(spec[len("table:"):])
    raise _UsageError(f"unknown provider {spec!r} (use onehot or table:<vectors-path>)")


def _load_questions(path: str) -> list[tuple[str, int | None]]:
    """CLEVR questions JSON (questions[] with question strings) or one question
    per plain-text line. Returns (text, image_index-or-None) pairs."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ClevrGraphError(f"questions file is not valid JSON: {exc}") from exc
        items = doc.get("questions")
        if not isinstance(items, list):
            raise ClevrGraphError("questions file must contain a questions[] array")
        out = []
        for i, item in enumerate(items):
            if not isinstance(item, dict) or not isinstance(item.get("question"), str):
                raise ClevrGraphError(f"questions[{i}] must carry a question string")
            image_index = item.get("image_index")
            if image_index is not None and not isinstance(image_index, int):
                raise ClevrGraphError(f"questions[{i}]: image_index must be an integer")
            out.append((item["question"], image_index))
        return out
    return [(line, None) for line in text.splitlines() if line.strip()]


def _run_jobs(items, worker, jobs: int):
    """Apply worker to items, optionally in a thread pool; results in input order."""
    if jobs <= 1:
        return [worker(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool_:
        return list(pool_.map(worker, items))


# ------------------------------------------------------------------ subcommands


def _cmd_parse_text(ns) -> int:
    if ns.question is not None:
        parse = analyze_text(ns.question)
        for diag in parse.diagnostics:
            _emit(diag)
        _write_bytes(ns.out, graph_mod.serialize(parse.graph))
        return 0
    questions = _load_questions(ns.questions_file)
    out_dir = Path(ns.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def worker(item):
        index, (text, _) = item
        parse = analyze_text(text)
        return index, graph_mod.serialize(parse.graph), parse.diagnostics

    results = _run_jobs(list(enumerate(questions)), worker, ns.jobs)
    for index, payload, diagnostics in results:
        for diag in diagnostics:
            _emit(Diagnostic(diag.kind, diag.message, {**diag.context, "item": index}))
        _write_bytes(str(out_dir / f"q{index:05d}.json"), payload)
    return 0


def _cmd_parse_scene(ns) -> int:
    scenes = load_scenes(_read_bytes(ns.scenes))
    if not 0 <= ns.index < len(scenes):
        raise ClevrGraphError(f"scene index {ns.index} out of range (file has {len(scenes)})")
    scene = scenes[ns.index]
    for diag in check_scene_consistency(scene):
        _emit(diag)
    _write_bytes(ns.out, graph_mod.serialize(parse_scene(scene, prune=ns.prune)))
    return 0


def _cmd_ground(ns) -> int:
    result = ground_result(_load_graph(ns.text_graph), _load_graph(ns.scene_graph))
    for diag in result.diagnostics:
        _emit(diag)
    _write_bytes(ns.out, graph_mod.serialize(result.graph))
    return 0


def _cmd_embed(ns) -> int:
    bundle = embed(_load_graph(ns.graph), _make_provider(ns.provider), directed=ns.directed)
    _write_bytes(ns.out, export_bundle(bundle, ns.format))
    return 0


def _cmd_viz(ns) -> int:
    dot = to_dot(_load_graph(ns.graph), style=ns.style)
    if ns.format == "svg":
        svg, diagnostics = render_svg(dot)
        for diag in diagnostics:
            _emit(diag)
        _write_bytes(ns.out, (svg if svg is not None else dot).encode("utf-8"))
        return 0
    _write_bytes(ns.out, dot.encode("utf-8"))
    return 0


def _iter_bundle_files(root: Path):
    if not root.is_dir():
        raise ClevrGraphError(f"--bundles must name a directory, got {root}")
    files = [p for p in sorted(root.rglob("*")) if p.is_file()]
    if not files:
        raise ClevrGraphError(f"no bundle files under {root}")
    return files


def _cmd_project(ns) -> int:
    root = Path(ns.bundles)
    pooled = []
    for path in _iter_bundle_files(root):
        rel = path.relative_to(root)
        bundle = import_bundle(path.read_bytes())
        group = rel.parts[0] if len(rel.parts) > 1 else None
        pooled.append(
            PooledVector(id=rel.with_suffix("").as_posix(), group=group,
                         v=pool(bundle, ns.pool))
        )
    if ns.method == "pca":
        result = pca2(pooled)
    else:
        result = tsne2(pooled, perplexity=ns.perplexity, iters=ns.iters, seed=ns.seed)
    if ns.clusters is not None:
        km = kmeans(result, ns.clusters, seed=ns.seed)
        result.cluster = [int(v) for v in km.labels]
    _write_bytes(ns.out, to_csv(result).encode("utf-8"))
    if ns.svg is not None:
        _write_bytes(ns.svg, scatter_svg(result).encode("utf-8"))
    return 0


def _cmd_pipeline(ns) -> int:
    questions = _load_questions(ns.questions)
    scenes = load_scenes(_read_bytes(ns.scenes))
    if not scenes:
        raise ClevrGraphError("pipeline needs at least one scene")
    by_image_index = {scene.image_index: scene for scene in scenes}
    provider = _make_provider(ns.provider)
    out_dir = Path(ns.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    extension = "json" if ns.format == "json" else "bin"

    def worker(item):
        index, (text, image_index) = item
        if image_index is None:
            scene = scenes[index % len(scenes)]
        elif image_index in by_image_index:
            scene = by_image_index[image_index]
        else:
            raise ClevrGraphError(f"question {index}: no scene with image_index {image_index}")
        parse = analyze_text(text)
        gt = parse_scene(scene, prune=ns.prune)
        grounded = ground_result(parse.graph, gt)
        bundle = embed(grounded.graph, provider, directed=ns.directed)
        files = {f"{index:05d}.{extension}": export_bundle(bundle, ns.format)}
        if ns.keep_graphs:
            files[f"{index:05d}.graph.json"] = graph_mod.serialize(grounded.graph)
        return index, files, parse.diagnostics + grounded.diagnostics

    results = _run_jobs(list(enumerate(questions)), worker, ns.jobs)
    for index, files, diagnostics in results:
        for diag in diagnostics:
            _emit(Diagnostic(diag.kind, diag.message, {**diag.context, "item": index}))
        for name, payload in files.items():
            _write_bytes(str(out_dir / name), payload)
    return 0


# ------------------------------------------------------------------- wiring


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="key=value file supplying defaults for this command's flags")

    parser = _Parser(prog="clevrgraph",
                     description="CLEVR structural graphs, feature bundles, and visualizations")
    subs = parser.add_subparsers(dest="command", metavar="<command>")
    parsers = {}

    p = subs.add_parser("parse-text", parents=[common],
                        help="question/caption text -> G_s graph JSON")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--question", help="a single sentence to parse")
    src.add_argument("--questions-file",
                     help="CLEVR questions JSON or one-question-per-line text file")
    p.add_argument("--out", required=True,
                   help="output file ('-' for stdout), or directory in batch mode")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers in batch mode")
    p.set_defaults(func=_cmd_parse_text)
    parsers["parse-text"] = p

    p = subs.add_parser("parse-scene", parents=[common],
                        help="CLEVR scenes JSON -> G_t graph JSON")
    p.add_argument("--scenes", required=True, help="CLEVR scenes JSON file")
    p.add_argument("--index", type=int, default=0, help="scene position in the file")
    p.add_argument("--prune", action="store_true",
                   help="keep only left/front spatial edges, transitively reduced")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_parse_scene)
    parsers["parse-scene"] = p

    p = subs.add_parser("ground", parents=[common],
                        help="G_s + G_t -> joint bipartite G_u graph JSON")
    p.add_argument("--text-graph", required=True)
    p.add_argument("--scene-graph", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ground)
    parsers["ground"] = p

    p = subs.add_parser("embed", parents=[common],
                        help="graph JSON -> (X, A, E) feature bundle")
    p.add_argument("--graph", required=True)
    p.add_argument("--provider", default="onehot", help="onehot or table:<vectors-path>")
    p.add_argument("--format", choices=("json", "bin"), default="json")
    p.add_argument("--directed", action="store_true",
                   help="keep A asymmetric instead of symmetrizing")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_embed)
    parsers["embed"] = p

    p = subs.add_parser("viz", parents=[common], help="graph JSON -> DOT (or SVG)")
    p.add_argument("--graph", required=True)
    p.add_argument("--style", choices=("legend", "plain"), default="legend")
    p.add_argument("--format", choices=("dot", "svg"), default="dot")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_viz)
    parsers["viz"] = p

    p = subs.add_parser("project", parents=[common],
                        help="bundle directory -> 2-D scatter CSV (and optional SVG)")
    p.add_argument("--bundles", required=True, help="directory of exported bundles")
    p.add_argument("--pool", choices=("mean", "sum"), default="mean")
    p.add_argument("--method", choices=("pca", "tsne"), default="tsne")
    p.add_argument("--perplexity", type=float, default=None,
                   help="t-SNE perplexity (default 30, clamped to (n-1)/3)")
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clusters", type=int, default=None, help="k for k-means on the projection")
    p.add_argument("--out", required=True, help="CSV output: id, group, x, y, cluster")
    p.add_argument("--svg", default=None, help="also draw a standalone SVG scatter here")
    p.set_defaults(func=_cmd_project)
    parsers["project"] = p

    p = subs.add_parser("pipeline", parents=[common],
                        help="questions + scenes -> grounded joint-graph bundles")
    p.add_argument("--questions", required=True)
    p.add_argument("--scenes", required=True)
    p.add_argument("--provider", default="onehot")
    p.add_argument("--format", choices=("json", "bin"), default="json")
    p.add_argument("--prune", action="store_true")
    p.add_argument("--directed", action="store_true")
    p.add_argument("--keep-graphs", action="store_true",
                   help="also write each joint graph next to its bundle")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_pipeline)
    parsers["pipeline"] = p

    return parser, parsers


def _read_config(path: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ClevrGraphError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


_TRUE_WORDS = ("1", "true", "yes", "on")


def _apply_config(subparser, config: dict[str, str]) -> None:
    """Config values become flag defaults; flags given on the command line win."""
    for action in subparser._actions:
        key = action.dest.replace("_", "-")
        if key not in config:
            continue
        raw = config[key]
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            value = raw.lower() in _TRUE_WORDS
        elif action.type is not None:
            try:
                value = action.type(raw)
            except ValueError as exc:
                raise _UsageError(f"config {key}: {exc}") from exc
        else:
            value = raw
        if action.choices is not None and value not in action.choices:
            raise _UsageError(f"config {key}: invalid choice {value!r}")
        action.default = value
        action.required = False


def _find_config(argv) -> str | None:
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if arg.startswith("--config="):
            return arg.split("=", 1)[1]
    return None


def dispatch(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser, parsers = _build_parser()
        config_path = _find_config(argv)
        if config_path is not None:
            config = _read_config(config_path)
            command = next((a for a in argv if a in parsers), None)
            if command is not None:
                _apply_config(parsers[command], config)
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise _UsageError("a subcommand is required")
        return ns.func(ns)
    except _UsageError as exc:
        _emit_error("usage", str(exc))
        print("usage: run `clevrgraph --help` for the command list", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        return 0 if exc.code in (0, None) else int(exc.code)
    except _INPUT_ERRORS as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        _emit_error("internal", f"{type(exc).__name__}: {exc}")
        return 3


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
