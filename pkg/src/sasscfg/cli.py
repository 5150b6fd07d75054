"""Command-line pipeline driver.

Loads a corpus manifest, runs the requested stage over every kernel, and
writes plot-ready artifacts with stable names into the output directory.
Exit codes: 0 success, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from .cfg import Cfg, build_cfg, export_dot, node_name
from .cluster import (
    FeatureVector,
    corpus_norms,
    cut_clusters,
    export_clusters_csv,
    export_dendrogram,
    export_linkage_csv,
    feature_vector,
    to_newick,
    ward_linkage,
)
from .corpus import Corpus, CorpusEntry, RunConfig, load_config_file, load_manifest, parse_j_classes
from .errors import CorpusError, SasscfgError
from .matrix import GLOBAL, ROW_STOCHASTIC, TransitionMatrix, export_text, transition_matrix
from .metrics import (
    MetricReport,
    efficiency,
    export_metrics_csv,
    export_scatter_csv,
    goodness,
    mix_error,
)
from .profile import AnnotatedCfg, KernelProfile, attribute_profile, dynamic_mix, parse_profiles
from .sass import Listing, MixVector, parse_listing, static_mix
from .similarity import MeasureId, export_heatmap_csv, measure_distance, minmax_scale, pairwise

_MODE_NAMES = {"row": ROW_STOCHASTIC, "global": GLOBAL}


@dataclass(frozen=True)
class LoadedKernel:
    entry: CorpusEntry
    listing: Listing
    cfg: Cfg
    acfg: AnnotatedCfg
    profile: KernelProfile | None
    mix: MixVector


def _load_kernel(entry: CorpusEntry) -> LoadedKernel:
    listing = parse_listing(entry.listing_path.read_text(), kernel_id=entry.kernel_id)
    cfg = build_cfg(listing, arch=entry.arch)
    profile = None
    if entry.profile_path is not None:
        profiles = parse_profiles(entry.profile_path.read_text())
        profile = profiles.get(entry.kernel_id)
        if profile is None:
            raise CorpusError(
                f"{entry.profile_path} has no profile for kernel {entry.kernel_id!r}"
            )
    return LoadedKernel(
        entry=entry,
        listing=listing,
        cfg=cfg,
        acfg=attribute_profile(cfg, profile),
        profile=profile,
        mix=static_mix(listing),
    )


def _load_corpus(corpus: Corpus) -> list[LoadedKernel]:
    kernels = [_load_kernel(entry) for entry in corpus.entries]
    return sorted(kernels, key=lambda k: k.entry.kernel_id)


def _selected_measures(config: RunConfig) -> list[MeasureId]:
    if config.measure == "all":
        return list(MeasureId)
    return [MeasureId(config.measure)]


def _matrices(kernels: list[LoadedKernel], config: RunConfig) -> list[TransitionMatrix]:
    mode = _MODE_NAMES[config.mode]
    return [transition_matrix(k.acfg, mode=mode) for k in kernels]


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text)
    return path


def _export_edges(k: LoadedKernel) -> str:
    cfg = k.cfg
    lines = []
    for edge in cfg.edges:
        count = k.acfg.edge_counts.get((edge.src, edge.dst))
        row = f"{node_name(cfg, edge.src)} {node_name(cfg, edge.dst)} {edge.kind}"
        if count is not None:
            row += f" {count:.6g}"
        lines.append(row)
    return "\n".join(lines) + "\n"


def cmd_parse(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    paths = list(args.paths)
    if not paths and args.manifest is not None:
        paths = [e.listing_path for e in load_manifest(args.manifest).entries]
    if not paths:
        parser.error("parse: no listing paths given (pass files or --manifest)")

    failures = 0
    for path in paths:
        try:
            listing = parse_listing(Path(path).read_text(), kernel_id=Path(path).stem)
        except (OSError, SasscfgError) as exc:
            print(f"FAIL {path}: {exc}")
            failures += 1
        else:
            n_labels = len(listing.label_offsets())
            print(f"OK {path}: {len(listing.instructions)} instructions, {n_labels} labels")
    return 1 if failures else 0


def cmd_cfg(args: argparse.Namespace, kernels: list[LoadedKernel], config: RunConfig) -> int:
    want_dot = args.dot or not args.edges
    want_edges = args.edges or not args.dot
    for k in kernels:
        if want_dot:
            _write(config.out, f"{k.entry.kernel_id}.dot", export_dot(k.acfg))
        if want_edges:
            _write(config.out, f"{k.entry.kernel_id}.edges", _export_edges(k))
        for warning in (*k.cfg.warnings, *k.acfg.warnings):
            print(f"warning: {k.entry.kernel_id}: {warning}", file=sys.stderr)
    return 0


def cmd_matrix(kernels: list[LoadedKernel], config: RunConfig) -> int:
    for k, matrix in zip(kernels, _matrices(kernels, config)):
        _write(config.out, f"{k.entry.kernel_id}.mat", export_text(matrix))
    return 0


def cmd_compare(kernels: list[LoadedKernel], config: RunConfig) -> int:
    if len(kernels) < 2:
        raise CorpusError("compare needs at least 2 kernels")
    matrices = _matrices(kernels, config)
    for measure in _selected_measures(config):
        pm = pairwise(
            matrices,
            measure,
            p=config.p,
            alpha=config.alpha,
            tol=config.tol,
            max_iter=config.max_iter,
        )
        _write(config.out, f"{measure.value}.csv", export_heatmap_csv(pm))
        _write(config.out, f"{measure.value}_scaled.csv", export_heatmap_csv(minmax_scale(pm)))
    return 0


def cmd_metrics(kernels: list[LoadedKernel], config: RunConfig) -> int:
    reports: list[MetricReport] = []
    scatter_rows: list[tuple[MetricReport, str, int]] = []
    for k in kernels:
        calls = k.profile.calls_n if k.profile is not None else 1
        eff = None
        if k.profile is not None and k.profile.time_exec_ns is not None:
            eff = efficiency(k.mix, k.profile.time_exec_ns, calls)
        dyn = dynamic_mix(k.acfg, k.profile)
        err = None if dyn is None else mix_error(k.mix, dyn)
        report = MetricReport(
            kernel_id=k.entry.kernel_id,
            goodness=goodness(k.mix, calls, config.j),
            efficiency=eff,
            mix_error=err,
            op_class_set_J=config.j,
        )
        reports.append(report)
        scatter_rows.append((report, k.entry.arch, k.mix.total()))
    _write(config.out, "metrics.csv", export_metrics_csv(reports))
    _write(config.out, "scatter.csv", export_scatter_csv(scatter_rows))
    return 0


def _feature_vectors(kernels: list[LoadedKernel], config: RunConfig) -> list[FeatureVector]:
    norms = corpus_norms(k.cfg for k in kernels)
    refs_by_id: dict[str, tuple[float, ...]] = {}
    if config.reference is not None:
        by_id = {k.entry.kernel_id: m for k, m in zip(kernels, _matrices(kernels, config))}
        if config.reference not in by_id:
            raise CorpusError(f"reference kernel {config.reference!r} not in corpus")
        ref_matrix = by_id[config.reference]
        for kernel_id, matrix in by_id.items():
            refs_by_id[kernel_id] = tuple(
                measure_distance(
                    matrix,
                    ref_matrix,
                    measure,
                    p=config.p,
                    alpha=config.alpha,
                    tol=config.tol,
                    max_iter=config.max_iter,
                )
                for measure in _selected_measures(config)
            )
    return [
        feature_vector(k.acfg, k.mix, norms, refs_by_id.get(k.entry.kernel_id))
        for k in kernels
    ]


def cmd_cluster(kernels: list[LoadedKernel], config: RunConfig) -> int:
    if len(kernels) < 2:
        raise CorpusError("cluster needs at least 2 kernels")
    ids = [k.entry.kernel_id for k in kernels]
    linkage = ward_linkage(_feature_vectors(kernels, config))
    assignment = cut_clusters(linkage, config.k, ids)
    _write(config.out, "linkage.csv", export_linkage_csv(linkage))
    _write(config.out, "dendrogram.txt", export_dendrogram(linkage, ids))
    _write(config.out, "dendrogram.newick", to_newick(linkage, ids) + "\n")
    _write(config.out, "clusters.csv", export_clusters_csv(assignment))
    return 0


def _add_common_flags(parser: argparse.ArgumentParser, *, suppress: bool) -> None:
    # Attached to the main parser with real defaults and to every
    # subparser with SUPPRESS, so the flags work on either side of the
    # subcommand without the subparser wiping already-parsed values.
    default = argparse.SUPPRESS if suppress else None
    add = parser.add_argument
    add("--manifest", type=Path, default=default, help="corpus manifest file")
    add("--out", type=Path, default=default, help="output directory (default: current)")
    add("--config", type=Path, default=default, help="key=value config file; flags win")
    add("--mode", choices=["row", "global"], default=default, help="matrix normalization")
    add(
        "--measure",
        choices=["euc", "iso", "man", "min", "jac", "cos", "all"],
        default=default,
        help="distance measure selection",
    )
    add("--p", type=float, default=default, help="minkowski order (default 3)")
    add("--alpha", type=float, default=default, help="isorank damping (default 0.85)")
    add("--tol", type=float, default=default, help="isorank convergence tolerance")
    add("--max-iter", type=int, dest="max_iter", default=default, help="isorank iteration cap")
    add("--j", default=default, help="goodness class set, e.g. FP32+FP64+MEM")
    add("--k", type=int, default=default, help="flat cluster count (default 2)")
    add("--reference", default=default, help="kernel_id whose distances join the features")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sasscfg",
        description="Reconstruct kernel control flow from SASS listings and "
        "compare kernels via transition-matrix similarity, metrics, and clustering.",
    )
    _add_common_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_command(name: str, help_text: str) -> argparse.ArgumentParser:
        command = sub.add_parser(name, help=help_text)
        _add_common_flags(command, suppress=True)
        return command

    p_parse = add_command("parse", "syntax-check listings")
    p_parse.add_argument("paths", nargs="*", type=Path, help="listing files")

    p_cfg = add_command("cfg", "emit per-kernel graphs")
    p_cfg.add_argument("--dot", action="store_true", help="write only DOT files")
    p_cfg.add_argument("--edges", action="store_true", help="write only edge lists")

    add_command("matrix", "emit transition matrices")
    add_command("compare", "emit pairwise heatmap CSVs")
    add_command("metrics", "emit metric + scatter CSVs")
    add_command("cluster", "emit linkage, dendrogram, clusters")
    return parser


def _resolve_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> RunConfig:
    try:
        config = RunConfig()
        if args.config is not None:
            config = load_config_file(args.config, config)
        overrides: dict[str, object] = {}
        for key in ("measure", "p", "alpha", "tol", "max_iter", "mode", "k", "reference"):
            value = getattr(args, key, None)
            if value is not None:
                overrides[key] = value
        if args.j is not None:
            overrides["j"] = parse_j_classes(args.j)
        if args.out is not None:
            overrides["out"] = args.out
        return replace(config, **overrides)
    except CorpusError as exc:
        parser.error(str(exc))
        raise AssertionError("unreachable")  # parser.error always exits


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = _resolve_config(args, parser)

    try:
        if args.command == "parse":
            return cmd_parse(args, parser)

        if args.manifest is None:
            parser.error(f"{args.command}: --manifest is required")
        kernels = _load_corpus(load_manifest(args.manifest))

        if args.command == "cfg":
            return cmd_cfg(args, kernels, config)
        if args.command == "matrix":
            return cmd_matrix(kernels, config)
        if args.command == "compare":
            return cmd_compare(kernels, config)
        if args.command == "metrics":
            return cmd_metrics(kernels, config)
        if args.command == "cluster":
            return cmd_cluster(kernels, config)
        raise AssertionError(f"unhandled command {args.command!r}")
    except (SasscfgError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
