"""Command-line driver: exit codes, artifacts, and configuration."""

from __future__ import annotations

import subprocess
import sys
from pathlib import Path

import pytest

from helpers import BRANCHY_LISTING
from sasscfg.cli import main
from sasscfg.corpus import RunConfig, load_config_file, load_manifest, parse_j_classes
from sasscfg.errors import CorpusError
from sasscfg.sass import InstrClass

VSUM_IDS = ["k80.synth.vsum.acc", "m40.synth.vsum.acc", "p100.synth.vsum.acc"]
WALK_IDS = ["k80.synth.walk.step", "m40.synth.walk.step", "p100.synth.walk.step"]
ALL_IDS = sorted(VSUM_IDS + WALK_IDS)


def _usage_error(argv: list[str]) -> None:
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    assert excinfo.value.code == 2


class TestParseCommand:
    def test_ok_line_per_listing(self, tmp_path, capsys):
        listing = tmp_path / "branchy.sass"
        listing.write_text(BRANCHY_LISTING)
        assert main(["parse", str(listing)]) == 0
        out = capsys.readouterr().out
        assert out == f"OK {listing}: 7 instructions, 3 labels\n"

    def test_failures_flip_exit_code(self, tmp_path, capsys):
        good = tmp_path / "good.sass"
        good.write_text(BRANCHY_LISTING)
        bad = tmp_path / "bad.sass"
        bad.write_text("/*0008*/ FADD R0, R1, R2;\n/*0000*/ EXIT;\n")
        assert main(["parse", str(good), str(bad)]) == 1
        out = capsys.readouterr().out.splitlines()
        assert out[0].startswith("OK ")
        assert out[1].startswith(f"FAIL {bad}: ")

    def test_missing_file_reported_inline(self, tmp_path, capsys):
        ghost = tmp_path / "ghost.sass"
        assert main(["parse", str(ghost)]) == 1
        assert capsys.readouterr().out.startswith(f"FAIL {ghost}: ")

    def test_manifest_supplies_paths(self, corpus_manifest, capsys):
        assert main(["--manifest", str(corpus_manifest), "parse"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 6 and all(line.startswith("OK ") for line in lines)

    def test_no_inputs_is_usage_error(self):
        _usage_error(["parse"])


class TestUsageErrors:
    def test_unknown_command(self):
        _usage_error(["frobnicate"])

    def test_unknown_measure_choice(self, corpus_manifest):
        _usage_error(["compare", "--manifest", str(corpus_manifest), "--measure", "bogus"])

    def test_manifest_required_for_pipeline_commands(self):
        _usage_error(["matrix"])

    def test_bad_config_file_value(self, tmp_path, corpus_manifest):
        config = tmp_path / "run.cfg"
        config.write_text("alpha=7\n")
        _usage_error(["matrix", "--manifest", str(corpus_manifest), "--config", str(config)])

    def test_bad_j_class(self, corpus_manifest):
        _usage_error(["metrics", "--manifest", str(corpus_manifest), "--j", "FP128"])


class TestDataErrors:
    def test_broken_manifest(self, tmp_path, capsys):
        manifest = tmp_path / "manifest.txt"
        manifest.write_text("a.synth.t.one missing.sass kepler\n")
        assert main(["matrix", "--manifest", str(manifest)]) == 1
        assert "error:" in capsys.readouterr().err

    def test_compare_needs_two_kernels(self, tmp_path, corpus_manifest, capsys):
        solo = tmp_path / "manifest.txt"
        listing = corpus_manifest.parent / "listings" / "vsum_k80.sass"
        solo.write_text(f"solo.synth.vsum.acc {listing} kepler\n")
        assert main(["compare", "--manifest", str(solo), "--out", str(tmp_path)]) == 1
        assert "at least 2 kernels" in capsys.readouterr().err


@pytest.fixture()
def run(corpus_manifest, tmp_path):
    """Run a subcommand against the bundled corpus into a fresh out dir."""

    def runner(*argv: str, out: Path | None = None) -> Path:
        out = out or tmp_path / "out"
        code = main([*argv, "--manifest", str(corpus_manifest), "--out", str(out)])
        assert code == 0
        return out

    return runner


class TestArtifacts:
    def test_cfg_writes_dot_and_edges(self, run):
        out = run("cfg")
        for kernel_id in ALL_IDS:
            assert (out / f"{kernel_id}.dot").is_file()
            assert (out / f"{kernel_id}.edges").is_file()

    def test_cfg_dot_only(self, run):
        out = run("cfg", "--dot")
        assert len(list(out.glob("*.dot"))) == 6
        assert not list(out.glob("*.edges"))

    def test_cfg_edges_only(self, run):
        out = run("cfg", "--edges")
        assert not list(out.glob("*.dot"))
        assert len(list(out.glob("*.edges"))) == 6

    def test_matrix_default_mode(self, run):
        out = run("matrix")
        files = sorted(out.glob("*.mat"))
        assert [f.name for f in files] == [f"{k}.mat" for k in ALL_IDS]
        for f in files:
            assert f.read_text().splitlines()[0].endswith("mode row_stochastic")

    def test_matrix_global_mode(self, run):
        out = run("matrix", "--mode", "global")
        text = (out / f"{ALL_IDS[0]}.mat").read_text()
        assert text.splitlines()[0].endswith("mode global")

    def test_compare_one_measure(self, run):
        out = run("compare", "--measure", "man")
        assert sorted(f.name for f in out.iterdir()) == ["man.csv", "man_scaled.csv"]
        header = (out / "man.csv").read_text().splitlines()[0]
        assert header == "," + ",".join(ALL_IDS)

    def test_compare_all_measures(self, run):
        out = run("compare", "--measure", "all")
        names = sorted(f.name for f in out.iterdir())
        assert names == sorted(
            [f"{m}.csv" for m in ("euc", "iso", "man", "min", "jac", "cos")]
            + [f"{m}_scaled.csv" for m in ("euc", "iso", "man", "min", "jac", "cos")]
        )

    def test_minkowski_order_one_equals_manhattan(self, run, tmp_path):
        man = run("compare", "--measure", "man", out=tmp_path / "man")
        mink = run("compare", "--measure", "min", "--p", "1", out=tmp_path / "min")
        assert (mink / "min.csv").read_text() == (man / "man.csv").read_text()
        assert (mink / "min_scaled.csv").read_text() == (man / "man_scaled.csv").read_text()

    def test_metrics_outputs(self, run):
        out = run("metrics")
        metrics = (out / "metrics.csv").read_text().splitlines()
        scatter = (out / "scatter.csv").read_text().splitlines()
        assert len(metrics) == 7 and len(scatter) == 7
        assert [line.split(",")[0] for line in metrics[1:]] == ALL_IDS
        # Every corpus kernel is fully profiled: no blank columns anywhere.
        assert all(",," not in line for line in metrics[1:])

    def test_metrics_custom_j(self, run):
        out = run("metrics", "--j", "INT")
        for line in (out / "metrics.csv").read_text().splitlines()[1:]:
            assert line.endswith(",INT")

    def test_cluster_outputs(self, run):
        out = run("cluster")
        names = sorted(f.name for f in out.iterdir())
        assert names == ["clusters.csv", "dendrogram.newick", "dendrogram.txt", "linkage.csv"]
        lines = (out / "clusters.csv").read_text().splitlines()
        assert lines[0] == "kernel_id,cluster"
        assignment = dict(line.split(",") for line in lines[1:])
        assert set(assignment) == set(ALL_IDS)
        assert set(assignment.values()) == {"0", "1"}

    def test_cluster_k_flag(self, run):
        out = run("cluster", "--k", "4")
        lines = (out / "clusters.csv").read_text().splitlines()[1:]
        assert len({line.split(",")[1] for line in lines}) == 4

    def test_cluster_reference_feature(self, run, tmp_path):
        plain = run("cluster", out=tmp_path / "plain")
        with_ref = run(
            "cluster", "--reference", "k80.synth.vsum.acc", "--measure", "euc",
            out=tmp_path / "ref",
        )
        assert (with_ref / "linkage.csv").is_file()
        # The extra feature column moves the merge distances.
        assert (with_ref / "linkage.csv").read_text() != (plain / "linkage.csv").read_text()

    def test_unknown_reference_is_data_error(self, corpus_manifest, tmp_path, capsys):
        code = main(
            ["cluster", "--manifest", str(corpus_manifest), "--out", str(tmp_path),
             "--reference", "nope.synth.t.x"]
        )
        assert code == 1
        assert "not in corpus" in capsys.readouterr().err

    def test_flags_work_on_either_side(self, corpus_manifest, tmp_path):
        before = tmp_path / "before"
        after = tmp_path / "after"
        assert main(["--manifest", str(corpus_manifest), "--out", str(before), "matrix"]) == 0
        assert main(["matrix", "--manifest", str(corpus_manifest), "--out", str(after)]) == 0
        for name in (f"{k}.mat" for k in ALL_IDS):
            assert (before / name).read_text() == (after / name).read_text()

    def test_runs_are_deterministic(self, run, tmp_path):
        first = run("compare", "--measure", "all", out=tmp_path / "a")
        second = run("compare", "--measure", "all", out=tmp_path / "b")
        for f in sorted(first.iterdir()):
            assert f.read_bytes() == (second / f.name).read_bytes()


class TestConfigPrecedence:
    def test_config_file_applies(self, run, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("# run settings\nk=3\nmode=global\n")
        out = run("cluster", "--config", str(config))
        lines = (out / "clusters.csv").read_text().splitlines()[1:]
        assert len({line.split(",")[1] for line in lines}) == 3

    def test_flag_beats_config(self, run, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("k=3\n")
        out = run("cluster", "--config", str(config), "--k", "2")
        lines = (out / "clusters.csv").read_text().splitlines()[1:]
        assert len({line.split(",")[1] for line in lines}) == 2


class TestModuleEntry:
    def test_python_dash_m(self):
        proc = subprocess.run(
            [sys.executable, "-m", "sasscfg", "--help"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert proc.stdout.startswith("usage: sasscfg")


class TestManifestFormat:
    def test_three_and_four_field_lines(self, tmp_path):
        listing = tmp_path / "a.sass"
        listing.write_text("/*0000*/ EXIT;\n")
        profile = tmp_path / "a.prof"
        profile.write_text("kernel a.synth.t.two\n")
        manifest = tmp_path / "manifest.txt"
        manifest.write_text(
            "# comment line\n"
            "\n"
            "one.synth.t.one a.sass kepler\n"
            "two.synth.t.two a.sass a.prof maxwell  # trailing comment\n"
        )
        corpus = load_manifest(manifest)
        assert len(corpus.entries) == 2
        assert corpus.entries[0].profile_path is None
        assert corpus.entries[1].profile_path == profile
        assert corpus.entries[1].arch == "maxwell"

    def test_field_count_checked(self, tmp_path):
        manifest = tmp_path / "manifest.txt"
        manifest.write_text("only_two fields\n")
        with pytest.raises(CorpusError, match="manifest.txt:1"):
            load_manifest(manifest)

    def test_duplicate_ids_rejected(self, tmp_path):
        listing = tmp_path / "a.sass"
        listing.write_text("/*0000*/ EXIT;\n")
        manifest = tmp_path / "manifest.txt"
        manifest.write_text("x.synth.t.a a.sass kepler\nx.synth.t.a a.sass kepler\n")
        with pytest.raises(CorpusError, match="duplicate"):
            load_manifest(manifest)

    def test_missing_listing_rejected(self, tmp_path):
        manifest = tmp_path / "manifest.txt"
        manifest.write_text("x.synth.t.a nowhere.sass kepler\n")
        with pytest.raises(CorpusError, match="not readable"):
            load_manifest(manifest)


class TestRunConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"measure": "hamming"},
            {"mode": "column"},
            {"p": 0.5},
            {"alpha": 0.0},
            {"alpha": 1.0},
            {"tol": 0.0},
            {"max_iter": 0},
            {"k": 0},
        ],
    )
    def test_range_validation(self, kwargs):
        with pytest.raises(CorpusError):
            RunConfig(**kwargs)

    def test_j_class_parsing(self):
        assert parse_j_classes("FP32+MEM") == {InstrClass.FP32, InstrClass.MEM}
        assert parse_j_classes("fp32,mem") == {InstrClass.FP32, InstrClass.MEM}
        with pytest.raises(CorpusError):
            parse_j_classes("FP32+WAT")

    def test_config_file_round_trip(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text(
            "measure=min\n"
            "p = 2.5\n"
            "max-iter = 50   # dashes allowed\n"
            "j=FP32+MEM\n"
            "out=results\n"
        )
        rc = load_config_file(config)
        assert rc.measure == "min" and rc.p == 2.5 and rc.max_iter == 50
        assert rc.j == {InstrClass.FP32, InstrClass.MEM}
        assert rc.out == Path("results")

    def test_config_file_unknown_key(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("banana=1\n")
        with pytest.raises(CorpusError, match="unknown key"):
            load_config_file(config)

    def test_config_file_bad_value_names_line(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("measure=min\nmax_iter=soon\n")
        with pytest.raises(CorpusError, match=":2"):
            load_config_file(config)
