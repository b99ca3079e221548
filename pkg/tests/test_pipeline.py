"""End-to-end tests of the file pipeline stages and the CLI contract."""

import json
import shutil
import subprocess

import numpy as np
import pytest

from limbradar.body import SEGMENT_ORDER
from limbradar.cli import main
from limbradar.config import load_scenario
from limbradar.envelopes import read_envelopes_csv
from limbradar.errors import ConfigurationError, DataContractError
from limbradar.features import read_features_csv
from limbradar.gait import read_trajectory_csv
from limbradar.pipeline import (
    build_labeled_dataset,
    cmd_decompose,
    cmd_process,
    cmd_simulate,
    cmd_train_eval,
    list_frame_files,
    run_all,
    update_manifest,
)
from limbradar.processing import gamma_transform, normalize_to_unit, range_doppler_map
from limbradar.radar import load_frame
from limbradar.tree import load_tree

SCENARIO = """\
[scenario]
duration_s = 1.3
output_dir = {out}

[gait]
subject_height = 1.75
walk_speed = 1.3
sample_rate = 2000
start_x = 6.0
heading_x = -1.0
seed = 1

[radar]
preset = model-b

[classifier]
seed = 0
"""


def write_scenario(directory, out_dir, extra="", name="scenario.ini"):
    path = directory / name
    path.write_text(SCENARIO.format(out=out_dir) + extra)
    return path


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """One full run_all shared by the read-only assertions below."""
    root = tmp_path_factory.mktemp("pipeline")
    out = root / "out"
    config_path = write_scenario(root, out)
    scenario = load_scenario(config_path)
    results = run_all(scenario, out, plot=True)
    return {
        "root": root,
        "out": out,
        "config_path": config_path,
        "scenario": scenario,
        "results": results,
    }


class TestSimulate:
    def test_frame_count_follows_duration(self, workspace):
        # floor(1.3 / 0.032) = 40
        frames = list_frame_files(workspace["out"] / "frames")
        assert len(frames) == 40
        assert frames[0].name == "frame_000000.bin"
        assert frames[-1].name == "frame_000039.bin"

    def test_trajectory_round_trips(self, workspace):
        traj = read_trajectory_csv(workspace["out"] / "trajectory.csv")
        assert traj.times[0] == 0.0
        assert traj.sample_rate == pytest.approx(2000.0)

    def test_per_segment_directories_complete(self, workspace):
        seg_root = workspace["out"] / "frames" / "segments"
        names = sorted(p.name for p in seg_root.iterdir())
        assert names == sorted(s.value for s in SEGMENT_ORDER)
        for seg_dir in seg_root.iterdir():
            assert len(list(seg_dir.glob("frame_*.bin"))) == 40

    def test_frames_reload_cleanly(self, workspace):
        frame = load_frame(workspace["out"] / "frames" / "frame_000000.bin")
        assert frame.data.shape == (100, 64)
        assert frame.frame_start == 0.0

    def test_rerun_is_byte_identical(self, workspace, tmp_path):
        scenario = load_scenario(
            write_scenario(tmp_path, tmp_path / "out2", name="again.ini")
        )
        cmd_simulate(scenario, tmp_path / "out2")
        for name in ("frames/frame_000007.bin", "frames/frame_000007.meta", "trajectory.csv"):
            assert (tmp_path / "out2" / name).read_bytes() == (
                workspace["out"] / name
            ).read_bytes()

    def test_duration_below_one_frame_writes_nothing(self, tmp_path):
        path = write_scenario(tmp_path, tmp_path / "never")
        path.write_text(path.read_text().replace("duration_s = 1.3", "duration_s = 0.01"))
        scenario = load_scenario(path)
        with pytest.raises(ConfigurationError, match="shorter than one frame"):
            cmd_simulate(scenario, tmp_path / "never")
        assert not (tmp_path / "never").exists()

    def test_segment_frames_can_be_disabled(self, tmp_path):
        out = tmp_path / "out"
        path = tmp_path / "scenario.ini"
        path.write_text(
            SCENARIO.format(out=out).replace(
                "preset = model-b", "preset = model-b\nwrite_segment_frames = false"
            )
        )
        cmd_simulate(load_scenario(path), out)
        assert not (out / "frames" / "segments").exists()


class TestProcess:
    def test_maps_masks_and_features_exist(self, workspace):
        out = workspace["out"]
        assert len(list((out / "maps").glob("map_*.bin"))) == 40
        assert len(list((out / "masks").glob("mask_*.bin"))) == 40
        samples = read_features_csv(out / "features.csv")
        assert len(samples) > 1000
        assert all(s.label is not None for s in samples)

    def test_every_nonempty_frame_contributes_rows(self, workspace):
        samples = read_features_csv(workspace["out"] / "features.csv")
        assert {s.frame_index for s in samples} == set(range(40))

    def test_parallel_processing_is_byte_identical(self, workspace, tmp_path):
        out = tmp_path / "out"
        out.mkdir()
        shutil.copytree(workspace["out"] / "frames", out / "frames")
        cmd_process(workspace["scenario"], out, parallel=4)
        assert (out / "features.csv").read_bytes() == (
            workspace["out"] / "features.csv"
        ).read_bytes()

    def test_no_threshold_debug_mode_keeps_all_nonzero_cells(self, workspace, tmp_path):
        out = tmp_path / "out"
        out.mkdir()
        shutil.copytree(workspace["out"] / "frames", out / "frames")
        scenario = workspace["scenario"]
        cmd_process(scenario, out, no_threshold=True)
        samples = read_features_csv(out / "features.csv")
        frame0 = [s for s in samples if s.frame_index == 0]
        frame = load_frame(out / "frames" / "frame_000000.bin")
        rd = range_doppler_map(frame, window=scenario.doppler_window)
        grid = gamma_transform(normalize_to_unit(rd.values), scenario.gamma)
        assert len(frame0) == int(np.count_nonzero(grid.values > 0.0))
        baseline = read_features_csv(workspace["out"] / "features.csv")
        assert len(samples) > len(baseline)

    def test_corrupt_frame_aborts_unless_told_otherwise(self, workspace, tmp_path):
        out = tmp_path / "out"
        out.mkdir()
        shutil.copytree(workspace["out"] / "frames", out / "frames")
        victim = out / "frames" / "frame_000003.bin"
        victim.write_bytes(victim.read_bytes()[: len(victim.read_bytes()) // 2])
        with pytest.raises(DataContractError):
            cmd_process(workspace["scenario"], out)
        cmd_process(workspace["scenario"], out, continue_on_error=True)
        samples = read_features_csv(out / "features.csv")
        present = {s.frame_index for s in samples}
        assert 3 not in present
        assert present == set(range(40)) - {3}

    def test_missing_frames_dir_is_an_io_error(self, workspace, tmp_path):
        with pytest.raises(FileNotFoundError):
            cmd_process(workspace["scenario"], tmp_path / "void")


class TestTrainEval:
    def test_artifacts_written(self, workspace):
        out = workspace["out"]
        tree = load_tree(out / "tree.json")
        assert tree.max_depth == 12
        lines = (out / "confusion.csv").read_text().splitlines()
        assert lines[0] == "true_class,arms,feet,legs,base"
        assert len(lines) == 5

    def test_report_is_deterministic(self, workspace, tmp_path, capsys):
        out = tmp_path / "out"
        out.mkdir()
        shutil.copy(workspace["out"] / "features.csv", out / "features.csv")
        cmd_train_eval(workspace["scenario"], out)
        first = capsys.readouterr().out
        cmd_train_eval(workspace["scenario"], out)
        assert capsys.readouterr().out == first
        assert (out / "tree.json").read_bytes() == (
            workspace["out"] / "tree.json"
        ).read_bytes()
        assert (out / "confusion.csv").read_bytes() == (
            workspace["out"] / "confusion.csv"
        ).read_bytes()

    def test_missing_features_is_an_io_error(self, workspace, tmp_path):
        with pytest.raises(FileNotFoundError):
            cmd_train_eval(workspace["scenario"], tmp_path)

    def test_unlabeled_features_tell_user_to_label(self, workspace, tmp_path):
        source = (workspace["out"] / "features.csv").read_text().splitlines()
        stripped = [source[0]] + [
            ",".join(line.split(",")[:3]) + "," for line in source[1:]
        ]
        (tmp_path / "features.csv").write_text("\n".join(stripped) + "\n")
        with pytest.raises(DataContractError, match="label"):
            cmd_train_eval(workspace["scenario"], tmp_path)


class TestDecompose:
    def test_envelope_csv_contract(self, workspace):
        emissions = read_envelopes_csv(workspace["out"] / "envelopes.csv")
        raw = [e for e in emissions if not e.filtered]
        filtered = [e for e in emissions if e.filtered]
        assert {e.frame_index for e in raw} == set(range(40))
        assert {e.frame_index for e in filtered} == set(range(40))
        # streaming order: the filtered row of frame k lands after the
        # raw row of frame k+4
        order = [(e.frame_index, e.filtered) for e in emissions]
        assert order.index((4, False)) < order.index((0, True))

    def test_summary_reports_latency_budget(self, workspace):
        summary = json.loads((workspace["out"] / "decompose_summary.json").read_text())
        assert summary["frames"] == 40
        assert summary["latency_frames"] == 4
        assert summary["budget_ms"] == pytest.approx(32.0)
        assert summary["mean_push_ms"] > 0

    def test_plot_flag_emits_spectrogram(self, workspace):
        lines = (workspace["out"] / "spectrogram.csv").read_text().splitlines()
        assert lines[0] == "t_s,f_hz,value_db"
        assert len(lines) > 100

    def test_missing_tree_is_an_io_error(self, workspace, tmp_path):
        out = tmp_path / "out"
        out.mkdir()
        shutil.copytree(workspace["out"] / "frames", out / "frames")
        with pytest.raises(FileNotFoundError):
            cmd_decompose(workspace["scenario"], out)


class TestManifest:
    def test_all_stages_recorded_with_existing_files(self, workspace):
        doc = json.loads((workspace["out"] / "manifest.json").read_text())
        assert doc["config_hash"] == workspace["scenario"].config_hash
        assert set(doc["stages"]) == {"simulate", "process", "train-eval", "decompose"}
        for stage in doc["stages"].values():
            assert stage["seconds"] >= 0
            for rel in stage["files"]:
                assert (workspace["out"] / rel).exists()

    def test_stale_manifest_from_other_config_is_replaced(self, workspace, tmp_path):
        out = tmp_path / "out"
        out.mkdir()
        (out / "manifest.json").write_text(
            json.dumps({"config_hash": "deadbeef", "stages": {"simulate": {"files": []}}})
        )
        (out / "probe.txt").write_text("x")
        from limbradar.pipeline import StageResult

        update_manifest(
            out,
            workspace["scenario"],
            [StageResult(name="process", files=["probe.txt"], seconds=0.1)],
        )
        doc = json.loads((out / "manifest.json").read_text())
        assert set(doc["stages"]) == {"process"}

    def test_manifest_merge_keeps_stages_for_same_config(self, workspace):
        doc = json.loads((workspace["out"] / "manifest.json").read_text())
        # run_all updated the manifest four times; earlier stages survived
        assert "simulate" in doc["stages"] and "decompose" in doc["stages"]

    def test_listed_files_must_exist(self, workspace, tmp_path):
        from limbradar.pipeline import StageResult

        with pytest.raises(DataContractError, match="missing"):
            update_manifest(
                tmp_path,
                workspace["scenario"],
                [StageResult(name="x", files=["ghost.bin"], seconds=0.0)],
            )


class TestBuildLabeledDataset:
    def test_matches_file_pipeline_samples(self, workspace):
        from limbradar.body import default_shapes
        from limbradar.gait import generate_gait

        scenario = workspace["scenario"]
        traj = generate_gait(scenario.gait, scenario.duration)
        samples = build_labeled_dataset(
            traj,
            default_shapes(scenario.gait.subject_height),
            scenario.radar,
            n_frames=3,
        )
        from_files = [
            s
            for s in read_features_csv(workspace["out"] / "features.csv")
            if s.frame_index < 3
        ]
        assert len(samples) == len(from_files)
        for mem, disk in zip(samples, from_files):
            assert mem.velocity == disk.velocity
            assert mem.mean_free_range == disk.mean_free_range
            assert mem.label is disk.label

    def test_frame_offset_shifts_indices(self, workspace):
        from limbradar.body import default_shapes
        from limbradar.gait import generate_gait

        scenario = workspace["scenario"]
        traj = generate_gait(scenario.gait, scenario.duration)
        shapes = default_shapes(scenario.gait.subject_height)
        shifted = build_labeled_dataset(
            traj, shapes, scenario.radar, n_frames=2, frame_offset=100
        )
        assert {s.frame_index for s in shifted} == {100, 101}


class TestCli:
    def test_exit_code_for_bad_config(self, tmp_path, capsys):
        assert main(["simulate", "--config", str(tmp_path / "none.ini")]) == 2
        assert "configuration error" in capsys.readouterr().err

    def test_exit_code_without_output_dir(self, tmp_path, capsys):
        path = tmp_path / "s.ini"
        path.write_text(SCENARIO.format(out="IGNORED").replace("output_dir = IGNORED\n", ""))
        assert main(["simulate", "--config", str(path)]) == 2
        assert "output" in capsys.readouterr().err

    def test_exit_code_for_missing_inputs(self, tmp_path, capsys):
        path = write_scenario(tmp_path, tmp_path / "out")
        (tmp_path / "out").mkdir()
        assert main(["process", "--config", str(path)]) == 3
        assert "IO error" in capsys.readouterr().err

    def test_exit_code_for_corrupt_data(self, workspace, tmp_path, capsys):
        out = tmp_path / "out"
        out.mkdir()
        shutil.copytree(workspace["out"] / "frames", out / "frames")
        victim = out / "frames" / "frame_000000.bin"
        victim.write_bytes(b"\x00" * 16)
        path = write_scenario(tmp_path, out)
        assert main(["process", "--config", str(path)]) == 4
        assert "data error" in capsys.readouterr().err

    def test_no_command_prints_usage(self, capsys):
        assert main([]) == 2

    def test_flags_reach_the_pipeline(self, workspace, tmp_path, capsys):
        out = tmp_path / "out"
        out.mkdir()
        shutil.copytree(workspace["out"] / "frames", out / "frames")
        path = write_scenario(tmp_path, out)
        assert main(["process", "--config", str(path), "--parallel", "2"]) == 0
        assert (out / "features.csv").read_bytes() == (
            workspace["out"] / "features.csv"
        ).read_bytes()

    def test_installed_entry_point(self):
        proc = subprocess.run(
            ["mdl", "--version"], capture_output=True, text=True, timeout=60
        )
        assert proc.returncode == 0
        assert proc.stdout.strip().startswith("mdl ")
