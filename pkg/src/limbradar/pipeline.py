"""File-based pipeline stages behind the command-line tool.

Each stage reads and writes under one output directory:

    trajectory.csv            segment positions over time
    frames/frame_%06d.bin     combined frames (+ .meta sidecars)
    frames/segments/<name>/   per-segment frames for label attribution
    maps/, masks/             per-frame range-Doppler maps and masks
    features.csv              extracted (velocity, mean-free range) samples
    tree.json, confusion.csv  trained classifier and validation report
    envelopes.csv             raw + filtered per-class envelopes
    decompose_summary.json    per-frame latency statistics
    manifest.json             config hash, stage outputs, timings

All stages are deterministic for a fixed config: rerunning produces
byte-identical outputs except the timing fields of the manifest and the
latency summary.
"""

from __future__ import annotations

import json
import logging
import math
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .body import SEGMENT_ORDER, default_shapes
from .config import ScenarioConfig
from .envelopes import StreamingDecomposer, write_envelopes_csv
from .errors import ConfigurationError, DataContractError
from .features import (
    extract_features,
    label_features,
    read_features_csv,
    split_dataset,
    write_features_csv,
)
from .gait import generate_gait, write_trajectory_csv
from .mocap import load_mocap, mocap_to_trajectory
from .processing import (
    ThresholdMask,
    gamma_transform,
    normalize_to_unit,
    otsu_threshold,
    range_doppler_map,
    save_map,
    save_mask,
    spectrogram_to_csv,
    stft_spectrogram,
)
from .radar import (
    FRAME_FILE_PATTERN,
    add_noise,
    load_frame,
    save_frame,
    synth_frame,
    synth_frame_segments,
)
from .tree import evaluate_confusion, load_tree, save_tree, tree_train

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
_FRAME_RE = re.compile(r"^frame_(\d{6})\.bin$")

# fraction of standing height at which the head segment center sits;
# used to recover an approximate height from mocap-driven scenes
_HEAD_CENTER_FRACTION = 0.93


@dataclass
class StageResult:
    """What one stage produced: files (relative to out dir) and timing."""

    name: str
    files: list[str]
    seconds: float
    details: dict = field(default_factory=dict)


def _frame_index(path: Path) -> int:
    match = _FRAME_RE.match(path.name)
    if match is None:
        raise DataContractError(f"unexpected frame file name {path.name!r}")
    return int(match.group(1))


def list_frame_files(frames_dir) -> list[Path]:
    """Frame binaries in numeric order; the order contract of streaming."""
    frames_dir = Path(frames_dir)
    if not frames_dir.is_dir():
        raise FileNotFoundError(f"frames directory not found: {frames_dir}")
    files = [p for p in frames_dir.iterdir() if _FRAME_RE.match(p.name)]
    if not files:
        raise DataContractError(f"no frame files in {frames_dir}")
    return sorted(files, key=_frame_index)


def update_manifest(out_dir, scenario: ScenarioConfig, results: list[StageResult]) -> Path:
    """Merge stage results into manifest.json.

    A manifest written under a different config hash is discarded
    wholesale: mixing outputs of different configs in one directory is
    never valid.
    """
    out_dir = Path(out_dir)
    path = out_dir / MANIFEST_NAME
    doc = {"config_hash": scenario.config_hash, "tool_version": __version__, "stages": {}}
    if path.is_file():
        try:
            existing = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError:
            existing = None
        if existing and existing.get("config_hash") == scenario.config_hash:
            doc["stages"] = existing.get("stages", {})
    for result in results:
        missing = [f for f in result.files if not (out_dir / f).exists()]
        if missing:
            raise DataContractError(
                f"manifest lists missing file(s): {', '.join(missing[:5])}"
            )
        doc["stages"][result.name] = {
            "files": result.files,
            "seconds": round(result.seconds, 6),
            **result.details,
        }
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def _frame_count(scenario: ScenarioConfig) -> int:
    frame_duration = scenario.radar.frame_duration
    n = int(math.floor(scenario.duration / frame_duration + 1e-9))
    if n < 1:
        raise ConfigurationError(
            f"duration {scenario.duration} s is shorter than one frame "
            f"({frame_duration} s); nothing to simulate"
        )
    return n


def _scene_trajectory(scenario: ScenarioConfig):
    """Trajectory plus per-segment shapes for the configured scene."""
    if scenario.gait is not None:
        traj = generate_gait(scenario.gait, scenario.duration)
        return traj, default_shapes(scenario.gait.subject_height)
    recording = load_mocap(scenario.mocap_file)
    traj = mocap_to_trajectory(recording, scenario.mocap_sample_rate)
    head_z = float(np.mean(traj.position_of(SEGMENT_ORDER[0])[:, 2]))
    height = min(max(head_z / _HEAD_CENTER_FRACTION, 1.4), 2.2)
    return traj, default_shapes(height)


def cmd_simulate(scenario: ScenarioConfig, out_dir) -> StageResult:
    """Write trajectory.csv and all frame binaries for the scenario."""
    started = time.perf_counter()
    out_dir = Path(out_dir)
    n_frames = _frame_count(scenario)
    traj, shapes = _scene_trajectory(scenario)

    config = scenario.radar
    last_chirp = (n_frames - 1) * config.frame_duration + (
        config.chirps_per_frame - 1
    ) * config.chirp_duration
    if traj.times[-1] + 1e-9 < last_chirp:
        raise ConfigurationError(
            f"trajectory covers {traj.times[-1]:.3f} s but frame {n_frames - 1} "
            f"needs {last_chirp:.3f} s; shorten duration_s"
        )

    out_dir.mkdir(parents=True, exist_ok=True)
    frames_dir = out_dir / "frames"
    frames_dir.mkdir(exist_ok=True)
    files = ["trajectory.csv"]
    write_trajectory_csv(traj, out_dir / "trajectory.csv")

    rng = np.random.default_rng(scenario.noise_seed)
    for k in range(n_frames):
        frame_start = k * config.frame_duration
        name = FRAME_FILE_PATTERN % k
        if scenario.write_segment_frames:
            frame, per_segment = synth_frame_segments(traj, shapes, config, frame_start)
            for seg, seg_frame in per_segment.items():
                seg_dir = frames_dir / "segments" / seg.value
                seg_dir.mkdir(parents=True, exist_ok=True)
                save_frame(seg_frame, seg_dir / name)
                rel = f"frames/segments/{seg.value}/{name}"
                files += [rel, rel.replace(".bin", ".meta")]
        else:
            frame = synth_frame(traj, shapes, config, frame_start)
        if scenario.noise_snr_db is not None:
            frame = add_noise(frame, scenario.noise_snr_db, rng)
        save_frame(frame, frames_dir / name)
        files += [f"frames/{name}", f"frames/{name}".replace(".bin", ".meta")]
        log.debug("wrote frame %d/%d", k + 1, n_frames)

    result = StageResult(
        name="simulate",
        files=files,
        seconds=time.perf_counter() - started,
        details={"frames": n_frames},
    )
    update_manifest(out_dir, scenario, [result])
    log.info("simulate: %d frames in %.2f s", n_frames, result.seconds)
    return result


def _process_one(
    path: Path,
    scenario: ScenarioConfig,
    out_dir: Path,
    no_threshold: bool,
    labeled: bool,
):
    """Map, mask, and feature samples of one frame file."""
    k = _frame_index(path)
    frame = load_frame(path)
    rd = range_doppler_map(frame, window=scenario.doppler_window)
    grid = gamma_transform(normalize_to_unit(rd.values), scenario.gamma)
    if no_threshold:
        mask = ThresholdMask(mask=grid.values > 0.0, threshold=0.0)
    else:
        mask = otsu_threshold(grid, scenario.histogram_bins)
    map_name = f"maps/map_{k:06d}.bin"
    mask_name = f"masks/mask_{k:06d}.bin"
    save_map(rd, out_dir / map_name)
    save_mask(mask, out_dir / mask_name)
    samples = extract_features(mask, rd, k)
    if labeled and samples:
        segment_maps = {}
        for seg in SEGMENT_ORDER:
            seg_path = path.parent / "segments" / seg.value / path.name
            seg_frame = load_frame(seg_path)
            segment_maps[seg] = range_doppler_map(seg_frame, window=scenario.doppler_window)
        samples = label_features(samples, segment_maps)
    produced = [
        map_name,
        map_name.replace(".bin", ".meta"),
        mask_name,
        mask_name.replace(".bin", ".meta"),
    ]
    return k, samples, produced


def cmd_process(
    scenario: ScenarioConfig,
    out_dir,
    no_threshold: bool = False,
    parallel: int = 1,
    continue_on_error: bool = False,
) -> StageResult:
    """Per-frame maps and masks, then one merged features.csv.

    Labels are attached when per-segment frames exist next to the
    combined ones. Frames may be processed by parallel workers; the
    feature CSV is assembled in frame order regardless.
    """
    started = time.perf_counter()
    out_dir = Path(out_dir)
    frame_files = list_frame_files(out_dir / "frames")
    labeled = (out_dir / "frames" / "segments").is_dir()
    (out_dir / "maps").mkdir(exist_ok=True)
    (out_dir / "masks").mkdir(exist_ok=True)

    def work(path):
        return _process_one(path, scenario, out_dir, no_threshold, labeled)

    results = {}
    skipped = []
    files: list[str] = []
    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            futures = {pool.submit(work, p): p for p in frame_files}
            for future, path in futures.items():
                try:
                    k, samples, produced = future.result()
                except (DataContractError, OSError) as exc:
                    if not continue_on_error:
                        raise
                    log.error("skipping %s: %s", path.name, exc)
                    skipped.append(path.name)
                    continue
                results[k] = samples
                files += produced
    else:
        for path in frame_files:
            try:
                k, samples, produced = work(path)
            except (DataContractError, OSError) as exc:
                if not continue_on_error:
                    raise
                log.error("skipping %s: %s", path.name, exc)
                skipped.append(path.name)
                continue
            results[k] = samples
            files += produced

    merged = [s for k in sorted(results) for s in results[k]]
    write_features_csv(merged, out_dir / "features.csv")
    files = sorted(files) + ["features.csv"]

    result = StageResult(
        name="process",
        files=files,
        seconds=time.perf_counter() - started,
        details={
            "frames": len(results),
            "samples": len(merged),
            "labeled": labeled,
            "skipped": skipped,
        },
    )
    update_manifest(out_dir, scenario, [result])
    log.info(
        "process: %d frames -> %d samples (%slabeled) in %.2f s",
        len(results),
        len(merged),
        "" if labeled else "un",
        result.seconds,
    )
    return result


def cmd_train_eval(scenario: ScenarioConfig, out_dir) -> StageResult:
    """Seeded split, tree training, and the validation confusion table."""
    started = time.perf_counter()
    out_dir = Path(out_dir)
    features_path = out_dir / "features.csv"
    if not features_path.is_file():
        raise FileNotFoundError(f"features file not found: {features_path}")
    samples = read_features_csv(features_path)
    if not samples:
        raise DataContractError("features.csv holds no samples")
    if any(s.label is None for s in samples):
        raise DataContractError(
            "features.csv contains unlabeled rows; rerun simulate with "
            "write_segment_frames = true and process again to attach labels"
        )
    train, validation = split_dataset(
        samples, train_fraction=scenario.train_fraction, seed=scenario.classifier_seed
    )
    tree = tree_train(
        train,
        max_depth=scenario.max_depth,
        min_samples_leaf=scenario.min_samples_leaf,
        seed=scenario.classifier_seed,
    )
    save_tree(tree, out_dir / "tree.json")
    confusion = evaluate_confusion(tree, validation)
    confusion.to_csv(out_dir / "confusion.csv")
    accuracy = float(np.trace(confusion.counts) / confusion.counts.sum())
    print(confusion.format_table())
    print(
        f"validation accuracy {100.0 * accuracy:.1f}% "
        f"({len(train)} train / {len(validation)} validation samples)"
    )

    result = StageResult(
        name="train-eval",
        files=["tree.json", "confusion.csv"],
        seconds=time.perf_counter() - started,
        details={
            "train_samples": len(train),
            "validation_samples": len(validation),
            "accuracy": accuracy,
            "tree_depth": tree.depth(),
            "tree_leaves": tree.n_leaves(),
        },
    )
    update_manifest(out_dir, scenario, [result])
    return result


def cmd_decompose(scenario: ScenarioConfig, out_dir, plot: bool = False) -> StageResult:
    """Stream all frames through the decomposer and report latency.

    Strictly sequential by contract: envelopes of frame k may only use
    frames up to k + 4.
    """
    started = time.perf_counter()
    out_dir = Path(out_dir)
    frame_files = list_frame_files(out_dir / "frames")
    tree = load_tree(out_dir / "tree.json")
    decomposer = StreamingDecomposer(
        tree=tree,
        gamma=scenario.gamma,
        histogram_bins=scenario.histogram_bins,
        filter_order=scenario.filter_order,
        doppler_window=scenario.doppler_window,
    )
    emissions = []
    frames = []
    for path in frame_files:
        frame = load_frame(path)
        frames.append(frame)
        emissions.extend(decomposer.push(frame))
    emissions.extend(decomposer.finish())
    write_envelopes_csv(emissions, out_dir / "envelopes.csv")
    files = ["envelopes.csv", "decompose_summary.json"]

    push = np.array(decomposer.push_seconds)
    budget = scenario.radar.frame_duration
    summary = {
        "frames": len(frame_files),
        "latency_frames": decomposer.latency,
        "filter_order": scenario.filter_order,
        "mean_push_ms": float(1e3 * push.mean()),
        "max_push_ms": float(1e3 * push.max()),
        "budget_ms": 1e3 * budget,
        "within_budget": bool(push.mean() <= budget),
    }
    (out_dir / "decompose_summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    print(
        f"decomposed {summary['frames']} frames: mean {summary['mean_push_ms']:.2f} ms, "
        f"max {summary['max_push_ms']:.2f} ms per frame "
        f"(budget {summary['budget_ms']:.1f} ms) - "
        + ("within budget" if summary["within_budget"] else "OVER BUDGET")
    )

    if plot:
        # slow-time series: coherent sum over range bins, one sample per chirp
        slow_time = np.concatenate([frame.data.sum(axis=0) for frame in frames])
        spec = stft_spectrogram(
            slow_time,
            sample_rate=1.0 / scenario.radar.chirp_duration,
            window_len=scenario.stft_window_len,
            hop=scenario.stft_hop,
            sigma=scenario.stft_sigma,
            carrier_frequency=scenario.radar.carrier_frequency,
        )
        spectrogram_to_csv(spec, out_dir / "spectrogram.csv")
        files.append("spectrogram.csv")

    result = StageResult(
        name="decompose",
        files=files,
        seconds=time.perf_counter() - started,
        details=summary,
    )
    update_manifest(out_dir, scenario, [result])
    return result


def build_labeled_dataset(
    traj,
    shapes,
    radar_config,
    n_frames: int,
    gamma: float = 0.65,
    histogram_bins: int = 256,
    doppler_window: str | None = "hann",
    frame_offset: int = 0,
) -> list:
    """Labeled feature samples straight from a trajectory, no files.

    Runs the same per-frame chain as cmd_process (map, normalize, gamma,
    Otsu, extract, label) entirely in memory; frame_offset shifts the
    recorded frame indices so datasets from several runs can be merged
    without collisions.
    """
    samples = []
    for k in range(n_frames):
        frame, per_segment = synth_frame_segments(
            traj, shapes, radar_config, k * radar_config.frame_duration
        )
        rd = range_doppler_map(frame, window=doppler_window)
        grid = gamma_transform(normalize_to_unit(rd.values), gamma)
        mask = otsu_threshold(grid, histogram_bins)
        extracted = extract_features(mask, rd, frame_offset + k)
        if not extracted:
            continue
        segment_maps = {
            seg: range_doppler_map(f, window=doppler_window)
            for seg, f in per_segment.items()
        }
        samples.extend(label_features(extracted, segment_maps))
    return samples


def run_all(
    scenario: ScenarioConfig,
    out_dir,
    no_threshold: bool = False,
    parallel: int = 1,
    continue_on_error: bool = False,
    plot: bool = False,
) -> list[StageResult]:
    """simulate -> process -> train-eval -> decompose, one directory."""
    return [
        cmd_simulate(scenario, out_dir),
        cmd_process(
            scenario,
            out_dir,
            no_threshold=no_threshold,
            parallel=parallel,
            continue_on_error=continue_on_error,
        ),
        cmd_train_eval(scenario, out_dir),
        cmd_decompose(scenario, out_dir, plot=plot),
    ]
