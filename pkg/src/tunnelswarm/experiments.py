"""Experiment batches and their on-disk artifacts (CSV + manifest)."""

from __future__ import annotations

import json
from pathlib import Path

from .config import ScenarioSpec, serialize_scenario
from .engine import RunMetrics, run_replicate

ARTIFACT_VERSION = "0.1.0"

RESULTS_HEADER = ("scenario_id,replicate,seed,pfddr,n_faulty,fault_types,"
                  "blocks_excavated,power_consumed_pct,robots_depleted,tunnel_depth_m")
DETECTIONS_HEADER = "scenario_id,replicate,t_s,robot_id,category,dc_at_detection"


def run_specs(specs: list[ScenarioSpec], parallel: int = 1,
              check_invariants: bool = True) -> list[RunMetrics]:
    """Run every replicate of every spec; output ordered by (spec, replicate)."""
    jobs = [(spec, k) for spec in specs for k in range(spec.replicates)]
    if parallel > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(_run_job, [
                (spec, k, check_invariants) for spec, k in jobs]))
    else:
        results = [run_replicate(spec, k, check_invariants) for spec, k in jobs]
    return results


def _run_job(job) -> RunMetrics:
    spec, replicate, check = job
    return run_replicate(spec, replicate, check)


def results_csv(metrics: list[RunMetrics]) -> str:
    lines = [RESULTS_HEADER]
    for m in metrics:
        lines.append(
            f"{m.scenario_id},{m.replicate},{m.seed},"
            f"{'on' if m.pfddr else 'off'},{m.n_faulty},{m.fault_types},"
            f"{m.blocks_excavated},{m.power_consumed_pct:.6f},"
            f"{m.robots_depleted},{m.tunnel_depth_m:.6f}")
    return "\n".join(lines) + "\n"


def detections_csv(metrics: list[RunMetrics]) -> str:
    lines = [DETECTIONS_HEADER]
    for m in metrics:
        for d in m.detections:
            lines.append(
                f"{m.scenario_id},{m.replicate},{d.t:.2f},{d.robot_id},"
                f"{d.category},{d.dc_at_detection:.6f}")
    return "\n".join(lines) + "\n"


def write_outputs(out_dir: Path, specs: list[ScenarioSpec],
                  metrics: list[RunMetrics], extra_manifest: dict | None = None) -> None:
    """Write results.csv, detections.csv and a re-run manifest."""
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "results.csv").write_text(results_csv(metrics), newline="\n")
    (out_dir / "detections.csv").write_text(detections_csv(metrics), newline="\n")
    manifest = {
        "artifact_version": ARTIFACT_VERSION,
        "scenarios": [
            {
                "scenario_id": spec.scenario_id,
                "seed": spec.seed,
                "replicates": spec.replicates,
                "config_toml": serialize_scenario(spec),
            }
            for spec in specs
        ],
    }
    if extra_manifest:
        manifest.update(extra_manifest)
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", newline="\n")
