"""Result emission: JSON result document plus CSV tables.

Emitted files per run directory:
  result.json     full bundle (theta*, final values, config echo, timing)
  trace.csv       one row per solver step: t,lambda,best_R,mean_R,V,E,wall_ms
  trajectory.csv  joint positions per path sample: i,s,q_1..q_n
  path_error.csv  per-sample tracking errors: i,translation_err,rotation_err

Numeric text is exact: CSV floats carry 17 significant digits and JSON uses
shortest-round-trip floats, so re-parsing reproduces every value bit for
bit. The trace CSV is fully deterministic for a fixed seed; its wall_ms
column is a deterministic cost clock (cumulative objective evaluations),
while measured per-step milliseconds live in result.json under "timing".
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .rotations import matrix_to_quat
from .runner import ResultBundle

TRACE_HEADER = "t,lambda,best_R,mean_R,V,E,wall_ms"


def fmt(x: float) -> str:
    """17-significant-digit text; parses back to the identical float64."""
    return format(float(x), ".17g")


def _pose_list(rotations: np.ndarray, translations: np.ndarray) -> list:
    return [
        {
            "quaternion": [float(v) for v in matrix_to_quat(rot)],
            "translation": [float(v) for v in pos],
        }
        for rot, pos in zip(rotations, translations)
    ]


def bundle_to_dict(bundle: ResultBundle) -> dict:
    trace = bundle.trace
    return {
        "scenario": bundle.scenario_name,
        "method": bundle.method,
        "seed": bundle.seed,
        "tool_version": bundle.tool_version,
        "theta_star": [[float(v) for v in row] for row in bundle.theta_star],
        "final": {
            "V": float(bundle.final.V),
            "E": float(bundle.final.E),
            "R": float(bundle.final.R),
            "feasible": bool(bundle.final.feasible),
            "lambda": float(bundle.final_lambda),
        },
        "trace_meta": trace.meta,
        "relative_poses": _pose_list(
            bundle.relative_rotations, bundle.relative_translations
        ),
        "ik_failures": [[int(i), float(r)] for i, r in bundle.ik_failures],
        "timing": {
            "wall_s": bundle.wall_s,
            "per_step_ms": [s.wall_ms for s in trace.steps],
        },
        "config_echo": bundle.config_echo,
    }


def emit(bundle: ResultBundle, out_dir) -> dict:
    """Write all result files; returns {kind: path}. Creates out_dir."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)

        result_path = out / "result.json"
        result_path.write_text(json.dumps(bundle_to_dict(bundle), indent=2) + "\n")

        trace_path = out / "trace.csv"
        lines = [TRACE_HEADER]
        for s in bundle.trace.steps:
            lines.append(
                ",".join(
                    [
                        str(s.t),
                        fmt(s.lam),
                        fmt(s.best_R),
                        fmt(s.mean_R),
                        fmt(s.V),
                        fmt(s.E),
                        fmt(float(s.evals)),
                    ]
                )
            )
        trace_path.write_text("\n".join(lines) + "\n")

        traj_path = out / "trajectory.csv"
        n = bundle.trajectory.shape[1]
        header = "i,s," + ",".join(f"q_{j + 1}" for j in range(n))
        lines = [header]
        for i, row in enumerate(bundle.trajectory):
            lines.append(
                ",".join([str(i), fmt(bundle.s_grid[i])] + [fmt(v) for v in row])
            )
        traj_path.write_text("\n".join(lines) + "\n")

        err_path = out / "path_error.csv"
        lines = ["i,translation_err,rotation_err"]
        for i, (te, re_) in enumerate(
            zip(bundle.translation_errors, bundle.rotation_errors)
        ):
            lines.append(f"{i},{fmt(te)},{fmt(re_)}")
        err_path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"failed writing results under {out}: {exc}") from exc

    return {
        "result": result_path,
        "trace": trace_path,
        "trajectory": traj_path,
        "path_error": err_path,
    }
