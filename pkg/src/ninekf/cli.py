"""Command-line front end: simulate, estimate, compare, observability and
RMSE reporting. Defines how scenarios map to the CSV log schemas."""
from __future__ import annotations

import argparse
import json
import os
import shutil
import sys

import numpy as np
from scipy.spatial.transform import Rotation

from . import io
from .baseline import SrsState, srs_run
from .config import DEFAULT_CONFIG, Scenario, load_scenario
from .filter import FilterConfig, FilterState, run
from .io import CsvParseError
from .kinematics import JointState, forward_kinematics
from .liegroup import SE23, exp_se23, gamma
from .models import Frame, ImuSample
from .observability import build_observability
from .sim import (GroundMotionParams, SimulationResult, ground_truth,
                  sample_initial_error, synthesize_sensors)

RMSE_COMPONENTS = ["vx", "vy", "vz", "roll", "pitch", "yaw", "px", "py", "pz"]


def _apply_error_se23(X: SE23, xi) -> SE23:
    """Initial estimate with right-invariant error exp(xi): Xbar = exp(xi) X."""
    return exp_se23(xi).compose(X)


def _initial_proposed(truth_row, xi) -> SE23:
    X_true = SE23(io.quat_to_rot(truth_row[1:5]), truth_row[5:8].copy(),
                  truth_row[8:11].copy())
    return _apply_error_se23(X_true, xi)


def _initial_srs(scenario: Scenario, truth_row, streams, xi) -> SrsState:
    R_B = io.quat_to_rot(truth_row[21:25])
    v_B = truth_row[25:28].copy()
    p_B = truth_row[28:31].copy()
    X = _apply_error_se23(SE23(R_B, v_B, p_B), xi)
    d = X.p + X.R @ forward_kinematics(scenario.chain, streams.encoder_q[0])
    P = np.diag(np.concatenate([scenario.init_cov_diag,
                                np.full(3, scenario.init_cov_diag[6])]))
    return SrsState(X.R, X.v, X.p, d, P, float(truth_row[0]))


def _sample_error(scenario: Scenario, seed: int) -> np.ndarray:
    return sample_initial_error(seed,
                                rot_range_deg=scenario.rot_error_range_deg,
                                vel_range=scenario.vel_error_range,
                                pos_range=scenario.pos_error_range)


def run_proposed(scenario: Scenario, streams, truth, xi):
    cfg = FilterConfig(
        noise=scenario.rig.noise,
        initial_state=_initial_proposed(truth[0], xi),
        initial_cov_diag=scenario.init_cov_diag,
        reorth_threshold=scenario.reorth_threshold,
    )
    return run(streams, cfg, scenario.chain)


def run_srs(scenario: Scenario, streams, truth, xi):
    initial = _initial_srs(scenario, truth[0], streams, xi)
    return srs_run(streams, initial, scenario.chain, scenario.rig.noise,
                   gravity=scenario.motion.gravity,
                   fk_pos_sd=scenario.fk_pos_sd)


def _truth_rows(result: SimulationResult) -> np.ndarray:
    tr = result.truth
    return np.hstack([
        np.array([[r.t] for r in tr]),
        io.rots_to_quats([r.rel.R for r in tr]),
        np.array([r.rel.v for r in tr]),
        np.array([r.rel.p for r in tr]),
        io.rots_to_quats([r.ground.R for r in tr]),
        np.array([r.ground.v for r in tr]),
        np.array([r.ground.p for r in tr]),
        io.rots_to_quats([r.R_B for r in tr]),
        np.array([r.v_B for r in tr]),
        np.array([r.p_B for r in tr]),
        np.array([r.foot_d for r in tr]),
    ])


def _trace_rows(trace) -> np.ndarray:
    def rvp(rec):
        if hasattr(rec, "Xhat"):
            return rec.Xhat.R, rec.Xhat.v, rec.Xhat.p
        return rec.R, rec.v, rec.p
    states = [rvp(rec) for rec in trace]
    innov = np.array([[rec.innovation_norm] for rec in trace])
    innov[~np.isfinite(innov)] = 0.0
    return np.hstack([
        np.array([[rec.t] for rec in trace]),
        io.rots_to_quats([s[0] for s in states]),
        np.array([s[1] for s in states]),
        np.array([s[2] for s in states]),
        np.array([rec.P_diag for rec in trace]),
        innov,
    ])


def rmse_report(trace_rows: np.ndarray, truth_rows: np.ndarray,
                steady_state_start: float, frame: str = "relative") -> dict:
    """Per-component RMSE over t >= steady_state_start.

    frame selects the truth columns: 'relative' compares against the relative
    state, 'world' against the world pose of the robot base.
    """
    n = min(len(trace_rows), len(truth_rows))
    tr = trace_rows[:n]
    th = truth_rows[:n]
    mism = np.nonzero(np.abs(tr[:, 0] - th[:, 0]) > 1e-9)[0]
    if mism.size:
        i = int(mism[0])
        raise ValueError(
            f"trace/truth timestamps misaligned at row {i}: "
            f"{tr[i, 0]} vs {th[i, 0]}")
    off = 1 if frame == "relative" else 21
    mask = tr[:, 0] >= steady_state_start
    if not np.any(mask):
        raise ValueError("steady_state_start is beyond the data horizon")
    tr = tr[mask]
    th = th[mask]
    verr = tr[:, 5:8] - th[:, off + 4:off + 7]
    perr = tr[:, 8:11] - th[:, off + 7:off + 10]
    Re = io.quats_to_rots(tr[:, 1:5])
    Rt = io.quats_to_rots(th[:, off:off + 4])
    err = Re @ Rt.transpose(0, 2, 1)
    rpy = Rotation.from_matrix(err).as_euler("ZYX", degrees=True)[:, ::-1]
    rmse = {}
    for k, name in enumerate(["vx", "vy", "vz"]):
        rmse[name] = float(np.sqrt(np.mean(verr[:, k] ** 2)))
    for k, name in enumerate(["roll", "pitch", "yaw"]):
        rmse[name] = float(np.sqrt(np.mean(rpy[:, k] ** 2)))
    for k, name in enumerate(["px", "py", "pz"]):
        rmse[name] = float(np.sqrt(np.mean(perr[:, k] ** 2)))
    return rmse


def _write_logs(out_dir, result: SimulationResult, config_path):
    os.makedirs(out_dir, exist_ok=True)
    s = result.streams
    io.write_imu_csv(os.path.join(out_dir, "imu_robot.csv"),
                     s.robot_t, s.robot_omega, s.robot_accel)
    io.write_imu_csv(os.path.join(out_dir, "imu_ground.csv"),
                     s.ground_t, s.ground_omega, s.ground_accel)
    io.write_encoder_csv(os.path.join(out_dir, "encoders.csv"),
                         s.encoder_t, s.encoder_q, s.encoder_qdot)
    io.write_truth_csv(os.path.join(out_dir, "truth.csv"), result.truth)
    if config_path is not None:
        dest = os.path.join(out_dir, "scenario.cfg")
        if os.path.abspath(config_path) != os.path.abspath(dest):
            shutil.copyfile(config_path, dest)


def _resolve_seed(args_seed, scenario_seed):
    if args_seed is not None:
        return args_seed
    env = os.environ.get("NIEKF_SEED")
    if env is not None:
        return int(env)
    return scenario_seed


def cmd_simulate(args) -> int:
    scenario = load_scenario(args.config)
    seed = _resolve_seed(args.seed, scenario.rig.seed)
    scenario = load_scenario(args.config, seed_override=seed)
    result = synthesize_sensors(scenario.motion, scenario.rig, scenario.chain,
                                scenario.standing, scenario.q_stand,
                                scenario.duration)
    _write_logs(args.out, result, args.config)
    manifest = {
        "command": "simulate",
        "seed": seed,
        "duration": scenario.duration,
        "robot_imu_rate": scenario.rig.robot_imu_rate,
        "ground_imu_rate": scenario.rig.ground_imu_rate,
        "encoder_rate": scenario.rig.encoder_rate,
        "files": ["imu_robot.csv", "imu_ground.csv", "encoders.csv",
                  "truth.csv", "scenario.cfg"],
        "rows": {
            "imu_robot.csv": int(result.streams.robot_t.size),
            "imu_ground.csv": int(result.streams.ground_t.size),
            "encoders.csv": int(result.streams.encoder_t.size),
            "truth.csv": len(result.truth),
        },
    }
    with open(os.path.join(args.out, "manifest.json"), "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2)
    print(f"wrote {len(manifest['files'])} logs to {args.out}")
    return 0


def _load_logs(args):
    config = args.config or os.path.join(args.logs, "scenario.cfg")
    scenario = load_scenario(config)
    streams = io.read_streams(args.logs)
    _, truth = io.read_csv(os.path.join(args.logs, "truth.csv"), io.TRUTH_HEADER)
    return scenario, streams, truth


def cmd_estimate(args) -> int:
    scenario, streams, truth = _load_logs(args)
    if args.init_error == "sample":
        seed = _resolve_seed(args.seed, scenario.rig.seed)
        xi = _sample_error(scenario, seed)
    else:
        xi = np.zeros(9)
    if args.filter == "proposed":
        trace = run_proposed(scenario, streams, truth, xi)
    else:
        trace = run_srs(scenario, streams, truth, xi)
    out_dir = args.out or args.logs
    os.makedirs(out_dir, exist_ok=True)
    trace_path = os.path.join(out_dir, f"trace_{args.filter}.csv")
    io.write_trace_csv(trace_path, trace)
    summary = {
        "filter": args.filter,
        "frame": "relative" if args.filter == "proposed" else "world",
        "rows": len(trace),
        "initial_error": list(map(float, xi)),
        "final_t": float(trace[-1].t),
    }
    with open(os.path.join(out_dir, f"summary_{args.filter}.json"), "w",
              encoding="utf-8") as f:
        json.dump(summary, f, indent=2)
    print(f"wrote {trace_path} ({len(trace)} rows)")
    return 0


def cmd_rmse(args) -> int:
    scenario, _, truth = _load_logs(args)
    _, trace = io.read_csv(os.path.join(args.logs, f"trace_{args.filter}.csv"),
                           io.TRACE_HEADER)
    start = (args.steady_state_start if args.steady_state_start is not None
             else scenario.steady_state_start)
    frame = "relative" if args.filter == "proposed" else "world"
    rmse = rmse_report(trace, truth, start, frame)
    for name in RMSE_COMPONENTS:
        print(f"{name:>6}: {rmse[name]:.6f}")
    out = os.path.join(args.logs, f"rmse_{args.filter}.csv")
    io.write_csv(out, RMSE_COMPONENTS, [[rmse[c] for c in RMSE_COMPONENTS]])
    print(f"wrote {out}")
    return 0


def cmd_compare(args) -> int:
    scenario = load_scenario(args.config)
    base_seed = _resolve_seed(args.seed, scenario.rig.seed)
    os.makedirs(args.out, exist_ok=True)
    rows = []
    for trial in range(args.trials):
        seed = base_seed + trial
        trial_scenario = load_scenario(args.config, seed_override=seed)
        result = synthesize_sensors(trial_scenario.motion, trial_scenario.rig,
                                    trial_scenario.chain,
                                    trial_scenario.standing,
                                    trial_scenario.q_stand,
                                    trial_scenario.duration)
        truth = _truth_rows(result)
        xi = _sample_error(trial_scenario, seed)
        for name, runner, frame in (("proposed", run_proposed, "relative"),
                                    ("srs", run_srs, "world")):
            trace = _trace_rows(runner(trial_scenario, result.streams, truth, xi))
            rmse = rmse_report(trace, truth, trial_scenario.steady_state_start,
                               frame)
            rows.append((trial, name, rmse))

    header = ["trial", "filter"] + RMSE_COMPONENTS
    with open(os.path.join(args.out, "compare.csv"), "w", encoding="utf-8") as f:
        f.write(",".join(header) + "\n")
        for trial, name, rmse in rows:
            f.write(",".join([str(trial), name]
                             + [f"{rmse[c]:.17g}" for c in RMSE_COMPONENTS]) + "\n")

    means = {}
    for name in ("srs", "proposed"):
        sel = [r[2] for r in rows if r[1] == name]
        means[name] = {c: float(np.mean([r[c] for r in sel]))
                       for c in RMSE_COMPONENTS}
    with open(os.path.join(args.out, "compare_summary.csv"), "w",
              encoding="utf-8") as f:
        f.write("component,srs,proposed\n")
        for c in RMSE_COMPONENTS:
            f.write(f"{c},{means['srs'][c]:.17g},{means['proposed'][c]:.17g}\n")

    units = {"vx": "m/s", "vy": "m/s", "vz": "m/s", "roll": "deg",
             "pitch": "deg", "yaw": "deg", "px": "m", "py": "m", "pz": "m"}
    print(f"{'State variables':<20}{'SRS':>10}{'Proposed':>10}")
    for c in RMSE_COMPONENTS:
        label = f"{c} ({units[c]})"
        print(f"{label:<20}{means['srs'][c]:>10.3f}{means['proposed'][c]:>10.3f}")
    print(f"wrote {os.path.join(args.out, 'compare.csv')}")
    return 0


def cmd_observability(args) -> int:
    scenario = load_scenario(args.config)
    motion = (GroundMotionParams.stationary() if args.stationary
              else scenario.motion)
    dt = 1.0 / scenario.rig.robot_imu_rate
    states, inputs, joints = [], [], []
    from .sim import _ground_imu_truth
    for j in range(args.steps):
        t = j * dt
        rec = ground_truth(t, motion, scenario.standing, scenario.chain,
                           scenario.q_stand)
        states.append(FilterState(rec.rel, np.eye(9), t))
        w, a = _ground_imu_truth(t, motion)
        inputs.append(ImuSample(t, w, a, Frame.GROUND_D))
        joints.append(JointState(scenario.q_stand,
                                 np.zeros(scenario.chain.njoints), t))
    report = build_observability(states, inputs, joints, scenario.chain,
                                 args.steps)
    print(f"ground: {'stationary' if args.stationary else 'moving'}")
    print(f"steps: {args.steps}")
    print(f"rank: {report.rank}")
    print("singular values: "
          + " ".join(f"{s:.6e}" for s in report.singular_values))
    print(f"classification: {report.classification.value}")
    if report.nullspace.shape[1]:
        print("null-space basis (columns, tangent order rot/vel/pos):")
        for row in report.nullspace:
            print("  " + " ".join(f"{x:+.6f}" for x in row))
    return 0


def cmd_init_config(args) -> int:
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(DEFAULT_CONFIG)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ninekf",
        description="Relative-state InEKF for legged robots on moving ground: "
                    "simulator, estimators, observability and RMSE tools.")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="synthesize sensor logs")
    sim.add_argument("--config", required=True)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=cmd_simulate)

    est = sub.add_parser("estimate", help="run a filter over logs")
    est.add_argument("--filter", choices=["proposed", "srs"], required=True)
    est.add_argument("--logs", required=True)
    est.add_argument("--config", default=None)
    est.add_argument("--init-error", choices=["none", "sample"], default="none")
    est.add_argument("--seed", type=int, default=None)
    est.add_argument("--out", default=None)
    est.set_defaults(func=cmd_estimate)

    rm = sub.add_parser("rmse", help="RMSE of a trace against ground truth")
    rm.add_argument("--logs", required=True)
    rm.add_argument("--config", default=None)
    rm.add_argument("--filter", choices=["proposed", "srs"], required=True)
    rm.add_argument("--steady-state-start", type=float, default=None)
    rm.set_defaults(func=cmd_rmse)

    cmp_ = sub.add_parser("compare", help="seeded RMSE comparison of both filters")
    cmp_.add_argument("--config", required=True)
    cmp_.add_argument("--trials", type=int, default=20)
    cmp_.add_argument("--seed", type=int, default=None)
    cmp_.add_argument("--out", required=True)
    cmp_.set_defaults(func=cmd_compare)

    obs = sub.add_parser("observability", help="local observability report")
    obs.add_argument("--config", required=True)
    obs.add_argument("--stationary", action="store_true")
    obs.add_argument("--steps", type=int, default=10)
    obs.set_defaults(func=cmd_observability)

    ic = sub.add_parser("init-config", help="write a default scenario config")
    ic.add_argument("--out", default="scenario.cfg")
    ic.set_defaults(func=cmd_init_config)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CsvParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (ValueError, OSError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
