"""Command line entry point for the desk-scale experiments.

Subcommands: ``lift``, ``circle``, ``reach``, ``bench``, ``dump-config``.
Exit codes: 0 on success, 2 on configuration errors, 3 when the back-end
shut down (or the force optimization aborted) during a run.

Tracking quality is data, not failure: a run with poor gains still exits 0
and reports its errors; only shutdowns are fatal.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import RunConfig
from .errors import ConfigError
from .experiments import run_bench, run_reach, run_tracking_task

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trimanip",
        description="Run the simulated three-finger manipulation experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seed=False, duration=False):
        p.add_argument("--config", type=Path, default=None, help="TOML config file")
        p.add_argument(
            "--out", type=Path, default=Path("out"), help="output directory for CSVs"
        )
        if seed:
            p.add_argument("--seed", type=int, default=0, help="RNG seed")
        if duration:
            p.add_argument(
                "--duration",
                type=float,
                default=None,
                help="override the task duration/period in seconds",
            )

    lift = sub.add_parser("lift", help="lift the cube vertically")
    add_common(lift, duration=True)
    circle = sub.add_parser("circle", help="slide the cube in a circle")
    add_common(circle, duration=True)
    for p in (lift, circle):
        p.add_argument(
            "--dump-qp",
            action="store_true",
            help="also write the first cycle's force-optimization QP as CSV",
        )
    reach = sub.add_parser("reach", help="scripted-policy reaching episodes")
    add_common(reach, seed=True)
    reach.add_argument("--episodes", type=int, default=None, help="episode count")
    bench = sub.add_parser("bench", help="measure loop throughput and QP latency")
    bench.add_argument("--config", type=Path, default=None)
    bench.add_argument("--out", type=Path, default=None, help="also write report CSV here")
    dump = sub.add_parser("dump-config", help="print the full default configuration")
    dump.add_argument("--config", type=Path, default=None, help="file to re-dump")
    return parser


def _load_config(args) -> RunConfig:
    if getattr(args, "config", None) is None:
        return RunConfig.defaults()
    return RunConfig.from_file(args.config)


def _apply_duration(config: RunConfig, command: str, duration) -> RunConfig:
    if duration is None:
        return config
    if duration <= 0:
        raise ConfigError("--duration must be positive")
    sections = {k: dict(v) for k, v in config.sections.items()}
    if command == "lift":
        sections["lift"]["duration"] = float(duration)
    else:
        sections["circle"]["period"] = float(duration)
    return RunConfig.from_mapping(sections)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _load_config(args)
        if args.command in ("lift", "circle"):
            config = _apply_duration(config, args.command, args.duration)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "dump-config":
        sys.stdout.write(config.dump())
        return EXIT_OK

    if args.command == "bench":
        result = run_bench(config)
        rows = result.as_rows()
        print("metric,value")
        for name, value in rows:
            print(f"{name},{value}")
        if args.out is not None:
            args.out.mkdir(parents=True, exist_ok=True)
            with open(args.out / "bench.csv", "w", encoding="utf-8") as f:
                f.write("metric,value\n")
                for name, value in rows:
                    f.write(f"{name},{value}\n")
        return EXIT_OK

    if args.command == "reach":
        result = run_reach(config, out_dir=args.out, seed=args.seed, episodes=args.episodes)
        if result.shutdown:
            print("backend shut down during the reach run", file=sys.stderr)
            return EXIT_RUNTIME
        print(f"episodes: {result.episodes}")
        if result.episodes:
            print(f"mean reward: {result.mean_rewards.mean():.6f}")
            print(f"mean final tip error [m]: {result.mean_final_error:.6f}")
        print(f"summary: {args.out / 'reach_summary.csv'}")
        return EXIT_OK

    # lift / circle
    result = run_tracking_task(
        config, args.command, out_dir=args.out, dump_qp=args.dump_qp
    )
    if result.shutdown:
        print(f"run aborted: {result.shutdown_message}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"task: {args.command}")
    print(f"cycles: {result.times.size}")
    print(f"final position error [m]: {result.final_position_error:.6f}")
    if args.command == "lift":
        print(f"final z error [m]: {result.final_z_error:.6f}")
    else:
        print(f"rms planar error [m]: {result.rms_planar_error:.6f}")
    print(f"max wrench-identity residual: {result.equality_residuals.max():.3e}")
    print(f"infeasible-fallback cycles: {result.fallback_cycles}")
    print(f"trajectory csv: {args.out / (args.command + '_trajectory.csv')}")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
