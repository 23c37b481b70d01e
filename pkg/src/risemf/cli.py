"""risemf command line: single runs, the three sweeps, and config validation.

Exit codes: 0 success, 1 usage error, 2 validation failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .config import PROFILES, ConfigError, ScenarioConfig, load_config, parse_override
from .optimizer import ALL_POLICIES
from .output import Table, header_meta, svg_plot
from .simulator import run
from .sweeps import SweepError, sweep_arrival, sweep_range, sweep_v, to_dbm
from .validate import validate

COMMANDS = ("run", "sweep-v", "sweep-range", "sweep-arrival", "validate")
POLICY_NAMES = tuple(p.value for p in ALL_POLICIES)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class ExperimentSpec:
    command: str
    config_path: str | None = None
    output_dir: str = "."
    seeds: tuple | None = None
    overrides: dict = field(default_factory=dict)
    policy: str | None = None
    profile: str | None = None


def _seed_list(text: str) -> tuple:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", dest="config_path", help="scenario TOML file")
    common.add_argument("--out", dest="output_dir", default=".", help="output directory")
    common.add_argument("--seeds", type=_seed_list, help="comma-separated seeds, e.g. 1,2,3")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="dotted config override (repeatable)")
    common.add_argument("--policy", choices=POLICY_NAMES)
    common.add_argument("--profile", choices=sorted(PROFILES))
    parser = _Parser(prog="risemf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def parse_args(argv) -> ExperimentSpec:
    ns = build_parser().parse_args(argv)
    overrides = {}
    for text in ns.overrides:
        try:
            key, value = parse_override(text)
        except ConfigError as exc:
            raise UsageError(str(exc)) from None
        overrides[key] = value
    if ns.config_path is not None and not Path(ns.config_path).is_file():
        raise UsageError(f"risemf: config file not found: {ns.config_path}")
    return ExperimentSpec(ns.command, ns.config_path, ns.output_dir, ns.seeds, overrides,
                          ns.policy, ns.profile)


def resolve_config(spec: ExperimentSpec) -> ScenarioConfig:
    overrides = dict(spec.overrides)
    if spec.policy is not None:
        overrides["run.policy"] = spec.policy
    return load_config(spec.config_path, spec.profile, overrides)


def _policies(spec: ExperimentSpec, config: ScenarioConfig) -> tuple:
    return (spec.policy,) if spec.policy else tuple(config.sweep.policies)


def _meta(spec, config, seeds):
    overrides = dict(spec.overrides)
    if spec.policy:
        overrides["run.policy"] = spec.policy
    return header_meta(spec.command, config, seeds, overrides, spec.profile)


def _write_svg(path: Path, text: str) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(text)


def cmd_run(spec, config, out: Path) -> list[Path]:
    seeds = spec.seeds if spec.seeds is not None else (config.run.seed,)
    if not seeds:
        raise SweepError("seed list is empty")
    table = Table("run", meta=_meta(spec, config, seeds))
    for s in seeds:
        m = run(config.with_overrides({"run.seed": s}))
        table.add(policy=m.policy, v=m.v, seed=s, avg_emfe_w_m2=m.avg_emfe, avg_delay_s=m.avg_delay,
                  avg_rate_bps=m.avg_rate, avg_power_w=m.avg_power, avg_local_bits=m.avg_local_bits,
                  avg_remote_bits=m.avg_remote_bits, stable=m.stable, min_drift_slack=m.min_drift_slack)
    return [table.write(out / "run.csv")]


def cmd_sweep_v(spec, config, out: Path) -> list[Path]:
    seeds = spec.seeds if spec.seeds is not None else config.sweep.seeds
    if not seeds:
        raise SweepError("seed list is empty")
    written, curves = [], {}
    for pol in _policies(spec, config):
        points = sweep_v(config.replace_section("run", policy=pol), config.sweep.v_values, seeds)
        table = Table("sweep-v", meta={**_meta(spec, config, seeds), "policy": pol})
        for p in points:
            for m in p.runs:
                table.add(v=p.v, seed=m.seed, avg_emfe_w_m2=m.avg_emfe, avg_delay_s=m.avg_delay,
                          avg_rate_bps=m.avg_rate, avg_power_w=m.avg_power, stable=m.stable)
        written.append(table.write(out / f"sweep_v_{pol}.csv"))
        curves[pol] = ([p.delay[0] * 1e3 for p in points], [to_dbm(p.emfe[0]) for p in points])
    _write_svg(out / "sweep_v.svg", svg_plot(curves, "average E2E delay (ms)",
                                            "average EMFE (dBm/m^2)", "EMFE-delay trade-off over V"))
    return written


def cmd_sweep_range(spec, config, out: Path) -> list[Path]:
    seeds = spec.seeds if spec.seeds is not None else config.sweep.seeds
    if not seeds:
        raise SweepError("seed list is empty")
    points = sweep_range(config, policies=_policies(spec, config), seeds=seeds)
    table = Table("sweep-range", meta=_meta(spec, config, seeds))
    curves = {}
    for p in points:
        table.add(distance_m=p.distance, policy=p.policy, v_star=p.tuned.v_star,
                  avg_emfe_w_m2=p.avg_emfe, avg_emfe_dbm_m2=to_dbm(p.avg_emfe))
        xs, ys = curves.setdefault(p.policy, ([], []))
        xs.append(p.distance)
        ys.append(to_dbm(p.avg_emfe))
    path = table.write(out / "sweep_range.csv")
    _write_svg(out / "sweep_range.svg", svg_plot(
        curves, "UE-AP distance (m)", "average EMFE (dBm/m^2)",
        f"EMFE vs range at {config.sweep.delay_bound * 1e3:g} ms delay bound"))
    return [path]


def cmd_sweep_arrival(spec, config, out: Path) -> list[Path]:
    seeds = spec.seeds if spec.seeds is not None else config.sweep.seeds
    if not seeds:
        raise SweepError("seed list is empty")
    points = sweep_arrival(config, policies=_policies(spec, config), seeds=seeds)
    table = Table("sweep-arrival", meta=_meta(spec, config, seeds))
    curves = {}
    for p in points:
        table.add(arrival_bps=p.arrival_rate, policy=p.policy, avg_emfe_dbm_m2=to_dbm(p.avg_emfe),
                  gain_db_vs_no_ris=p.gain_db_vs_no_ris)
        xs, ys = curves.setdefault(p.policy, ([], []))
        xs.append(p.arrival_rate)
        ys.append(to_dbm(p.avg_emfe))
    path = table.write(out / "sweep_arrival.csv")
    _write_svg(out / "sweep_arrival.svg", svg_plot(
        curves, "mean arrival rate (bit/s)", "average EMFE (dBm/m^2)",
        f"EMFE vs arrival rate at {config.sweep.delay_bound * 1e3:g} ms delay bound", logx=True))
    return [path]


HANDLERS = {"run": cmd_run, "sweep-v": cmd_sweep_v, "sweep-range": cmd_sweep_range,
            "sweep-arrival": cmd_sweep_arrival}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        spec = parse_args(argv)
        config = resolve_config(spec)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (ConfigError, OSError) as exc:
        print(f"risemf: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1

    if spec.command == "validate":
        report = validate(config)
        print(report.text(), end="")
        return 0 if report.ok else 2

    out = Path(spec.output_dir)
    try:
        if spec.seeds is not None and not spec.seeds:
            raise SweepError("seed list is empty")
        out.mkdir(parents=True, exist_ok=True)
        written = HANDLERS[spec.command](spec, config, out)
    except (SweepError, ConfigError) as exc:
        print(f"risemf: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"risemf: cannot write output: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
