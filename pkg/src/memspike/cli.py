"""Batch command-line interface.

Every experiment is a subcommand reading JSON configs and writing CSV/JSON
outputs plus a ``manifest.json`` into its ``--out`` directory. Exit codes:
0 success, 1 usage error, 2 invalid input, 3 runtime or numerical failure.
Outputs contain no timestamps, so reruns with the same manifest are
byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import decay_times, detect_spikes, find_omega0
from .circuit import SimConfig, SolverError, run_transient, trace_from_csv, \
    trace_to_csv
from .device import DeviceParams, dc_conduction_profile
from .learnnet import NoteGraph, Profile, generate, seed_from_sequence
from .netlist import NetlistError, netlist_hash, parse_netlist
from .tmaze import ControllerNet, MazeConfig, run_experiment, switch_latency

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_RUNTIME = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


class InputError(ValueError):
    """Bad input file or config value."""


def _read_text(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"no such file: {path}")
    return p.read_text()


def _read_json(path: str) -> dict:
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: invalid JSON at line {e.lineno}: "
                         f"{e.msg}") from None


def _write_text(out_dir: Path, name: str, text: str) -> None:
    (out_dir / name).write_text(text)


def _write_json(out_dir: Path, name: str, obj) -> None:
    _write_text(out_dir, name, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_manifest(out_dir: Path, subcommand: str, inputs: dict,
                    rng_seed, net_hash: str | None) -> None:
    _write_json(out_dir, "manifest.json", {
        "subcommand": subcommand,
        "inputs": inputs,
        "out_dir": str(out_dir),
        "rng_seed": rng_seed,
        "tool_version": __version__,
        "netlist_hash": net_hash,
    })


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_simulate(args) -> int:
    out = _out_dir(args)
    try:
        net = parse_netlist(_read_text(args.netlist))
    except NetlistError as e:
        raise InputError(f"{args.netlist}: {e}") from None
    cfg_doc = _read_json(args.config)
    if args.seed is not None:
        cfg_doc["rng_seed"] = args.seed
    try:
        config = SimConfig.from_dict(cfg_doc)
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"{args.config}: {e}") from None
    trace = run_transient(net, config)
    _write_text(out, "trace.csv",
                trace_to_csv(trace, list(net.node_ids),
                             [b.id for b in net.branches]))
    _write_manifest(out, "simulate",
                    {"netlist": args.netlist, "config": args.config},
                    config.rng_seed, netlist_hash(net))
    return EXIT_OK


def _cmd_spike(args) -> int:
    out = _out_dir(args)
    times, cols = trace_from_csv(_read_text(args.trace))
    if args.column is not None:
        if args.column not in cols:
            raise InputError(f"{args.trace}: no column {args.column!r}")
        series = cols[args.column]
        column = args.column
    elif len(cols) == 1:
        column, series = next(iter(cols.items()))
    else:
        raise InputError(f"{args.trace} has {len(cols)} columns; "
                         f"pick one with --column")
    spikes = detect_spikes(times, series,
                           threshold_frac=args.threshold_frac,
                           min_separation=args.min_separation,
                           baseline_window=args.baseline_window)
    filled = []
    for sp in spikes:
        try:
            filled.append(decay_times(times, series, sp))
        except ValueError:
            filled.append(sp)
    primary = max(filled, key=lambda s: abs(s.i_peak - s.i_baseline)) \
        if filled else None
    _write_json(out, "spike_metrics.json",
                primary.to_dict() if primary else
                {"t_peak": None, "i_peak": None, "i_baseline": None,
                 "tau50": None, "tau90": None, "tau95": None, "tau99": None})
    fields = ["n_spikes", "t_peak", "i_peak", "i_baseline",
              "tau50", "tau90", "tau95", "tau99"]
    row = [len(filled)] + ([primary.to_dict()[f] for f in fields[1:]]
                           if primary else [None] * 7)
    _write_text(out, "spike_summary.csv",
                ",".join(fields) + "\n"
                + ",".join("" if v is None else repr(float(v)) if f != "n_spikes"
                           else str(v) for f, v in zip(fields, row)) + "\n")
    _write_manifest(out, "spike", {"trace": args.trace, "column": column},
                    None, None)
    return EXIT_OK


def _cmd_hysteresis(args) -> int:
    out = _out_dir(args)
    try:
        params = DeviceParams.from_dict(_read_json(args.params))
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"{args.params}: {e}") from None
    spec = _read_json(args.sweep)
    try:
        omegas = np.logspace(np.log10(float(spec["omega_min"])),
                             np.log10(float(spec["omega_max"])),
                             int(spec["n_points"]))
        amplitude = float(spec["amplitude"])
        n_periods = int(spec.get("n_periods", 3))
        ppp = int(spec.get("points_per_period", 512))
    except KeyError as e:
        raise InputError(f"{args.sweep}: missing field {e.args[0]!r}") from None
    result = find_omega0(params, amplitude, omegas, n_periods=n_periods,
                         points_per_period=ppp)
    lines = ["omega,loop_area"]
    for w, a in result.to_rows():
        lines.append(f"{w!r},{a!r}")
    _write_text(out, "hysteresis.csv", "\n".join(lines) + "\n")
    _write_json(out, "hysteresis_summary.json",
                {"omega0": result.omega0, "degenerate": result.degenerate,
                 "amplitude": amplitude})
    _write_manifest(out, "hysteresis",
                    {"params": args.params, "sweep": args.sweep}, None, None)
    return EXIT_OK


def _cmd_profile(args) -> int:
    out = _out_dir(args)
    try:
        params = DeviceParams.from_dict(_read_json(args.params))
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"{args.params}: {e}") from None
    spec = _read_json(args.config)
    try:
        table = dc_conduction_profile(params, float(spec["v"]),
                                      float(spec["duration"]),
                                      int(spec["n_samples"]))
    except KeyError as e:
        raise InputError(f"{args.config}: missing field {e.args[0]!r}") from None
    profile = Profile(table=tuple(table.tolist()), source_params=params)
    _write_json(out, "profile.json", profile.to_dict())
    _write_manifest(out, "profile",
                    {"params": args.params, "config": args.config}, None, None)
    return EXIT_OK


def _cmd_compose(args) -> int:
    out = _out_dir(args)
    seed_text = _read_text(args.seed_file)
    try:
        seq = [int(line) for line in seed_text.split()]
    except ValueError:
        raise InputError(f"{args.seed_file}: expected one integer per line") \
            from None
    try:
        profile = Profile.from_dict(_read_json(args.profile))
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"{args.profile}: {e}") from None
    spec = _read_json(args.config)
    rng_seed = args.seed if args.seed is not None \
        else int(spec.get("rng_seed", 0))
    try:
        graph = seed_from_sequence(seq, int(spec["n_notes"]), profile,
                                   epsilon=float(spec.get("epsilon", 0.01)),
                                   rng_seed=rng_seed,
                                   invert=bool(spec.get("invert", False)))
        sequence = generate(graph, int(spec["length"]),
                            int(spec.get("start", seq[0] if seq else 0)))
    except KeyError as e:
        raise InputError(f"{args.config}: missing field {e.args[0]!r}") from None
    _write_text(out, "sequence.txt",
                "\n".join(str(n) for n in sequence) + "\n")
    _write_json(out, "graph_counts.json",
                {"n_notes": graph.n_notes, "counts": graph.counts.tolist()})
    _write_manifest(out, "compose",
                    {"seed_file": args.seed_file, "profile": args.profile,
                     "config": args.config}, rng_seed, None)
    return EXIT_OK


def _cmd_tmaze(args) -> int:
    out = _out_dir(args)
    doc = _read_json(args.config)
    controller_doc = doc.pop("controller", None)
    if args.seed is not None:
        doc["rng_seed"] = args.seed
    try:
        config = MazeConfig.from_dict(doc)
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"{args.config}: {e}") from None
    if controller_doc is not None:
        try:
            controller = ControllerNet.from_dict(controller_doc)
        except (KeyError, TypeError, ValueError, NetlistError) as e:
            raise InputError(f"{args.config}: controller: {e}") from None
    else:
        from .reference import reference_controller
        controller = reference_controller()
    log = run_experiment(controller, config)
    _write_text(out, "trial_log.csv", log.to_csv())
    correct = log.correctness()
    _write_json(out, "tmaze_summary.json", {
        "trials": config.trials,
        "switch_at": config.switch_at,
        "accuracy_overall": float(correct.mean()),
        "accuracy_pre_switch_last50": float(
            correct[max(0, config.switch_at - 50):config.switch_at].mean())
        if config.switch_at > 0 else None,
        "pre_switch_trials_to_criterion":
            log.summary["pre_switch_trials_to_criterion"],
        "post_switch_trials_to_criterion":
            log.summary["post_switch_trials_to_criterion"],
    })
    _write_manifest(out, "tmaze", {"config": args.config}, config.rng_seed,
                    netlist_hash(controller.netlist))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    from .sweep import sweep_three_mem, sweep_tmaze
    out = _out_dir(args)
    progress = None
    if args.verbose:
        progress = lambda row: print(f"  {row}", file=sys.stderr)
    result = sweep_three_mem(progress=progress)
    _write_json(out, "three_mem.json", result["netlist"])
    _write_json(out, "three_mem_config.json", result["sim_config"])
    header = ["index", "divider_pols", "divider_x0", "bridge", "mobility",
              "ok", "spikes", "has_negative"]
    lines = [",".join(header)]
    for row in result["rows"]:
        lines.append(",".join(json.dumps(row.get(h)).replace(",", ";")
                              for h in header))
    _write_text(out, "sweep_report.csv", "\n".join(lines) + "\n")
    calibration = sweep_tmaze(progress=progress)
    _write_json(out, "tmaze_calibration.json", calibration)
    from .netlist import parse_netlist as _pn
    net_hash = netlist_hash(_pn(json.dumps(result["netlist"])))
    _write_manifest(out, "sweep", {}, None, net_hash)
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="memspike", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("simulate", help="netlist + config -> trace CSV")
    p.add_argument("--netlist", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("spike", help="trace CSV -> spike metrics JSON")
    p.add_argument("--trace", required=True)
    p.add_argument("--column", default=None)
    p.add_argument("--threshold-frac", type=float, default=0.25)
    p.add_argument("--min-separation", type=float, default=0.5)
    p.add_argument("--baseline-window", type=float, default=4.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_spike)

    p = sub.add_parser("hysteresis",
                       help="device params + sweep spec -> lobe-area CSV")
    p.add_argument("--params", required=True)
    p.add_argument("--sweep", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_hysteresis)

    p = sub.add_parser("profile", help="device params -> conduction profile")
    p.add_argument("--params", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("compose", help="seed melody + profile -> sequence")
    p.add_argument("--seed-file", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_compose)

    p = sub.add_parser("tmaze", help="maze config -> trial log CSV + summary")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_tmaze)

    p = sub.add_parser("sweep",
                       help="regenerate the reference network parameters")
    p.add_argument("--out", required=True)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=_cmd_sweep)
    return parser


def cli_dispatch(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (NetlistError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverError, RuntimeError, OverflowError, FloatingPointError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
