"""Command-line entry point: ``inertia-scope <subcommand> [options]``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from . import plotting
from .errors import InertiaScopeError, InputError, IoError, NumericError, PipelineError, ValidationError
from .report import prepare_dir, write_json
from .scenario import (
    ScenarioConfig,
    acceptance_ensemble_config,
    coi_shift_experiment,
    load_config,
    run_pipeline,
    simulate_scenario,
    sweep_integration_period,
    sweep_penetration,
)
from .swing_sim import DisturbanceEvent, EventKind, summarize

log = logging.getLogger("inertia_scope")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3

DEFAULT_PENETRATION_SETS = "none;1,16;2,7,13;1,2,7,13,16;1,2,7,13,16,22"
DEFAULT_SHIFT_SETS = "none;2,7,13"


def _bus_sets(text: str) -> list[tuple]:
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if chunk in ("", "none", "-"):
            out.append(())
            continue
        try:
            out.append(tuple(int(x) for x in chunk.split(",") if x.strip()))
        except ValueError:
            raise ValidationError("--bus-sets", f"bad bus list {chunk!r}") from None
    return out


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError("--T", f"bad number list {text!r}") from None


def _config(args, default: ScenarioConfig) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else default
    kw = {}
    if args.case:
        if not Path(args.case).exists():
            raise ValidationError("--case", f"no such file: {args.case}")
        kw["case_path"] = args.case
    if args.seed is not None:
        kw["seed"] = args.seed
    return dataclasses.replace(cfg, **kw) if kw else cfg


def single_trip_config() -> ScenarioConfig:
    return ScenarioConfig(events=(DisturbanceEvent(1.0, 23, -52.56, EventKind.GEN_TRIP),),
                          sim=dataclasses.replace(ScenarioConfig().sim, duration=20.0))


def cmd_simulate(args) -> int:
    cfg = _config(args, single_trip_config())
    out = prepare_dir(args.out)
    case, injected, result, trace = simulate_scenario(cfg)
    trace.to_csv(out / "traces.csv")
    summary = summarize(result)
    write_json(out / "summary.json", {"case": case.name, "events": len(injected), **summary})
    plotting.frequency_overlay(trace, out / "frequency.svg", coi=(result.t, result.coi_freq))
    print(f"nadir {summary['nadir_hz']:.4f} Hz at {summary['t_nadir_s']:.2f} s; artifacts in {out}")
    return EXIT_OK


def cmd_pipeline(args) -> int:
    cfg = _config(args, acceptance_ensemble_config())
    rep = run_pipeline(cfg, outdir=args.out)
    print(f"{len(rep.injected)} injected, {len(rep.events)} detected, {len(rep.estimated)} estimated")
    print(f"truth {rep.truth:.1f} MWs; MAE single {rep.mae_single:.3f} %, dynamic {rep.mae_dynamic:.3f} %")
    return EXIT_OK


def cmd_sweep_t(args) -> int:
    cfg = _config(args, acceptance_ensemble_config())
    sweep = sweep_integration_period(cfg, _float_list(args.T), outdir=args.out)
    print(f"optimal T {sweep.optimal_T:g} s (COI bus {sweep.coi_bus[sweep.optimal_T]}) over {sweep.n_events} events")
    return EXIT_OK


def cmd_sweep_penetration(args) -> int:
    cfg = _config(args, ScenarioConfig())
    sweep = sweep_penetration(cfg, _bus_sets(args.bus_sets), outdir=args.out)
    for r in sweep.rows:
        print(f"{100 * r.penetration:5.1f} %  E {r.energy_post:8.0f} MWs  RoCoF {r.initial_rocof:+.4f} Hz/s  "
              f"nadir {r.nadir:.4f} Hz at {r.t_nadir:.2f} s")
    return EXIT_OK


def cmd_coi_shift(args) -> int:
    cfg = _config(args, acceptance_ensemble_config())
    shift = coi_shift_experiment(cfg, _bus_sets(args.bus_sets), outdir=args.out)
    ref = shift.bus_sets[-1]
    for i, s in enumerate(shift.bus_sets):
        at = sum(shift.counts[i][b] for b in ref)
        print(f"replaced {list(s) or 'none'}: count at {list(ref)} {at}, elsewhere {shift.mass_outside(i, ref)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--case", help="grid case JSON (default: bundled ieee24)")
    common.add_argument("--config", help="scenario config JSON")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out", default="out", help="artifact directory (default: ./out)")
    common.add_argument("--verbose", "-v", action="store_true")

    p = argparse.ArgumentParser(prog="inertia-scope", description="Synthetic PMU inertia estimation workbench")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="simulate events and write PMU traces").set_defaults(fn=cmd_simulate)
    sub.add_parser("pipeline", parents=[common], help="run the full estimation pipeline").set_defaults(fn=cmd_pipeline)
    s = sub.add_parser("sweep-t", parents=[common], help="IDI sensitivity to the integration period")
    s.add_argument("--T", default="0.1,0.2,0.3,0.4,0.5", help="comma-separated periods in seconds")
    s.set_defaults(fn=cmd_sweep_t)
    s = sub.add_parser("sweep-penetration", parents=[common], help="frequency response vs renewable share")
    s.add_argument("--bus-sets", default=DEFAULT_PENETRATION_SETS,
                   help="';'-separated replacement lists, e.g. 'none;2,7,13'")
    s.set_defaults(fn=cmd_sweep_penetration)
    s = sub.add_parser("coi-shift", parents=[common], help="COI-area counts per replacement case")
    s.add_argument("--bus-sets", default=DEFAULT_SHIFT_SETS)
    s.set_defaults(fn=cmd_coi_shift)
    return p


def exit_code(exc: BaseException) -> int:
    while isinstance(exc, PipelineError):
        exc = exc.cause
    if isinstance(exc, (InputError, IoError)):
        return EXIT_INPUT
    if isinstance(exc, NumericError):
        return EXIT_NUMERIC
    return 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.fn(args)
    except InertiaScopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
