"""Command-line entry point: ``run``, ``report``, ``grid`` and ``list``."""

from __future__ import annotations

import argparse
import logging
import multiprocessing
import os
import re
import sys

from mfsrbf.campaign_state import CampaignState, drive_campaign
from mfsrbf.config import RunConfig, load_run_config, write_run_config
from mfsrbf.errors import ConfigError, MfsrbfError
from mfsrbf.logic import metrics
from mfsrbf.logic.benchmarks import FidelityStack, default_costs, list_problems
from mfsrbf.logic.external import ExternalEvaluator
from mfsrbf.logic.multifidelity import FidelityLevels
from mfsrbf.output import writers

logger = logging.getLogger("mfsrbf.cli")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
REP_DIRECTORY = re.compile(r"rep_(\d{4,})")


def configure_logging(quiet=False, verbose=False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


def build_objective(config: RunConfig, seed):
    costs = config.beta if config.beta is not None else default_costs(config.n_levels)
    if config.problem == "external":
        return ExternalEvaluator(config.external, costs, seed=seed)
    return FidelityStack(config.problem, config.dim, config.n_levels, seed, costs, config.noise)


def rep_directory(out_dir, rep):
    return os.path.join(out_dir, f"rep_{rep:04d}")


def metrics_row(rep, record, objective):
    ref = metrics.reference_optimum(objective) if isinstance(objective, FidelityStack) else None
    row = {"rep": rep}
    row.update(metrics.campaign_metrics(record, objective, ref))
    return row


def run_repetition(task):
    """One campaign with its artifacts; returns ``(rep, metrics_row, error)``."""
    config, rep = task
    seed = config.seed + rep
    out_dir = rep_directory(config.output.directory, rep)
    state_file = os.path.join(out_dir, "state.json")
    objective = None
    try:
        objective = build_objective(config, seed)
        levels = FidelityLevels(objective.costs)
        with writers.HistoryWriter(os.path.join(out_dir, "history.csv"), objective.dim, objective.n_levels) as hw:
            state = drive_campaign(
                objective,
                budget=config.budget,
                srbf_config=config.srbf,
                acquisition_config=config.acquisition,
                pso_config=config.pso,
                campaign_config=config.campaign,
                levels=levels,
                on_row=hw,
            )
        state.save_state(state_file, config.output.compressed_state)
        if config.output.grid_resolution and objective.dim <= 2:
            writers.emit_surface_grid(state.model, config.output.grid_resolution, os.path.join(out_dir, "surface.csv"))
        record = state.to_record()
        row = metrics_row(rep, record, objective)
        error = None
        if record.termination_reason == "evaluation-failure":
            error = "evaluation failure"
        logger.info("rep %d: %s, CC=%.6g", rep, record.termination_reason, record.cc)
        return rep, row, error
    except MfsrbfError as e:
        logger.error("rep %d failed: %s", rep, e)
        return rep, None, str(e)
    except Exception as e:
        # a worker must not take the pool down with it
        logger.exception("rep %d crashed", rep)
        return rep, None, f"{type(e).__name__}: {e}"
    finally:
        if isinstance(objective, ExternalEvaluator):
            objective.close()


def run_repetitions(config: RunConfig):
    tasks = [(config, rep) for rep in range(config.repetitions)]
    if config.jobs == 1 or len(tasks) == 1:
        return [run_repetition(t) for t in tasks]
    with multiprocessing.Pool(processes=min(config.jobs, len(tasks))) as pool:
        return pool.map(run_repetition, tasks)


def cmd_run(args):
    config = load_run_config(args.config, seed=args.seed, jobs=args.jobs, directory=args.out)
    out_dir = config.output.directory
    os.makedirs(out_dir, exist_ok=True)
    write_run_config(config, os.path.join(out_dir, "effective_config.json"))
    logger.info("%s D=%d N=%d budget=%g, %d repetitions", config.problem, config.dim, config.n_levels,
                config.budget, config.repetitions)

    results = sorted(run_repetitions(config), key=lambda r: r[0])
    rows = [row for _, row, _ in results if row is not None]
    failures = [(rep, err) for rep, _, err in results if err is not None]
    if rows:
        writers.write_metrics(rows, os.path.join(out_dir, "metrics.csv"))
        writers.write_aggregate(rows, os.path.join(out_dir, "aggregate.csv"))
    for rep, err in failures:
        logger.error("repetition %d: %s", rep, err)
    return 1 if failures else 0


def rows_from_states(directory):
    """Metric rows recomputed from the saved ``rep_*`` states of a benchmark run.

    Returns ``None`` when the run has no effective config, is external, or has no states.
    """
    config_path = os.path.join(directory, "effective_config.json")
    if not os.path.isfile(config_path):
        return None
    config = load_run_config(config_path)
    if config.problem == "external":
        return None
    rows = []
    for name in sorted(os.listdir(directory)):
        match = REP_DIRECTORY.fullmatch(name)
        if match is None:
            continue
        rep = int(match.group(1))
        state_file = os.path.join(directory, name, "state.json")
        if not any(os.path.isfile(p) for p in (state_file, state_file[: -len(".json")] + ".zsave")):
            logger.warning("%s has no saved state, skipped", name)
            continue
        state = CampaignState.load_state(state_file)
        rows.append(metrics_row(rep, state.to_record(), build_objective(config, config.seed + rep)))
    return rows or None


def cmd_report(args):
    """Rebuild ``metrics.csv`` from saved states where possible, then the aggregate table."""
    status = 0
    for directory in args.dirs:
        path = os.path.join(directory, "metrics.csv")
        try:
            rows = rows_from_states(directory)
            if rows is None:
                rows = writers.read_metrics(path)
            else:
                writers.write_metrics(rows, path)
        except (OSError, MfsrbfError) as e:
            logger.error("cannot report %s: %s", directory, e)
            status = 1
            continue
        writers.write_aggregate(rows, os.path.join(directory, "aggregate.csv"))
        logger.info("aggregated %d repetitions in %s", len(rows), directory)
    return status


def cmd_grid(args):
    state = CampaignState.load_state(args.state)
    writers.emit_surface_grid(state.model, args.resolution, args.out)
    logger.info("surface written to %s", args.out)
    return 0


def cmd_list(args):
    for info in list_problems():
        dims = ",".join(str(d) for d in info["dims"])
        levels = ",".join(str(n) for n in info["levels"])
        lo, hi = info["domain"]
        print(f"{info['id']:4s} {info['name']:12s} D={dims:8s} N={levels:8s} domain=[{lo:g}, {hi:g}]")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="mfsrbf", description="Multi-fidelity SRBF active-learning optimization")
    parser.add_argument("--quiet", action="store_true", help="log warnings and errors only")
    parser.add_argument("--verbose", action="store_true", help="log debug messages")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a set of repeated campaigns from a config file")
    run.add_argument("--config", required=True, help="JSON run configuration")
    run.add_argument("--out", help="output directory (overrides output.directory)")
    run.add_argument("--seed", type=int, help="base seed (overrides seed)")
    run.add_argument("--jobs", type=int, help="worker processes (overrides jobs)")
    run.set_defaults(func=cmd_run)

    report = sub.add_parser("report", help="recompute metric and aggregate tables from saved campaign states")
    report.add_argument("dirs", nargs="+", help="run directories")
    report.set_defaults(func=cmd_report)

    grid = sub.add_parser("grid", help="export the surrogate surface of a saved campaign")
    grid.add_argument("--state", required=True, help="state.json or state.zsave")
    grid.add_argument("--resolution", type=int, default=101)
    grid.add_argument("--out", required=True, help="CSV file to write")
    grid.set_defaults(func=cmd_grid)

    lst = sub.add_parser("list", help="list the analytical problems")
    lst.set_defaults(func=cmd_list)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_logging(args.quiet, args.verbose)
    try:
        return args.func(args)
    except ConfigError as e:
        logger.error("invalid configuration: %s", e)
        return 2
    except MfsrbfError as e:
        logger.error("%s", e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
