import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, Optional

import click
import numpy as np
import pandas as pd
from pydantic import ValidationError

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.append(str(project_root))

# Imports
from algebra.galois_core import enumerate_subsets, get_ring
from app.components.run_options import (
    clamp_callback, n_list_callback, parse_int_list, shot_list_callback,
    validate_n_list
)
from bases.mub_bases import get_family, verify_suite
from config.run_config import RingSpec, RunConfig, StateEnsembleSpec
from config.settings import (
    APP_NAME, DEFAULT_CLAMP, DEFAULT_REPEATS, DEFAULT_SAMPLES, DEFAULT_SEED,
    DEFAULT_SHOTS, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, LOG_FILE, LOG_LEVEL,
    MATRIX_TOL, N_JOBS, REPORTS_DIR, RESULTS_DIR, PUBLISHED_TOLERANCE
)
from estimation.ensembles import state_at
from estimation.error_analysis import (
    cramer_rao, cramer_rao_stability, monte_carlo_table
)
from estimation.tomography import (
    born_probabilities, empirical_mse, linear_inversion_mse,
    physicality_report, probability_map_rank, reconstruct_monomial,
    reconstruct_projector, redundancy_check
)
from utils.errors import ConfigError, QuquartError, RingSpecError
from utils.logging_setup import setup_logging, status_fail, status_ok
from utils.matrix_io import elem_to_json
from utils.report_writer import json_dumps, write_csv, write_json_report

logger = logging.getLogger(__name__)

SHOTS_NOTE = "shots are per measurement setup"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _run(ctx: click.Context, body: Callable[[], int]) -> None:
    """Map library errors onto the exit-code contract"""
    try:
        code = body()
    except (ValidationError, ConfigError, RingSpecError) as e:
        status_fail(f"Configuration rejected: {e}")
        code = EXIT_USAGE
    except QuquartError as e:
        status_fail(f"Numerical failure: {e}")
        code = EXIT_NUMERIC
    ctx.exit(code)


def _output_path(config: RunConfig, stem: str) -> Path:
    if config.out is not None:
        return config.out
    directory = REPORTS_DIR if config.fmt == "json" else RESULTS_DIR
    return directory / f"{stem}_seed{config.seed}.{config.fmt}"


def _emit(frame: pd.DataFrame, config: RunConfig, stem: str, extra: Optional[Dict] = None) -> Path:
    """CSV with a comment header, or a JSON report holding the same rows"""
    path = _output_path(config, stem)
    if config.fmt == "csv":
        header = [
            f"generated_at {_now()}",
            f"seed {config.seed}",
            SHOTS_NOTE,
            f"config {json.dumps(config.echo(), sort_keys=True)}",
        ]
        write_csv(frame, path, header)
    else:
        payload = {"config": config.echo(), "note": SHOTS_NOTE, "rows": frame}
        payload.update(extra or {})
        write_json_report(payload, path)
    return path


# ================= GROUP =================

@click.group(name=APP_NAME)
@click.option("--log-level", default=LOG_LEVEL, show_default=True,
              type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False))
@click.option("--log-file", default=LOG_FILE, type=click.Path(dir_okay=False), help="JSON-lines log file")
@click.option("--quiet", is_flag=True, help="Warnings only, no progress bars")
@click.pass_context
def cli(ctx: click.Context, log_level: str, log_file: Optional[str], quiet: bool):
    """Galois-ring ququart tomography: rings, bases, reconstruction and error bounds."""
    setup_logging("WARNING" if quiet else log_level.upper(), log_file, force=True)
    ctx.ensure_object(dict)
    ctx.obj["progress"] = not quiet


# ================= INSPECT =================

@cli.command()
@click.option("--s", "s", default=2, show_default=True, type=int, help="Characteristic exponent (2^s)")
@click.option("--n", "N", default=1, show_default=True, type=int, help="Extension degree")
@click.option("--poly", default=None, help="Monic polynomial coefficients c0,...,cN")
@click.option("--format", "fmt", default="text", type=click.Choice(["text", "json"]))
@click.pass_context
def inspect(ctx: click.Context, s: int, N: int, poly: Optional[str], fmt: str):
    """Print the ring's canonical text form, subsets and working basis."""
    def body() -> int:
        try:
            coefficients = parse_int_list(poly) if poly else None
        except ValueError as e:
            raise ConfigError(str(e)) from e
        spec = RingSpec(s=s, N=N, poly=coefficients)
        ring = get_ring(spec.s, spec.N, spec.poly)

        subsets = {which: [elem_to_json(a) for a in enumerate_subsets(ring, which)]
                   for which in ("units", "ideal2", "teichmuller")}
        if fmt == "json":
            click.echo(json_dumps({**ring.to_dict(), "size": ring.size, "subsets": subsets}))
            return EXIT_OK

        click.echo(ring.describe())
        click.echo(f"elements: {ring.size}")
        for which, members in subsets.items():
            shown = members if len(members) <= 16 else members[:16] + ["..."]
            click.echo(f"{which} ({len(members)}): {shown}")
        click.echo(f"working basis ({ring.working_basis.kind}): "
                   f"{[repr(e) for e in ring.working_basis.elems]}")
        return EXIT_OK

    _run(ctx, body)


# ================= VERIFY =================

@cli.command()
@click.option("--n", "n_text", default="1", help="Ququart counts, e.g. 1,2")
@click.option("--tolerance", default=MATRIX_TOL, show_default=True, type=float)
@click.option("--seed", default=DEFAULT_SEED, show_default=True, type=int)
@click.option("--out", default=None, type=click.Path(dir_okay=False, path_type=Path))
@click.pass_context
def verify(ctx: click.Context, n_text: str, tolerance: float, seed: int, out: Optional[Path]):
    """Run the structural checks and write a JSON report of violation maxima."""
    report: Dict = {"checks": {}, "passed": False}
    path = out or REPORTS_DIR / "verify.json"

    def body() -> int:
        # rejected input still reaches the report in `finally`
        try:
            n_values = parse_int_list(n_text)
        except ValueError as e:
            raise ConfigError(str(e)) from e
        is_valid, error_msg = validate_n_list(n_values)
        if not is_valid:
            raise ConfigError(error_msg)
        config = RunConfig(command="verify", n_values=n_values, tolerance=tolerance, seed=seed, fmt="json", out=out)
        report["config"] = config.echo()

        for N in config.n_values:
            # STEP 1: ring, commuting sets and basis laws
            checks = verify_suite(N, config.tolerance)

            # STEP 2: probability relations on an exact Born table
            spec = StateEnsembleSpec(kind="mixed", dim=4 ** N, count=1, seed=config.seed)
            checks["probability_redundancy"] = redundancy_check(born_probabilities(state_at(spec, 0), get_family(N)))
            if N <= 2:
                rank = probability_map_rank(get_family(N))
                checks["probability_map_rank"] = float(abs(rank["rank"] - rank["expected"]))

            report["checks"][f"N={N}"] = checks
            for name, value in checks.items():
                if value <= config.tolerance:
                    logger.debug("N=%d %s ok (%.3e)", N, name, value)
                else:
                    status_fail(f"N={N} {name}: {value:.3e} > {config.tolerance:.1e}")

        failed = [f"{key}/{name}" for key, checks in report["checks"].items()
                  for name, value in checks.items() if value > config.tolerance]
        report["failed"] = failed
        report["passed"] = not failed
        if failed:
            return EXIT_NUMERIC
        status_ok(f"All checks within {config.tolerance:.1e} for N={config.n_values}")
        return EXIT_OK

    try:
        _run(ctx, body)
    finally:
        if "config" not in report:
            report["error"] = "configuration rejected"
        write_json_report(report, path)


# ================= EXPERIMENTS =================

@cli.group()
def experiment():
    """Round trips, sampled statistics and the error-bound table."""


def _common(command: Callable) -> Callable:
    options = [
        click.option("--seed", default=DEFAULT_SEED, show_default=True, type=int),
        click.option("--format", "fmt", default="csv", show_default=True, type=click.Choice(["csv", "json"])),
        click.option("--out", default=None, type=click.Path(dir_okay=False, path_type=Path)),
        click.option("--n-jobs", default=N_JOBS, show_default=True, type=int),
    ]
    for option in reversed(options):
        command = option(command)
    return command


@experiment.command()
@click.option("--n", "n_values", default="1", callback=n_list_callback)
@click.option("--samples", default=100, show_default=True, type=int, help="States per ensemble")
@click.option("--ensemble", default="both", type=click.Choice(["pure", "mixed", "both"]))
@click.option("--tolerance", default=MATRIX_TOL, show_default=True, type=float)
@_common
@click.pass_context
def roundtrip(ctx, n_values, samples, ensemble, tolerance, seed, fmt, out, n_jobs):
    """Reconstruct random states from exact probabilities with both paths."""
    def body() -> int:
        config = RunConfig(command="roundtrip", n_values=n_values, samples=samples, ensemble=ensemble,
                           tolerance=tolerance, seed=seed, fmt=fmt, out=out, n_jobs=n_jobs)
        rows = []
        for N in config.n_values:
            fam = get_family(N)
            for kind in config.ensembles():
                spec = StateEnsembleSpec(kind=kind, dim=4 ** N, count=config.samples, seed=config.seed)
                projector, monomial, paths, eigenvalues = [], [], [], []
                for index in range(spec.count):
                    rho = state_at(spec, index)
                    probs = born_probabilities(rho, fam)
                    a, b = reconstruct_projector(probs), reconstruct_monomial(probs)
                    projector.append(np.linalg.norm(a - rho))
                    monomial.append(np.linalg.norm(b - rho))
                    paths.append(np.linalg.norm(a - b))
                    eigenvalues.append(physicality_report(a)["min_eigenvalue"])
                rows.append({
                    "N": N, "ensemble": kind, "samples": spec.count,
                    "max_residual_projector": max(projector),
                    "max_residual_monomial": max(monomial),
                    "max_path_difference": max(paths),
                    "min_eigenvalue": min(eigenvalues),
                })
        frame = pd.DataFrame(rows)
        frame["passed"] = frame[["max_residual_projector", "max_residual_monomial",
                                 "max_path_difference"]].max(axis=1) <= config.tolerance
        path = _emit(frame, config, "roundtrip")
        if not frame["passed"].all():
            status_fail(f"Round trip residual above {config.tolerance:.1e}, see {path}")
            return EXIT_NUMERIC
        status_ok(f"Round trips within {config.tolerance:.1e}, written to {path}")
        return EXIT_OK

    _run(ctx, body)


@experiment.command()
@click.option("--n", "n_values", default="1", callback=n_list_callback)
@click.option("--shots", default=",".join(map(str, DEFAULT_SHOTS)), show_default=True, callback=shot_list_callback)
@click.option("--repeats", default=DEFAULT_REPEATS, show_default=True, type=int)
@click.option("--ensemble", default="mixed", type=click.Choice(["pure", "mixed", "both"]))
@click.option("--clamp", default=DEFAULT_CLAMP, show_default=True, type=float, callback=clamp_callback)
@_common
@click.pass_context
def simulate(ctx, n_values, shots, repeats, ensemble, clamp, seed, fmt, out, n_jobs):
    """Sampled counts: empirical MSE against the exact and minimal per-shot errors."""
    def body() -> int:
        config = RunConfig(command="simulate", n_values=n_values, shots=shots, repeats=repeats, ensemble=ensemble,
                           clamp=clamp, seed=seed, fmt=fmt, out=out, n_jobs=n_jobs)
        rows, unstable = [], []
        for N in config.n_values:
            fam = get_family(N)
            for kind in config.ensembles():
                # STEP 1: one state per ensemble, drawn at index 0
                rho = state_at(StateEnsembleSpec(kind=kind, dim=4 ** N, count=1, seed=config.seed), 0)
                probs = born_probabilities(rho, fam)

                # STEP 2: closed-form per-shot errors
                stability = cramer_rao_stability(rho, fam=fam)
                if not stability["stable"]:
                    unstable.append(f"N={N} {kind}")
                bound = cramer_rao(rho, config.clamp, fam)
                exact = linear_inversion_mse(probs)

                # STEP 3: sampled reconstructions per shot count
                for M in config.shots:
                    mse = empirical_mse(rho, fam, M, config.repeats, config.seed,
                                        n_jobs=config.n_jobs, progress=ctx.obj["progress"])
                    rows.append({
                        "N": N, "ensemble": kind, "shots": M, "repeats": config.repeats,
                        "empirical_mse": mse, "mse_times_shots": mse * M,
                        "linear_inversion_mse": exact, "cramer_rao": bound,
                        "efficiency": bound / (mse * M) if mse > 0 else float("nan"),
                    })
                logger.info("N=%d %s: linear inversion %.4f, Cramer-Rao %.4f per shot", N, kind, exact, bound)

        path = _emit(pd.DataFrame(rows), config, "simulate", {"unstable": unstable})
        if unstable:
            status_fail(f"Clamp-sensitive bounds for {unstable}, see {path}")
            return EXIT_NUMERIC
        status_ok(f"Simulation written to {path}")
        return EXIT_OK

    _run(ctx, body)


@experiment.command("table3")
@click.option("--n", "n_values", default="1,2", callback=n_list_callback)
@click.option("--samples", default=DEFAULT_SAMPLES, show_default=True, type=int, help="States per ensemble")
@click.option("--ensemble", default="both", type=click.Choice(["pure", "mixed", "both"]))
@click.option("--clamp", default=DEFAULT_CLAMP, show_default=True, type=float, callback=clamp_callback)
@click.option("--tolerance", default=PUBLISHED_TOLERANCE, show_default=True, type=float,
              help="Allowed distance from the printed cells")
@click.option("--dump-states", is_flag=True, help="Keep per-state bounds (JSON output)")
@_common
@click.pass_context
def table3(ctx, n_values, samples, ensemble, clamp, tolerance, dump_states, seed, fmt, out, n_jobs):
    """Ensemble averages of the minimal error for ququart, qubit and SIC schemes."""
    def body() -> int:
        config = RunConfig(command="table3", n_values=n_values, samples=samples, ensemble=ensemble, clamp=clamp,
                           tolerance=tolerance, seed=seed, fmt=fmt, out=out, n_jobs=n_jobs, dump_states=dump_states)
        report = monte_carlo_table(
            config.n_values, config.ensembles(), config.samples, config.seed, clamp=config.clamp,
            n_jobs=config.n_jobs, tolerance=config.tolerance, progress=ctx.obj["progress"],
            keep_states=config.dump_states
        )
        extra = {"anchors": report.anchors, "metadata": report.metadata}
        if config.dump_states:
            extra["per_state"] = report.per_state
        path = _emit(report.to_frame(), config, "table3", extra)

        for key, anchors in report.anchors.items():
            if not anchors["anchor_ok"]:
                status_fail(f"{key}: maximally mixed bound misses its closed form")
                return EXIT_NUMERIC
        flagged = report.flagged()
        status_ok(f"Table written to {path} ({len(flagged)} cells flagged against printed values)")
        return EXIT_OK

    _run(ctx, body)


if __name__ == "__main__":
    cli()
