# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later

from typing import Optional

import click
import numpy as np

from ..cli import cli
from ..config import SOLVERS, RunConfig, SystemInput, load
from ..exception import TrajectoryOverflowError
from ..helper import format_csv, guarded, logger, write_output
from ..solver import Trajectory, caputo_residual, solve_direct, solve_picard


def trajectory_csv(traj: Trajectory) -> str:
    header = ["t"]
    columns = [traj.times]
    for i in range(traj.values.shape[1]):
        header += [f"re_x{i + 1}", f"im_x{i + 1}"]
        columns += [traj.values[:, i].real, traj.values[:, i].imag]
    return format_csv(header, np.column_stack(columns))


@cli.command("simulate")
@click.option(
    "--solver",
    type=click.Choice(SOLVERS),
    default="picard",
    help="Picard iteration of the variation of constants formula, the direct L1 stepper or both (Default: picard)",
)
@click.option("--tol", type=float, default=1e-10, help="Picard stopping tolerance on the sup-norm change")
@click.option("--max-iter", type=int, default=200, help="Maximum number of Picard sweeps")
@click.option("--step", type=float, default=None, help="Grid step, must divide tau and T (Default: h_step)")
@click.option("--horizon", type=float, default=None, help="Final time T (Default: T from the document)")
@click.option("--gamma", type=float, default=None, help="Rescaling of nilpotent Jordan parts (Default: 0.01)")
@click.pass_context
@guarded("simulate")
def simulate(ctx, solver: str, tol: float, max_iter: int, step: Optional[float], horizon: Optional[float],
             gamma: Optional[float]):
    """Solve the delay problem on [-tau, T] and write the trajectory as CSV.

    Columns are t,re_x1,im_x1,... With --solver both the Picard trajectory is written and the
    maximum deviation from the direct stepper is reported on stderr. When the solution leaves the
    double range the rows computed so far are written and the command exits with 5.
    """
    config = RunConfig(
        command="simulate",
        input_path=ctx.obj["input"],
        output_path=ctx.obj["output"],
        solver=solver,
        tol=tol,
        max_iter=max_iter,
        step=step,
        horizon=horizon,
        gamma=gamma,
    )
    spec = load(config.input_path, SystemInput).build(config)

    picard: Optional[Trajectory] = None
    direct: Optional[Trajectory] = None
    try:
        if config.solver in ("picard", "both"):
            picard, report = solve_picard(spec, config.tol, config.max_iter)
            logger.info("Contraction ratios: %s", ", ".join(f"{r:.3g}" for r in report.contraction_ratios))
        if config.solver in ("direct", "both"):
            direct = solve_direct(spec)
    except TrajectoryOverflowError as e:
        if e.trajectory is not None:
            write_output(trajectory_csv(e.trajectory), config.output_path)
        raise

    primary = picard if picard is not None else direct
    logger.info("Caputo residual of the %s trajectory: %.3e", primary.meta["solver"], caputo_residual(primary, spec))
    write_output(trajectory_csv(primary), config.output_path)

    if picard is not None and direct is not None:
        click.echo(f"SIMULATE OK - max deviation picard/direct {picard.max_deviation(direct):.6g}", err=True)
