# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later

import sys
from typing import Optional

import click
import nagiosplugin

from ..analysis import verify_stability
from ..cli import cli
from ..config import RunConfig, SystemInput, load
from ..context import PerfdataScalarContext, VerdictContext
from ..exception import ConfigError
from ..helper import dump_json, guarded, write_output
from ..resource import StabilityResource, StabilitySummary, emit_status

VERDICT_EXIT_CODES = {
    "stable_certified": 0,
    "stable_empirical": 1,
    "unstable_empirical": 3,
    "inconclusive": 6,
}


@cli.command("verify")
@click.option("--seed", type=int, default=None, help="Seed of the random histories, required here or in the document")
@click.option("--n-histories", type=int, default=20, help="Number of random histories (Default: 20)")
@click.option(
    "--scale",
    type=float,
    default=None,
    help="Sup norm of every history (Default: delta when the constants exist, 0.1 otherwise)",
)
@click.option("--horizon", type=float, default=None, help="Simulation horizon (Default: max(50 tau, 100))")
@click.option("--step", type=float, default=None, help="Grid step of the direct stepper (Default: h_step)")
@click.option("--gamma", type=float, default=None, help="Rescaling of nilpotent Jordan parts (Default: 0.01)")
@click.pass_context
@guarded("verify")
def verify(ctx, seed: Optional[int], n_histories: int, scale: Optional[float], horizon: Optional[float],
           step: Optional[float], gamma: Optional[float]):
    """Run the stability experiment and write the report as JSON.

    Exit codes: 0 stable_certified, 1 stable_empirical, 3 unstable_empirical, 6 inconclusive.
    """
    config = RunConfig(
        command="verify",
        input_path=ctx.obj["input"],
        output_path=ctx.obj["output"],
        seed=seed,
        n_histories=n_histories,
        scale=scale,
        horizon=horizon,
        step=step,
        gamma=gamma,
    )
    document = load(config.input_path, SystemInput)
    seed = config.seed if config.seed is not None else document.seed
    if seed is None:
        raise ConfigError("seed", "verify needs a seed, use --seed or the seed field of the document")
    # the horizon belongs to the experiment, not to the document's T
    spec = document.build(RunConfig(step=config.step, gamma=config.gamma))

    report = verify_stability(spec, config.n_histories, config.scale, seed, horizon=config.horizon)
    write_output(dump_json(report.to_dict()), config.output_path)

    check = nagiosplugin.Check()
    check.add(
        StabilityResource(report),
        VerdictContext("verdict"),
        PerfdataScalarContext("perfdata"),
        StabilitySummary(report),
    )
    check()
    emit_status(check, config.output_path)
    sys.exit(VERDICT_EXIT_CODES[report.verdict])
