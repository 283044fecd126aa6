# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later

from typing import Optional

import click

from ..analysis import compute_constants
from ..cli import cli
from ..config import RunConfig, SystemInput, load
from ..helper import complex_to_json, dump_json, guarded, write_output
from ..solver import diagonalize


@cli.command("constants")
@click.option("--gamma", type=float, default=None, help="Rescaling of nilpotent Jordan parts (Default: 0.01)")
@click.pass_context
@guarded("constants")
def constants(ctx, gamma: Optional[float]):
    """Compute C(α,λ), the ball radius eps, the contraction factor q and the admissible history radius delta.

    Exits with 6 when an eigenvalue lies outside the stability region or when no radius of the
    grid gives q < 1.
    """
    spec = load(ctx.obj["input"], SystemInput).build(RunConfig(gamma=gamma))
    ts = diagonalize(spec)
    result = compute_constants(spec, ts=ts).to_dict()
    result["eigenvalues"] = [complex_to_json(lam) for lam in ts.diag_lambdas]
    result["gamma"] = ts.gamma
    write_output(dump_json(result), ctx.obj["output"])
