# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later

import click
import numpy as np

from ..cli import cli
from ..config import MLInput, load
from ..exception import DomainError
from ..helper import format_csv, guarded, write_output
from ..mlfunc import ml_abs_cumulative


@cli.command("ml-integral")
@click.pass_context
@guarded("ml-integral")
def ml_integral(ctx):
    """Running integral of |E^{λ,τ}_{α,β}| from 0 to every t of the grid.

    Emits CSV rows t,abs_integral. The mesh width is taken from quad_step.
    """
    document = load(ctx.obj["input"], MLInput)
    t = document.grid()
    if np.any(t < 0):
        raise DomainError(f"t must be nonnegative, got {t.min()}")
    nodes, cumulative = ml_abs_cumulative(document.params(), float(t.max()), document.quad_step)

    rows = np.column_stack([t, np.interp(t, nodes, cumulative)])
    write_output(format_csv(["t", "abs_integral"], rows), ctx.obj["output"])
