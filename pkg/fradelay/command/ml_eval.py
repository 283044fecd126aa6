# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later

import click
import numpy as np

from ..cli import cli
from ..config import MLInput, load
from ..helper import format_csv, guarded, logger, write_output
from ..mlfunc import ml_eval_grid


@cli.command("ml-eval")
@click.pass_context
@guarded("ml-eval")
def ml_eval(ctx):
    """Evaluate the delayed Mittag-Leffler function E^{λ,τ}_{α,β} on a grid of t.

    The input document holds alpha, beta, lambda, tau and either an explicit list t or
    t_start, t_stop and t_step. Emits CSV rows t,re,im,abs.
    """
    document = load(ctx.obj["input"], MLInput)
    t = document.grid()
    values = ml_eval_grid(document.params(), t)
    logger.info("Evaluated %d points", t.size)

    rows = np.column_stack([t, values.real, values.imag, np.abs(values)])
    write_output(format_csv(["t", "re", "im", "abs"], rows), ctx.obj["output"])
