# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later

from typing import Optional

import click
import numpy as np

from ..cli import cli
from ..config import RegionInput, load
from ..helper import format_csv, guarded, write_output
from ..region import boundary_samples


@cli.command("region-boundary")
@click.option(
    "--points",
    type=int,
    default=None,
    help="Number of samples on the upper boundary branch (Default: n from the document, 64)",
)
@click.pass_context
@guarded("region-boundary")
def region_boundary(ctx, points: Optional[int]):
    """Sample the upper branch of the stability region boundary as CSV rows theta,radius,re,im."""
    document = load(ctx.obj["input"], RegionInput)
    samples = boundary_samples(document.params(), points if points is not None else document.n)

    rows = np.array([[theta, radius, point.real, point.imag] for theta, radius, point in samples])
    write_output(format_csv(["theta", "radius", "re", "im"], rows), ctx.obj["output"])
