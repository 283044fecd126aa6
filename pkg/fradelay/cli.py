# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later

from typing import Optional

import click

from .exception import ConfigError
from .helper import setup_logging


@click.group()
@click.option(
    "--input",
    "input_path",
    default=None,
    help="JSON input document describing the system. Use '-' to read from stdin",
)
@click.option(
    "--output",
    "output_path",
    default=None,
    help="Write the CSV or JSON result to this file instead of stdout",
)
@click.option("-v", "--verbose", count=True, help="Raise the log level, can be given multiple times")
@click.pass_context
def cli(ctx, input_path: Optional[str], output_path: Optional[str], verbose: int):
    ctx.ensure_object(dict)
    ctx.obj["input"] = input_path
    ctx.obj["output"] = output_path
    ctx.obj["verbose"] = verbose

    try:
        setup_logging(verbose)
    except ConfigError as e:
        click.echo(f"FRADELAY UNKNOWN - {e}", err=True)
        ctx.exit(2)
