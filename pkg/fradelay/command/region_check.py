# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later

import sys

import click
import nagiosplugin

from ..cli import cli
from ..config import RegionInput, load
from ..context import MembershipContext
from ..helper import complex_to_json, dump_json, guarded, write_output
from ..resource import RegionResource, RegionSummary, emit_status

EXIT_ALL_INSIDE = 0
EXIT_SOME_OUTSIDE = 3


@cli.command("region-check")
@click.pass_context
@guarded("region-check")
def region_check(ctx):
    """Classify the eigenvalues of A (or a list of lambdas) against the stability region.

    Writes the per-eigenvalue verdicts as JSON. Exits with 0 when every eigenvalue lies
    inside the region and 3 otherwise.
    """
    document = load(ctx.obj["input"], RegionInput)
    params = document.params()

    check = nagiosplugin.Check()
    resource = RegionResource(document.eigenvalues(), params)
    check.add(
        resource,
        MembershipContext("membership"),
        RegionSummary(),
    )
    check()

    result = {
        "alpha": params.alpha,
        "tau": params.tau,
        "all_member": resource.all_members,
        "eigenvalues": [
            {
                "lambda": complex_to_json(lam),
                "member": verdict.member,
                "margin_to_boundary": verdict.margin_to_boundary,
                "arg_ok": verdict.arg_ok,
            }
            for lam, verdict in zip(resource.eigenvalues, resource.verdicts)
        ],
    }
    write_output(dump_json(result), ctx.obj["output"])
    emit_status(check, ctx.obj["output"])
    sys.exit(EXIT_ALL_INSIDE if resource.all_members else EXIT_SOME_OUTSIDE)
