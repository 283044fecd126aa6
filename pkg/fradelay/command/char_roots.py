# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later

import click

from ..cli import cli
from ..config import RegionInput, load
from ..helper import complex_to_json, dump_json, guarded, logger, write_output
from ..region import count_unstable_roots_window


@cli.command("char-roots")
@click.pass_context
@guarded("char-roots")
def char_roots(ctx):
    """Count right half-plane zeros of s^α - λ·exp(-τs) for every eigenvalue."""
    document = load(ctx.obj["input"], RegionInput)
    params = document.params()

    roots = []
    for lam in document.eigenvalues():
        count, window = count_unstable_roots_window(lam, params)
        logger.info("lambda=%s: %d roots with Re(s) > %g", lam, count, window.re_min)
        roots.append({
            "lambda": complex_to_json(lam),
            "count": count,
            "window": {
                "re_min": window.re_min,
                "re_max": window.re_max,
                "im_min": window.im_min,
                "im_max": window.im_max,
            },
        })

    result = {
        "alpha": params.alpha,
        "tau": params.tau,
        "roots": roots,
        "total": sum(r["count"] for r in roots),
    }
    write_output(dump_json(result), ctx.obj["output"])
