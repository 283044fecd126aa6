# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later

import math
from typing import List, Optional

import click
import nagiosplugin

from .analysis import StabilityReport
from .helper import logger
from .region import RegionParams, RegionVerdict, in_region


class RegionResource(nagiosplugin.Resource):
    name = "REGION"

    def __init__(self, eigenvalues: List[complex], params: RegionParams):
        self.eigenvalues = [complex(lam) for lam in eigenvalues]
        self.params = params
        self.verdicts: List[RegionVerdict] = []

    @property
    def all_members(self) -> bool:
        return all(v.member for v in self.verdicts)

    def probe(self):
        logger.info("Checking %d eigenvalues against alpha=%s, tau=%s", len(self.eigenvalues), self.params.alpha,
                    self.params.tau)
        self.verdicts = [in_region(lam, self.params) for lam in self.eigenvalues]
        for i, verdict in enumerate(self.verdicts, start=1):
            yield nagiosplugin.Metric(name=f"lambda{i}", value=verdict.margin_to_boundary, context="membership")


class RegionSummary(nagiosplugin.Summary):
    def ok(self, results):
        return f"all {len(results)} eigenvalues lie inside the stability region"

    def problem(self, results):
        outside = [r.metric.name for r in results if r.state != nagiosplugin.state.Ok]
        return f"{len(outside)} of {len(results)} eigenvalues outside the stability region: {', '.join(outside)}"


class StabilityResource(nagiosplugin.Resource):
    name = "STABILITY"

    def __init__(self, report: StabilityReport):
        self.report = report

    def probe(self):
        yield nagiosplugin.Metric(name="verdict", value=self.report.verdict, context="verdict")

        values = {
            "sup_norm": self.report.empirical.sup_norm,
            "final_norm": self.report.empirical.final_norm,
            "decay_slope": self.report.empirical.decay_slope,
        }
        if self.report.constants is not None:
            values.update(q=self.report.constants.q, delta=self.report.constants.delta, eps=self.report.constants.eps)
        for name, value in sorted(values.items()):
            # perfdata has no literal for inf/nan
            if value is not None and math.isfinite(value):
                yield nagiosplugin.Metric(name=name, value=value, context="perfdata")


class StabilitySummary(nagiosplugin.Summary):
    def __init__(self, report: StabilityReport):
        self.report = report

    def _text(self) -> str:
        empirical = self.report.empirical
        text = f"{empirical.verdict} ({empirical.mode} mode, {len(empirical.histories)} histories)"
        if self.report.constants is not None:
            text += f", q={self.report.constants.q:.4g}, delta={self.report.constants.delta:.4g}"
        return text

    def ok(self, results):
        return self._text()

    def problem(self, results):
        return self._text()


def status_line(check: nagiosplugin.Check) -> str:
    """``NAME STATE - summary | perfdata`` of an evaluated check."""
    name = check.name or check.resources[0].name
    line = f"{name.upper()} {check.state.text.upper()} - {check.summary_str}"
    if check.perfdata:
        line += " | " + " ".join(str(p) for p in check.perfdata)
    return line


def emit_status(check: nagiosplugin.Check, output: Optional[str]):
    # the status goes to stderr while stdout carries the document
    click.echo(status_line(check), err=output is None)
