# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later

from typing import Dict

import nagiosplugin
from nagiosplugin.state import Critical as STATE_Critical, Ok as STATE_Ok, Unknown as STATE_Unknown, Warn as STATE_Warn

VERDICT_STATES: Dict[str, nagiosplugin.state.ServiceState] = {
    "stable_certified": STATE_Ok,
    "stable_empirical": STATE_Warn,
    "unstable_empirical": STATE_Critical,
    "inconclusive": STATE_Unknown,
}


class PerfdataScalarContext(nagiosplugin.ScalarContext):
    """Report the value as performance data only, never change the state."""

    def evaluate(self, metric, resource):
        return self.result_cls(STATE_Ok, None, metric)

    def performance(self, metric, resource):
        return super(PerfdataScalarContext, self).performance(metric, resource)


class MembershipContext(nagiosplugin.Context):
    """Signed distance to the region boundary; negative or zero means outside."""

    def __init__(self, name, fmt_metric="{name} margin is {value:.6g}", result_cls=nagiosplugin.Result):
        super(MembershipContext, self).__init__(name, fmt_metric=fmt_metric, result_cls=result_cls)

    def evaluate(self, metric, resource):
        if metric.value > 0:
            return self.result_cls(STATE_Ok, None, metric)
        return self.result_cls(STATE_Critical, f"{metric.name} is outside the stability region", metric)

    def performance(self, metric, resource):
        return nagiosplugin.performance.Performance(label=metric.name, value=metric.value)


class VerdictContext(nagiosplugin.Context):
    def evaluate(self, metric, resource):
        state = VERDICT_STATES.get(metric.value, STATE_Unknown)
        return self.result_cls(state, f"verdict {metric.value}", metric)
