"""Shared test helpers: scripted distributions and stream stubs."""

from __future__ import annotations

from chainsim import Distribution


class ScriptedDist(Distribution):
    """Distribution stub whose sample() pops pre-arranged values.

    Lets tests force exact cycle outcomes; the analytic methods are not
    implemented on purpose.
    """

    family = "scripted"

    def __init__(self, values):
        self.values = list(values)
        self.draws = 0

    def sample(self, stream):
        self.draws += 1
        return self.values.pop(0)


class ConstantDist(Distribution):
    """Distribution stub that always returns the same value."""

    family = "constant"

    def __init__(self, value):
        self.value = float(value)
        self.draws = 0

    def sample(self, stream):
        self.draws += 1
        return self.value
