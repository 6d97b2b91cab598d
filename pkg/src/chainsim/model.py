"""Attack model: node count, attack kind, breach threshold, and cycle play-out.

A destructive attack needs a majority of nodes (m = floor(n/2) + 1); a
ransom attack needs every node (m = n).  A cycle runs from a (re)start to
whichever comes first: detection after the random monitoring time, which
resets the chain and forfeits all breached nodes, or the hacker finishing
the m-th breach.  Ties count as detection; for continuous times the event
has probability zero, so this is purely a convention.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .distributions import Distribution, distribution_from_json, distribution_to_json
from .errors import ConfigurationError


class AttackKind(enum.Enum):
    DESTRUCTIVE = "destructive"
    RANSOM = "ransom"


def nodes_to_threshold(n: int, kind: AttackKind) -> int:
    """Number of nodes the hacker must breach for the attack to succeed."""
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 2:
        raise ValueError(f"node count must be an integer >= 2, got {n!r}")
    if kind is AttackKind.DESTRUCTIVE:
        return n // 2 + 1
    if kind is AttackKind.RANSOM:
        return int(n)
    raise ValueError(f"unknown attack kind {kind!r}")


@dataclass(frozen=True)
class AttackModel:
    """Immutable description of one attack scenario.

    ``m_override`` bypasses the node-count mapping so reports can sweep the
    breach threshold directly; when it is set, ``n`` may be omitted.
    """

    kind: AttackKind
    hack_time: Distribution
    detect_time: Distribution
    n: int | None = None
    m_override: int | None = None

    def __post_init__(self):
        if self.m_override is None and self.n is None:
            raise ConfigurationError("either n or m_override must be given")
        if self.n is not None:
            nodes_to_threshold(self.n, self.kind)  # validates n >= 2
        if self.m_override is not None and (
            not isinstance(self.m_override, (int, np.integer)) or self.m_override < 1
        ):
            raise ConfigurationError(f"m_override must be a positive integer, got {self.m_override!r}")
        if not isinstance(self.hack_time, Distribution) or not isinstance(self.detect_time, Distribution):
            raise ConfigurationError("hack_time and detect_time must be distributions")

    @property
    def m(self) -> int:
        if self.m_override is not None:
            return int(self.m_override)
        return nodes_to_threshold(self.n, self.kind)

    def with_m(self, m: int) -> "AttackModel":
        return replace(self, m_override=int(m))


class OutcomeKind(enum.Enum):
    RESET = "reset"
    HACKED = "hacked"


@dataclass(frozen=True)
class CycleOutcome:
    """Result of one cycle: how it ended, how long it lasted, and how many
    nodes the hacker had breached when it ended."""

    kind: OutcomeKind
    duration: float
    breached: int = 0

    @property
    def hacked(self) -> bool:
        return self.kind is OutcomeKind.HACKED


def play_cycle(model: AttackModel, stream: np.random.Generator) -> CycleOutcome:
    """Play one cycle.

    Draws the detecting time Y first, then hacking times X_1, X_2, ...
    sequentially, stopping as soon as the partial sum reaches Y (the later
    draws cannot matter once detection wins).  Exactly one Y draw and at
    most m X draws are consumed.  Returns Hacked(sum of the m hacking
    times) when the hacker finishes strictly before detection, otherwise
    Reset(Y).
    """
    m = model.m
    y = model.detect_time.sample(stream)
    total = 0.0
    for k in range(1, m + 1):
        total += model.hack_time.sample(stream)
        if y <= total:
            return CycleOutcome(kind=OutcomeKind.RESET, duration=y, breached=k - 1)
    return CycleOutcome(kind=OutcomeKind.HACKED, duration=total, breached=m)


_KIND_NAMES = {k.value: k for k in AttackKind}


def model_from_json(obj: dict) -> AttackModel:
    """Build an attack model from its JSON form; unknown keys are rejected."""
    if not isinstance(obj, dict):
        raise ConfigurationError(f"model must be a JSON object, got {type(obj).__name__}")
    allowed = {"n", "kind", "hack_time", "detect_time", "m_override"}
    extra = set(obj) - allowed
    if extra:
        raise ConfigurationError(f"unknown model keys: {sorted(extra)}")
    for key in ("kind", "hack_time", "detect_time"):
        if key not in obj:
            raise ConfigurationError(f"model is missing required key {key!r}")
    kind_name = obj["kind"]
    if kind_name not in _KIND_NAMES:
        raise ConfigurationError(f"unknown attack kind {kind_name!r}")
    n = obj.get("n")
    if n is not None:
        if not isinstance(n, int) or isinstance(n, bool):
            raise ConfigurationError(f"n must be an integer, got {n!r}")
    m_override = obj.get("m_override")
    if m_override is not None and (not isinstance(m_override, int) or isinstance(m_override, bool)):
        raise ConfigurationError(f"m_override must be an integer, got {m_override!r}")
    try:
        return AttackModel(
            kind=_KIND_NAMES[kind_name],
            hack_time=distribution_from_json(obj["hack_time"]),
            detect_time=distribution_from_json(obj["detect_time"]),
            n=n,
            m_override=m_override,
        )
    except ValueError as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(str(exc)) from exc


def model_to_json(model: AttackModel) -> dict:
    out: dict = {"kind": model.kind.value}
    if model.n is not None:
        out["n"] = model.n
    if model.m_override is not None:
        out["m_override"] = model.m_override
    out["hack_time"] = distribution_to_json(model.hack_time)
    out["detect_time"] = distribution_to_json(model.detect_time)
    return out
