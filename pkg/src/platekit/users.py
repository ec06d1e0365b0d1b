"""Simulated answerers: ideal users and users with answer uncertainty.

Each simulated user owns a target weight vector and scores settled states
by how far they sit from the target arrangement, with a penalty per
toppled item. Ideal users compare the scores exactly; uncertain users
follow a two-threshold branching model and may answer randomly or skip
when both candidates score high.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .planner import state_distance
from .rules import RuleTemplate, rule_target
from .scene import SceneState
from .settle import toppled_items

SKIP = None  # sentinel answer value for a skipped query


@dataclass(frozen=True)
class PreferenceModel:
    """Latent preference: target weights plus the value-function constants."""

    w_star: tuple[float, ...]
    value_scale: float = 100.0
    distance_gain: float = 150.0
    violation_penalty: float = 40.0

    def __post_init__(self):
        if self.value_scale <= 0 or self.distance_gain < 0 or self.violation_penalty < 0:
            raise ValueError("invalid preference model constants")


@dataclass(frozen=True)
class UncertainConfig:
    """Thresholds of the uncertain-answer model; answers are reliable below
    t0, mixed between t0 and t1, and random (or skipped) above t1."""

    t0: float = 20.0
    t1: float = 50.0
    skip_enabled: bool = True

    def __post_init__(self):
        if not self.t0 < self.t1:
            raise ValueError("t0 must be below t1")


def preference_value(s: SceneState, model: PreferenceModel, template: RuleTemplate) -> float:
    """Score of a settled state against the user's target arrangement."""
    target = rule_target(model.w_star, template)
    dist = state_distance(s, target)
    violations = len(toppled_items(s))
    c = model.value_scale - model.distance_gain * dist - model.violation_penalty * violations
    return max(0.0, c)


def _step_fn(x: float) -> int:
    return 1 if x > 0 else 0


def ideal_answer(c0: float, c1: float) -> int:
    """0 when the first candidate scores at least as high, else 1."""
    return 0 if c0 >= c1 else 1


def uncertain_answer(
    c0: float, c1: float, cfg: UncertainConfig, rng: np.random.Generator
):
    """Answer under the two-threshold uncertainty model.

    Returns 0 or 1, or SKIP when the random branches fire and skipping is
    enabled. One uniform draw decides the mixed zone; random answers use a
    second draw.
    """
    c_min = min(c0, c1)
    if c_min < cfg.t0:
        return _step_fn(c1 - c0)
    if c_min <= cfg.t1:
        u = rng.uniform()
        if (c_min - cfg.t0) / (cfg.t1 - cfg.t0) <= u:
            return _step_fn(c1 - c0)
        if cfg.skip_enabled:
            return SKIP
        return _step_fn(rng.uniform() - 0.5)
    if cfg.skip_enabled:
        return SKIP
    return _step_fn(rng.uniform() - 0.5)


class SimulatedUser:
    """Callable answerer over settled scene pairs."""

    def __init__(
        self,
        model: PreferenceModel,
        template: RuleTemplate,
        uncertain: UncertainConfig | None = None,
        rng: np.random.Generator | None = None,
        name: str = "",
    ):
        self.model = model
        self.template = template
        self.uncertain = uncertain
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.name = name or f"w*={model.w_star}"

    def __call__(self, s0: SceneState, s1: SceneState):
        c0 = preference_value(s0, self.model, self.template)
        c1 = preference_value(s1, self.model, self.template)
        if self.uncertain is None:
            return ideal_answer(c0, c1)
        return uncertain_answer(c0, c1, self.uncertain, self.rng)
