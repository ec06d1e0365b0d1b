"""Cross-entropy planning of placement sequences against rule targets.

The planner samples action sequences from a diagonal Gaussian, settles them
through the physics surrogate, ranks by distance to the rule target, and
refits the distribution on a persistent elite pool. The sampling mean starts
at the naive reference actions, so the best found sequence never does worse
than executing the target pose directly.
"""
from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import PlacementError, PlanningError
from .geometry import wrap_angle
from .rules import RuleTemplate, reference_actions, rule_target
from .scene import PlacedItem, PlacementAction, Pose, SceneState
from .settle import rollout
from .tasks import TaskDefinition

ANGLE_WEIGHT = 0.1
POSITION_WEIGHT = 1.0


@dataclass(frozen=True)
class CemConfig:
    """Sampling parameters for the cross-entropy optimizer."""

    population: int = 128
    elite_fraction: float = 0.1
    iterations: int = 20
    initial_std_xy: float = 0.02
    initial_std_yaw: float = 0.35
    min_std: float = 1e-3
    smoothing: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.population * self.elite_fraction < 2:
            raise ValueError("population * elite_fraction must be at least 2")
        if not (0 < self.elite_fraction <= 1 and 0 <= self.smoothing < 1):
            raise ValueError("elite_fraction in (0,1], smoothing in [0,1)")
        if min(self.initial_std_xy, self.initial_std_yaw) <= 0 or self.min_std <= 0:
            raise ValueError("stds must be positive")

    @property
    def n_elite(self) -> int:
        return max(2, int(self.population * self.elite_fraction))


@dataclass(frozen=True)
class PlanResult:
    best_actions: tuple[PlacementAction, ...]
    best_state: SceneState
    best_cost: float
    cost_trace: tuple[float, ...]


def arrangement_cost(s: SceneState, w, template: RuleTemplate) -> float:
    """Weighted distance between a settled state and the rule target for w."""
    target = rule_target(w, template)
    return state_distance(s, target, POSITION_WEIGHT, ANGLE_WEIGHT)


def state_distance(s: SceneState, target: SceneState,
                   pos_weight: float = 1.0, ang_weight: float = 1.0) -> float:
    """Norm of the pose residual; angle residuals wrapped to (-pi, pi]."""
    if s.task_id != target.task_id or len(s.placed) != len(target.placed):
        raise ValueError("states belong to different tasks")
    acc = 0.0
    for p, q in zip(s.placed, target.placed):
        dx = p.pose.x - q.pose.x
        dy = p.pose.y - q.pose.y
        dz = p.pose.z - q.pose.z
        acc += pos_weight * pos_weight * (dx * dx + dy * dy + dz * dz)
        for a, b in (
            (p.pose.roll, q.pose.roll),
            (p.pose.pitch, q.pose.pitch),
            (p.pose.yaw, q.pose.yaw),
        ):
            d = wrap_angle(a - b)
            acc += ang_weight * ang_weight * d * d
    return math.sqrt(acc)


def cem_minimize(
    evaluate: Callable[[np.ndarray], float],
    mean0: np.ndarray,
    std0: np.ndarray,
    cfg: CemConfig,
    clip: Callable[[np.ndarray], np.ndarray] | None = None,
) -> tuple[np.ndarray, float, list[float]]:
    """Generic elite-refit Gaussian search.

    The first sample of the first iteration is the initial mean itself.
    Elites persist across iterations, so the elite-mean trace and the best
    cost are both non-increasing. Deterministic given cfg.seed.
    """
    rng = np.random.default_rng(cfg.seed)
    mean = mean0.astype(float).copy()
    std = std0.astype(float).copy()
    dims = mean.shape[0]

    pool_x: list[np.ndarray] = []
    pool_c: list[float] = []
    trace: list[float] = []

    for it in range(cfg.iterations):
        samples = mean + std * rng.standard_normal((cfg.population, dims))
        if it == 0:
            samples[0] = mean0
        if clip is not None:
            samples = clip(samples)
        costs = [float(evaluate(x)) for x in samples]

        for x, c in zip(samples, costs):
            if math.isfinite(c):
                pool_x.append(x)
                pool_c.append(c)
        if not pool_x:
            raise PlanningError(
                f"no valid sample in iteration {it} (population {cfg.population})"
            )
        order = np.argsort(pool_c, kind="stable")[: cfg.n_elite]
        pool_x = [pool_x[i] for i in order]
        pool_c = [pool_c[i] for i in order]

        elite = np.stack(pool_x)
        mean = cfg.smoothing * mean + (1 - cfg.smoothing) * elite.mean(axis=0)
        std = cfg.smoothing * std + (1 - cfg.smoothing) * elite.std(axis=0)
        std = np.maximum(std, cfg.min_std)
        trace.append(float(np.mean(pool_c)))

    return pool_x[0], pool_c[0], trace


def _action_vector(actions: Sequence[PlacementAction]) -> np.ndarray:
    return np.array([v for a in actions for v in (a.x, a.y, a.yaw)])


def _vector_actions(x: np.ndarray) -> list[PlacementAction]:
    return [
        PlacementAction(float(x[i]), float(x[i + 1]), float(x[i + 2]))
        for i in range(0, len(x), 3)
    ]


def plan(
    alpha: SceneState, w, task: TaskDefinition, cem: CemConfig | None = None
) -> PlanResult:
    """Find the action sequence whose settled result best matches the target."""
    cem = cem or CemConfig()
    template = task.rule
    target = rule_target(w, template)
    bounds = task.action_bounds
    radius = task.plate_radius * 0.999

    mean0 = _action_vector(reference_actions(w, template))
    std0 = np.tile(
        [cem.initial_std_xy, cem.initial_std_xy, cem.initial_std_yaw], task.n_w
    )

    def clip(samples: np.ndarray) -> np.ndarray:
        out = samples.copy()
        for i in range(0, out.shape[1], 3):
            out[:, i] = np.clip(out[:, i], bounds.x[0], bounds.x[1])
            out[:, i + 1] = np.clip(out[:, i + 1], bounds.y[0], bounds.y[1])
            out[:, i + 2] = np.clip(out[:, i + 2], bounds.yaw[0], bounds.yaw[1])
            r = np.hypot(out[:, i], out[:, i + 1])
            mask = r > radius
            if mask.any():
                scale = radius / r[mask]
                out[mask, i] *= scale
                out[mask, i + 1] *= scale
        return out

    def evaluate(x: np.ndarray) -> float:
        try:
            s = rollout(alpha, _vector_actions(x), task)
        except PlacementError:
            return math.inf
        return state_distance(s, target, POSITION_WEIGHT, ANGLE_WEIGHT)

    try:
        best_x, best_cost, trace = cem_minimize(evaluate, mean0, std0, cem, clip)
    except PlanningError as e:
        raise PlanningError(f"task {task.task_id}, w={tuple(w)}: {e}") from e

    best_actions = _vector_actions(best_x)
    best_state = rollout(alpha, best_actions, task)
    return PlanResult(
        best_actions=tuple(best_actions),
        best_state=best_state,
        best_cost=best_cost,
        cost_trace=tuple(trace),
    )


class PlanCache:
    """Memoizes plans per (task, grid index, seed), optionally on disk.

    Disk layout: <root>/<task_id>/w<index>_s<seed>.json, one record per
    (w, seed) pair.
    """

    def __init__(self, root: str | Path | None = None):
        self.root = Path(root) if root is not None else None
        self._mem: dict[tuple[str, int, int], PlanResult] = {}
        self._lock = threading.Lock()

    def _path(self, task: TaskDefinition, index: int, seed: int) -> Path | None:
        if self.root is None:
            return None
        return self.root / task.task_id / f"w{index:05d}_s{seed}.json"

    def get_or_plan(
        self, task: TaskDefinition, index: int, cem: CemConfig
    ) -> PlanResult:
        key = (task.task_id, index, cem.seed)
        with self._lock:
            hit = self._mem.get(key)
        if hit is not None:
            return hit
        path = self._path(task, index, cem.seed)
        if path is not None and path.exists():
            result = _load_result(path, task)
        else:
            w = task.grid.point(index)
            result = plan(task.initial_state, w, task, cem)
            if path is not None:
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(_dump_result(result, index, cem.seed))
        with self._lock:
            self._mem[key] = result
        return result

    def cached_seeds(self, task: TaskDefinition, index: int) -> list[int]:
        """Seeds with a disk record for this grid point (sorted)."""
        if self.root is None:
            return []
        d = self.root / task.task_id
        if not d.is_dir():
            return []
        out = []
        prefix = f"w{index:05d}_s"
        for p in d.glob(f"{prefix}*.json"):
            try:
                out.append(int(p.stem[len(prefix):]))
            except ValueError:
                continue
        return sorted(out)


def _dump_result(result: PlanResult, index: int, seed: int) -> str:
    return json.dumps(
        {
            "grid_index": index,
            "seed": seed,
            "best_cost": result.best_cost,
            "best_actions": [[a.x, a.y, a.yaw] for a in result.best_actions],
            "cost_trace": list(result.cost_trace),
            "state": {
                "task_id": result.best_state.task_id,
                "stage": result.best_state.stage,
                "poses": {
                    str(p.spec.id): list(p.pose.as_tuple())
                    for p in result.best_state.placed
                },
            },
        }
    )


def _load_result(path: Path, task: TaskDefinition) -> PlanResult:
    data = json.loads(path.read_text())
    poses = data["state"]["poses"]
    placed = tuple(
        PlacedItem(task.item(int(i)), Pose(*poses[i])) for i in sorted(poses, key=int)
    )
    state = SceneState(
        task_id=data["state"]["task_id"], placed=placed, stage=data["state"]["stage"]
    )
    return PlanResult(
        best_actions=tuple(PlacementAction(*a) for a in data["best_actions"]),
        best_state=state,
        best_cost=float(data["best_cost"]),
        cost_trace=tuple(float(c) for c in data["cost_trace"]),
    )
