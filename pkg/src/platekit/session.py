"""The elicitation loop: acquisition, candidate realization, answer handling,
query synthesis, posterior refits, and the running weight estimate.

A session advances one query round at a time through ``SessionEngine`` so
the same code drives batch simulations and interactive service sessions;
the HTTP layer wraps the engine without duplicating any loop logic.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .acquisition import AcquisitionConfig, random_pair, thompson_pair
from .errors import PlanningError
from .planner import CemConfig, PlanCache
from .prefgp import ComparisonDataset, GaussianApprox, GpHyperparams, PrefRecord, fit_posterior
from .rules import reference_actions
from .scene import SceneState, w_distance
from .settle import rollout
from .tasks import TaskDefinition

METHOD_PCPBO = "pcpbo"
METHOD_NAIVE = "naive-baseline"
MODES = ("synth", "skip", "noskip")


@dataclass(frozen=True)
class SessionConfig:
    method: str = METHOD_PCPBO
    n_queries: int = 50
    n_init: int = 1
    synthesis_mode: str = "synth"
    seed: int = 0
    gp: GpHyperparams = field(default_factory=GpHyperparams)
    acquisition: AcquisitionConfig = field(default_factory=AcquisitionConfig)
    cem: CemConfig = field(default_factory=CemConfig)

    def __post_init__(self):
        if self.method not in (METHOD_PCPBO, METHOD_NAIVE):
            raise ValueError(f"unknown method {self.method!r}")
        if self.synthesis_mode not in MODES:
            raise ValueError(f"unknown synthesis mode {self.synthesis_mode!r}")
        if self.n_queries < self.n_init:
            raise ValueError("n_queries must be at least n_init")


@dataclass(frozen=True)
class QueryRound:
    query_index: int
    i0: int
    i1: int
    provenance: str  # 'random' or 'thompson'
    answer: int | None  # 0, 1, or None for skip
    records_added: tuple[PrefRecord, ...]
    estimate_index: int


@dataclass(frozen=True)
class SessionResult:
    task_id: str
    config: SessionConfig
    estimates: tuple[int, ...]  # grid index after every fit
    estimates_w: tuple[tuple[float, ...], ...]
    final_index: int
    final_w: tuple[float, ...]
    skip_count: int
    dataset: ComparisonDataset
    rounds: tuple[QueryRound, ...]


def synthesize(skipped: tuple[int, int], last_selected: int) -> list[PrefRecord]:
    """Turn a skipped pair into comparisons against the last chosen point.

    Each skipped side is recorded as losing to the last selected
    arrangement; a side equal to the last selection is dropped rather than
    compared with itself.
    """
    out = []
    for idx in skipped:
        if idx == last_selected:
            continue
        out.append(PrefRecord(idx, last_selected, 1, provenance="synthesized"))
    return out


def estimate(q: GaussianApprox, grid) -> int:
    """Grid index with maximal posterior mean; ties go to the lowest index."""
    return int(np.argmax(q.mean))


class SessionEngine:
    """One elicitation session, advanced round by round.

    ``next_query`` realizes both candidates (planning or naive execution)
    and ``submit_answer`` consumes exactly one answer, refits the posterior,
    and records the running estimate. Deterministic given the config seed
    and the answer sequence.
    """

    def __init__(
        self,
        task: TaskDefinition,
        cfg: SessionConfig,
        plan_cache: PlanCache | None = None,
        log_path: str | Path | None = None,
    ):
        self.task = task
        self.cfg = cfg
        self.cache = plan_cache if plan_cache is not None else PlanCache()
        self.grid = task.grid
        self._acq_rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 101)))
        self.dataset = ComparisonDataset()
        self.pending_skipped: list[tuple[int, int]] = []
        self.last_selected: int | None = None
        self.rounds: list[QueryRound] = []
        self.estimates: list[int] = []
        self.skip_count = 0
        self.posterior = fit_posterior(self.dataset, cfg.gp, self.grid)
        self._outstanding: tuple[int, int, str] | None = None
        self._realized: dict[int, SceneState] = {}
        self._log_path = Path(log_path) if log_path is not None else None
        if self._log_path is not None and not self._log_path.exists():
            self._append_log({"type": "config", "task": task.task_id,
                              **config_to_dict(cfg)})

    # -- candidate realization ------------------------------------------------

    def realize(self, index: int) -> SceneState:
        """Settled arrangement presented for a grid point, per the method."""
        hit = self._realized.get(index)
        if hit is not None:
            return hit
        if self.cfg.method == METHOD_NAIVE:
            w = self.grid.point(index)
            state = rollout(
                self.task.initial_state, reference_actions(w, self.task.rule), self.task
            )
        else:
            state = self.cache.get_or_plan(self.task, index, self.cfg.cem).best_state
        self._realized[index] = state
        return state

    # -- loop ------------------------------------------------------------------

    @property
    def query_index(self) -> int:
        return len(self.rounds)

    def finished(self) -> bool:
        return len(self.rounds) >= self.cfg.n_queries

    def ensure_pair(self) -> tuple[int, int]:
        """Select (or return) the outstanding query pair without realizing it."""
        if self.finished():
            raise RuntimeError("session complete")
        if self._outstanding is None:
            if self.query_index < self.cfg.n_init:
                i0, i1 = random_pair(self.grid, self._acq_rng)
                prov = "random"
            else:
                i0, i1 = thompson_pair(
                    self.posterior, self.grid, self.cfg.acquisition, self._acq_rng
                )
                prov = "thompson"
            self._outstanding = (i0, i1, prov)
        return self._outstanding[0], self._outstanding[1]

    def provide_state(self, index: int, state: SceneState) -> None:
        """Pin the settled arrangement presented for a grid point (e.g. a
        pre-computed planner restart chosen by the serving layer)."""
        self._realized[index] = state

    def next_query(self) -> tuple[int, int, int, SceneState, SceneState]:
        """Current query: (query_index, i0, i1, settled left, settled right).

        A planner failure discards the pair and redraws once; a second
        failure propagates.
        """
        i0, i1 = self.ensure_pair()
        try:
            return self.query_index, i0, i1, self.realize(i0), self.realize(i1)
        except PlanningError:
            self._outstanding = None
            i0, i1 = self.ensure_pair()
            return self.query_index, i0, i1, self.realize(i0), self.realize(i1)

    def submit_answer(self, answer: int | None) -> QueryRound:
        """Consume the outstanding query's answer; refit and re-estimate."""
        if self._outstanding is None:
            raise RuntimeError("no outstanding query")
        if answer not in (0, 1, None):
            raise ValueError("answer must be 0, 1 or None (skip)")
        i0, i1, prov = self._outstanding
        added: list[PrefRecord] = []

        if answer is None:
            if self.cfg.synthesis_mode == "noskip":
                raise ValueError("skip submitted in noskip mode")
            self.skip_count += 1
            if self.cfg.synthesis_mode == "synth":
                if self.last_selected is None:
                    self.pending_skipped.append((i0, i1))
                else:
                    added.extend(synthesize((i0, i1), self.last_selected))
        else:
            added.append(PrefRecord(i0, i1, int(answer), provenance="direct"))
            self.last_selected = i1 if answer == 1 else i0
            while self.pending_skipped:
                pair = self.pending_skipped.pop(0)
                added.extend(synthesize(pair, self.last_selected))

        if added:
            self.dataset = self.dataset.extended(*added)
        self.posterior = fit_posterior(self.dataset, self.cfg.gp, self.grid)
        est = estimate(self.posterior, self.grid)
        self.estimates.append(est)
        round_ = QueryRound(
            query_index=self.query_index,
            i0=i0,
            i1=i1,
            provenance=prov,
            answer=answer,
            records_added=tuple(added),
            estimate_index=est,
        )
        self.rounds.append(round_)
        self._outstanding = None
        self._append_log(
            {
                "type": "round",
                "query_index": round_.query_index,
                "i0": i0,
                "i1": i1,
                "provenance": prov,
                "answer": "skip" if answer is None else int(answer),
                "records": [
                    {"i0": r.i0, "i1": r.i1, "y": r.y, "provenance": r.provenance}
                    for r in added
                ],
                "estimate_index": est,
            }
        )
        return round_

    def result(self) -> SessionResult:
        final = self.estimates[-1] if self.estimates else 0
        return SessionResult(
            task_id=self.task.task_id,
            config=self.cfg,
            estimates=tuple(self.estimates),
            estimates_w=tuple(self.grid.point(i) for i in self.estimates),
            final_index=final,
            final_w=self.grid.point(final),
            skip_count=self.skip_count,
            dataset=self.dataset,
            rounds=tuple(self.rounds),
        )

    # -- persistence -------------------------------------------------------

    def _append_log(self, record: dict) -> None:
        if self._log_path is None:
            return
        with self._log_path.open("a") as fh:
            fh.write(json.dumps(record) + "\n")

    def log_event(self, record: dict) -> None:
        """Append an auxiliary event (reference pick, likert answers)."""
        self._append_log(record)


def run_session(
    task: TaskDefinition,
    cfg: SessionConfig,
    answerer: Callable[[SceneState, SceneState], int | None],
    plan_cache: PlanCache | None = None,
    log_path: str | Path | None = None,
) -> SessionResult:
    """Run all query rounds against an answerer and return the full record."""
    engine = SessionEngine(task, cfg, plan_cache, log_path)
    while not engine.finished():
        _, _, _, s0, s1 = engine.next_query()
        engine.submit_answer(answerer(s0, s1))
    return engine.result()


def config_to_dict(cfg: SessionConfig) -> dict:
    return {
        "method": cfg.method,
        "n_queries": cfg.n_queries,
        "n_init": cfg.n_init,
        "mode": cfg.synthesis_mode,
        "seed": cfg.seed,
        "gp": {
            "signal_var": cfg.gp.signal_var,
            "length_scale": list(cfg.gp.length_scale),
            "noise": cfg.gp.noise,
            "jitter": cfg.gp.jitter,
        },
        "acquisition": {
            "n_init": cfg.acquisition.n_init,
            "min_separation": cfg.acquisition.min_separation,
            "max_reselect": cfg.acquisition.max_reselect,
        },
        "cem": {
            "population": cfg.cem.population,
            "elite_fraction": cfg.cem.elite_fraction,
            "iterations": cfg.cem.iterations,
            "initial_std_xy": cfg.cem.initial_std_xy,
            "initial_std_yaw": cfg.cem.initial_std_yaw,
            "min_std": cfg.cem.min_std,
            "smoothing": cfg.cem.smoothing,
            "seed": cfg.cem.seed,
        },
    }


def config_from_dict(d: dict) -> SessionConfig:
    gp = d.get("gp", {})
    acq = d.get("acquisition", {})
    cem = d.get("cem", {})
    return SessionConfig(
        method=d["method"],
        n_queries=d["n_queries"],
        n_init=d["n_init"],
        synthesis_mode=d["mode"],
        seed=d["seed"],
        gp=GpHyperparams(
            signal_var=gp.get("signal_var", 1.0),
            length_scale=tuple(gp.get("length_scale", (0.15,))),
            noise=gp.get("noise", 0.1),
            jitter=gp.get("jitter", 1e-8),
        ),
        acquisition=AcquisitionConfig(**acq) if acq else AcquisitionConfig(),
        cem=CemConfig(**cem) if cem else CemConfig(),
    )


def replay_session(
    task: TaskDefinition, log_path: str | Path, plan_cache: PlanCache | None = None
) -> SessionResult:
    """Re-run a persisted session log; reproduces the estimates exactly."""
    lines = [json.loads(l) for l in Path(log_path).read_text().splitlines() if l.strip()]
    header = lines[0]
    if header.get("type") != "config":
        raise ValueError("log does not start with a config record")
    cfg = config_from_dict(header)
    engine = SessionEngine(task, cfg, plan_cache)
    for rec in lines[1:]:
        if rec.get("type") != "round":
            continue
        engine.next_query()
        answer = rec["answer"]
        engine.submit_answer(None if answer == "skip" else int(answer))
    return engine.result()


def metrics(result: SessionResult, w_star) -> tuple[list[float], float]:
    """Distance-to-target curve (one entry per fit) and the skip rate."""
    curve = [w_distance(w, w_star) for w in result.estimates_w]
    return curve, result.skip_count / max(1, result.config.n_queries)
