"""Training, evaluation, priority diagnostics and parameter sweeps."""
from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .. import curriculum as cur
from ..envs import Env, Terminal, make_env
from ..envs.base import ConfigurationError
from ..refresh import NetworkSnapshot, Refresher, oracle_priorities
from ..replay import ReplayBuffer, ReplayMode
from ..td3 import Td3Agent
from .config import RunConfig
from .metrics import EpisodeRecord, RunSummary, summarize, trailing_hit_rates, write_episodes_csv
from .plots import line_chart

log = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ("t", "p_x", "p_y", "p_z", "yaw", "pitch", "speed", "reward", "outcome")
DIAGNOSE_COLUMNS = ("training_step", "slot", "stored_priority", "oracle_priority")
SWEEP_AXES = {"N_tp": "temp_pool", "A": "refresh_A", "c_init": "c_init", "c_incr": "c_incr",
              "k1": "k1", "k2": "k2"}


def _streams(seed: int) -> dict[str, np.random.Generator]:
    names = ("env", "init", "explore", "buffer", "noise_table")
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {n: np.random.default_rng(c) for n, c in zip(names, children)}


def beta_schedule(episode: int, cfg: RunConfig) -> float:
    """Linear anneal from the first learning episode to the last episode (1-based)."""
    first = cfg.warmup_episodes + 1
    if episode < first:
        return cfg.beta_start
    frac = (episode - first) / (cfg.episodes - first) if cfg.episodes > first else 1.0
    return cfg.beta_start + min(frac, 1.0) * (cfg.beta_end - cfg.beta_start)


def build_env(cfg: RunConfig, seed: int | None = None) -> Env:
    env = make_env(cfg.env, cfg.scenario or None, seed)
    if cfg.max_steps:
        env.max_steps = cfg.max_steps
    return env


@dataclass
class StepContext:
    trainer: "Trainer"
    global_step: int
    episode: int


@dataclass
class TrainResult:
    records: list[EpisodeRecord]
    summary: RunSummary
    agent: Td3Agent
    buffer: ReplayBuffer
    learn_calls: int
    refresh_updates: int
    max_refresh_per_step: int
    wall_seconds: float
    out_dir: Path | None = None
    extras: dict = field(default_factory=dict)


class Trainer:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        rngs = _streams(cfg.seed)
        self.rngs = rngs
        self.env = build_env(cfg)
        self.env.seed(int(rngs["env"].integers(2**63)))
        self.agent = Td3Agent(self.env.obs_dim, self.env.action_dim, cfg.td3(), rng=rngs["init"],
                              noise_seed=int(rngs["noise_table"].integers(2**31)))
        self.agent.rng = rngs["explore"]
        self.buffer = ReplayBuffer(cfg.buffer_size, self.env.obs_dim, self.env.action_dim,
                                   cfg.replay_mode, cfg.alpha, cfg.temp_pool, cfg.eviction,
                                   rng=rngs["buffer"])
        self.curriculum_cfg = cfg.curriculum()
        self.curriculum = cur.CurriculumState.initial(self.curriculum_cfg)
        self.refresher = Refresher(self.buffer, cfg.refresh(), self.curriculum_cfg)
        self.learn_calls = 0
        self.global_step = 0
        self.step_hooks: list[Callable[[StepContext], None]] = []

    def publish(self) -> None:
        self.refresher.publish(NetworkSnapshot.from_agent(self.agent), self.curriculum)

    def run(self, out_dir: str | Path | None = None) -> TrainResult:
        cfg = self.cfg
        out = Path(out_dir or cfg.out_dir) if (out_dir or cfg.out_dir) else None
        if out is not None:
            out.mkdir(parents=True, exist_ok=True)
        records: list[EpisodeRecord] = []
        successes: list[bool] = []
        timings: list[float] = []
        use_thread = cfg.refresh_async and self.refresher.active
        max_per_step = 0
        self.publish()
        if use_thread:
            self.refresher.start()
        t_start = time.perf_counter()
        try:
            for episode in range(1, cfg.episodes + 1):
                t0 = time.perf_counter()
                learning = episode > cfg.warmup_episodes
                beta = beta_schedule(episode, cfg)
                obs = self.env.reset()
                ret, calls_before = 0.0, self.learn_calls
                t = 0
                outcome = Terminal.RUNNING
                while outcome is Terminal.RUNNING:
                    t += 1
                    if learning:
                        action = self.agent.act(obs, explore=True)
                    else:
                        action = self.agent.rng.uniform(-1.0, 1.0, self.env.action_dim)
                    step = self.env.step(action)
                    self.buffer.add(obs, action, step.reward, step.observation, step.bootstrap_cut)
                    ret += step.reward
                    obs = step.observation
                    outcome = step.terminal
                    self.global_step += 1
                    if learning and t % cfg.replay_period == 0 and len(self.buffer) >= cfg.batch_size:
                        self.agent.learn(self.buffer, cfg.batch_size, beta, self.curriculum,
                                         self.curriculum_cfg)
                        self.learn_calls += 1
                        self.publish()
                    if self.refresher.active:
                        if use_thread:
                            self.refresher.signal()
                        else:
                            max_per_step = max(max_per_step, self.refresher.tick())
                    for hook in self.step_hooks:
                        hook(StepContext(self, self.global_step, episode))
                successes.append(outcome is Terminal.SUCCESS)
                hit = float(trailing_hit_rates(successes[-cfg.hit_window:], cfg.hit_window)[-1])
                records.append(EpisodeRecord(episode, t, ret, outcome.value, hit, self.curriculum.c,
                                             beta, self.learn_calls - calls_before))
                self.curriculum = cur.advance_episode(self.curriculum, self.curriculum_cfg)
                self.publish()
                timings.append((time.perf_counter() - t0) * 1000.0)
                records[-1].wall_ms = timings[-1]
                if out is not None and cfg.checkpoint_every and episode % cfg.checkpoint_every == 0:
                    self.agent.save(out / f"checkpoint_{episode:06d}.bin")
                if episode % 50 == 0:
                    log.info("episode %d hit=%.3f ret=%.1f", episode, hit, ret)
        finally:
            if use_thread:
                self.refresher.stop()
        if use_thread:
            max_per_step = self.refresher.max_updates_per_tick
        wall = time.perf_counter() - t_start
        summary = summarize(records, cfg.stat_window)
        result = TrainResult(records, summary, self.agent, self.buffer, self.learn_calls,
                             self.refresher.total_updates, max_per_step, wall, out)
        if out is not None:
            write_outputs(out, cfg, result, timings)
        return result


def write_outputs(out: Path, cfg: RunConfig, result: TrainResult, timings: Sequence[float]) -> None:
    write_episodes_csv(out / "episodes.csv", result.records)
    with open(out / "timing.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("episode", "wall_ms"))
        for r, ms in zip(result.records, timings):
            w.writerow((r.episode, f"{ms:.3f}"))
    summary = result.summary.as_dict() | {"learn_calls": result.learn_calls,
                                          "refresh_updates": result.refresh_updates,
                                          "wall_seconds": result.wall_seconds}
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    (out / "config.txt").write_text(cfg.to_text())
    result.agent.save(out / "checkpoint_final.bin")
    eps = [r.episode for r in result.records]
    line_chart(out / "hit_rate.svg", {cfg.mode: (eps, [r.hit_rate for r in result.records])},
               title=f"hit rate ({cfg.mode}, seed {cfg.seed})", xlabel="episode", ylabel="hit rate")


def train(cfg: RunConfig, out_dir=None) -> TrainResult:
    return Trainer(cfg).run(out_dir)


# evaluation ------------------------------------------------------------------

@dataclass
class EvalResult:
    hit_rate: float
    outcomes: list[str]
    returns: list[float]


def evaluate(agent: Td3Agent | str | Path, env: Env, episodes: int, seed: int = 0,
             trajectory_dir: str | Path | None = None, max_trajectories: int = 10) -> EvalResult:
    """Run the deterministic policy; optionally write per-episode trajectory CSVs."""
    if not isinstance(agent, Td3Agent):
        agent = Td3Agent.load(agent)
    if agent.state_dim != env.obs_dim or agent.action_dim != env.action_dim:
        raise ConfigurationError(
            f"checkpoint expects obs/action dims {agent.state_dim}/{agent.action_dim}, "
            f"environment has {env.obs_dim}/{env.action_dim}")
    env.seed(seed)
    tdir = Path(trajectory_dir) if trajectory_dir else None
    if tdir is not None:
        tdir.mkdir(parents=True, exist_ok=True)
    outcomes, returns = [], []
    for ep in range(episodes):
        obs = env.reset()
        rows, ret = [], 0.0
        while True:
            step = env.step(agent.act(obs, explore=False))
            ret += step.reward
            obs = step.observation
            if tdir is not None and ep < max_trajectories:
                rows.append(env.trajectory_row(step.reward, step.terminal))
            if step.done:
                break
        outcomes.append(step.terminal.value)
        returns.append(ret)
        if rows:
            with open(tdir / f"trajectory_{ep:04d}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(TRAJECTORY_COLUMNS)
                w.writerows(rows)
    hit = sum(o == Terminal.SUCCESS.value for o in outcomes) / max(episodes, 1)
    return EvalResult(hit, outcomes, returns)


def random_policy_hit_rate(env: Env, episodes: int, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    env.seed(seed)
    wins = 0
    for _ in range(episodes):
        env.reset()
        while True:
            step = env.step(rng.uniform(-1.0, 1.0, env.action_dim))
            if step.done:
                break
        wins += step.terminal is Terminal.SUCCESS
    return wins / episodes


# priority diagnostics ------------------------------------------------------------

@dataclass
class DiagnoseResult:
    steps: list[int]
    stored: dict[int, np.ndarray]
    oracle: dict[int, np.ndarray]
    train: TrainResult

    def mean_gap(self, step: int) -> float:
        return float(np.mean(np.abs(self.stored[step] - self.oracle[step])))


def diagnose_priorities(cfg: RunConfig, snapshot_steps: Sequence[int], out_dir=None) -> DiagnoseResult:
    """Train while capturing stored vs. recomputed priorities at the given global steps."""
    if cfg.replay_mode is ReplayMode.UNIFORM:
        raise ConfigurationError("priority diagnostics need per or acer mode")
    trainer = Trainer(cfg)
    wanted = sorted(set(int(s) for s in snapshot_steps))
    stored: dict[int, np.ndarray] = {}
    oracle: dict[int, np.ndarray] = {}

    def hook(ctx: StepContext) -> None:
        if ctx.global_step not in wanted:
            return
        tr = ctx.trainer
        with tr.buffer.lock:
            snap = NetworkSnapshot.from_agent(tr.agent)
            stored[ctx.global_step] = tr.buffer.priorities.copy()
            oracle[ctx.global_step] = oracle_priorities(tr.buffer, snap, tr.buffer.mode,
                                                        tr.curriculum, tr.curriculum_cfg)

    trainer.step_hooks.append(hook)
    result = trainer.run(out_dir)
    steps = [s for s in wanted if s in stored]
    if out_dir is not None:
        out = Path(out_dir)
        with open(out / "priorities.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(DIAGNOSE_COLUMNS)
            for s in steps:
                for slot, (a, b) in enumerate(zip(stored[s], oracle[s])):
                    w.writerow((s, slot, repr(float(a)), repr(float(b))))
        for s in steps:
            n = len(stored[s])
            x = np.arange(n)
            line_chart(out / f"priorities_{s}.svg",
                       {f"p_{cfg.mode}": (x, np.sort(stored[s])), "p_real": (x, np.sort(oracle[s]))},
                       title=f"sorted priorities at step {s}", xlabel="rank", ylabel="priority")
    return DiagnoseResult(steps, stored, oracle, result)


# sweeps -------------------------------------------------------------------------

SWEEP_COLUMNS = ("no", "axis", "value", "TP", "CT", "SC", "CR", "seeds")


def sweep(base: RunConfig, axis: str, values: Sequence, seeds: int = 1, out_dir=None) -> list[dict]:
    """Train once per (value, seed) and average TP/CT/SC/CR per value."""
    if axis not in SWEEP_AXES:
        raise ConfigurationError(f"axis must be one of {sorted(SWEEP_AXES)}")
    field_name = SWEEP_AXES[axis]
    kind = type(getattr(base, field_name))
    rows = []
    for k, value in enumerate(values, 1):
        summaries = []
        for s in range(seeds):
            cfg = base.replace(**{field_name: kind(value), "seed": base.seed + s, "out_dir": ""})
            run_dir = Path(out_dir) / f"{axis}_{value}_seed{cfg.seed}" if out_dir else None
            summaries.append(train(cfg, run_dir).summary)
        cts = [x.CT for x in summaries if x.CT is not None]
        scs = [x.SC for x in summaries if x.SC is not None]
        crs = [x.CR for x in summaries if x.CR is not None]
        rows.append({
            "no": k, "axis": axis, "value": value,
            "TP": float(np.mean([x.TP for x in summaries])),
            "CT": float(np.mean(cts)) if cts else None,
            "SC": float(np.mean(scs)) if scs else None,
            "CR": float(np.mean(crs)) if crs else None,
            "seeds": seeds,
        })
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / f"sweep_{axis}.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, SWEEP_COLUMNS)
            w.writeheader()
            w.writerows(rows)
        (out / f"sweep_{axis}.md").write_text(format_table(rows))
    return rows


def format_table(rows: Sequence[dict]) -> str:
    def cell(v, pct=False):
        if v is None:
            return "-"
        return f"{100 * v:.2f}%" if pct else f"{v:.4g}"

    lines = ["| No. | {} | TP | CT | SC | CR |".format(rows[0]["axis"] if rows else "value"),
             "|---|---|---|---|---|---|"]
    for r in rows:
        lines.append(f"| {r['no']} | {r['value']} | {cell(r['TP'], True)} | {cell(r['CT'])} | "
                     f"{cell(None if r['SC'] is None else 100 * r['SC'])} | {cell(r['CR'], True)} |")
    return "\n".join(lines) + "\n"
