"""TD3 learner on top of :mod:`acer.nn`.

The agent works in normalized action space: the actor's tanh output lies in
[-1, 1] and ``act`` clamps to ``[action_low, action_high]`` (default the same
interval).  Environments scale normalized actions themselves.
"""
from __future__ import annotations

import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import curriculum as cur
from .nn import AdamConfig, Mlp, MlpSpec
from .replay import ReplayBuffer, ReplayMode, SampledBatch, per_priority

CHECKPOINT_VERSION = 1
NOISE_TABLE_SIZE = 1 << 16
_NET_NAMES = ("actor", "actor_target", "critic1", "critic2", "critic1_target", "critic2_target")


@dataclass(frozen=True)
class Td3Config:
    gamma: float = 0.9
    tau_actor: float = 0.1
    tau_critic: float = 0.2
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    actor_delay: int = 2
    exploration_sigma: float = 0.1
    smoothing_sigma: float = 0.1
    smoothing_clip: float = 0.25
    hidden: tuple[int, ...] = (100, 100)
    action_low: float = -1.0
    action_high: float = 1.0
    td_critic: str = "q1"

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if not (0 < self.tau_actor <= 1 and 0 < self.tau_critic <= 1):
            raise ValueError("tau must lie in (0, 1]")
        if self.actor_delay < 1:
            raise ValueError("actor_delay must be >= 1")
        if not self.smoothing_clip > 0:
            raise ValueError("smoothing_clip must be positive")
        if self.td_critic not in ("q1", "min"):
            raise ValueError("td_critic must be 'q1' or 'min'")


def smoothing_noise_table(sigma: float, clip: float, action_dim: int, seed: int = 0) -> np.ndarray:
    """Clipped Gaussian target-smoothing noise indexed by experience id.

    Reused by the refresher so that recomputing an experience's TD error
    against fixed networks always gives the same value.
    """
    rng = np.random.default_rng(seed)
    return np.clip(rng.normal(0.0, sigma, (NOISE_TABLE_SIZE, action_dim)), -clip, clip)


def twin_target(actor_t: Mlp, critic1_t: Mlp, critic2_t: Mlp, rewards, next_states, dones,
                gamma: float, noise: np.ndarray) -> np.ndarray:
    """``r + gamma * (1 - done) * min_j Q'_j(s', clip(mu'(s') + noise))``."""
    a_next = np.clip(actor_t.forward(next_states) + noise, -1.0, 1.0)
    sa = np.concatenate([next_states, a_next], axis=1)
    q_next = np.minimum(critic1_t.forward(sa)[:, 0], critic2_t.forward(sa)[:, 0])
    return rewards + gamma * (1.0 - dones.astype(np.float64)) * q_next


@dataclass
class LearnReport:
    critic_losses: tuple[float, float]
    td_errors: np.ndarray
    indices: np.ndarray
    new_priorities: np.ndarray | None
    actor_updated: bool
    weights: np.ndarray = field(repr=False, default=None)


class Td3Agent:
    def __init__(self, state_dim: int, action_dim: int, cfg: Td3Config = Td3Config(),
                 rng: np.random.Generator | None = None, noise_seed: int = 0):
        self.cfg = cfg
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.rng = rng if rng is not None else np.random.default_rng()
        actor_spec = MlpSpec(state_dim, cfg.hidden, action_dim, "relu", "tanh")
        critic_spec = MlpSpec(state_dim + action_dim, cfg.hidden, 1, "relu", "identity")
        self.actor = Mlp.init(actor_spec, self.rng)
        self.critic1 = Mlp.init(critic_spec, self.rng)
        self.critic2 = Mlp.init(critic_spec, self.rng)
        self.actor_target = self.actor.clone()
        self.critic1_target = self.critic1.clone()
        self.critic2_target = self.critic2.clone()
        self.actor_adam = AdamConfig(cfg.actor_lr)
        self.critic_adam = AdamConfig(cfg.critic_lr)
        self.learn_steps = 0
        self.actor_updates = 0
        self.noise_seed = noise_seed
        self.noise_table = smoothing_noise_table(cfg.smoothing_sigma, cfg.smoothing_clip,
                                                 action_dim, noise_seed)

    # acting ----------------------------------------------------------------

    def act(self, state, explore: bool = True) -> np.ndarray:
        a = self.actor.forward(state)
        if explore:
            a = a + self.rng.normal(0.0, self.cfg.exploration_sigma, a.shape)
        return np.clip(a, self.cfg.action_low, self.cfg.action_high)

    # critic ----------------------------------------------------------------

    def smoothing_noise(self, ids: np.ndarray | None, n: int) -> np.ndarray:
        if ids is None:
            noise = self.rng.normal(0.0, self.cfg.smoothing_sigma, (n, self.action_dim))
            return np.clip(noise, -self.cfg.smoothing_clip, self.cfg.smoothing_clip)
        return self.noise_table[np.asarray(ids) % NOISE_TABLE_SIZE]

    def targets(self, batch: SampledBatch, noise: np.ndarray | None = None) -> np.ndarray:
        if noise is None:
            noise = self.smoothing_noise(None, len(batch))
        return twin_target(self.actor_target, self.critic1_target, self.critic2_target,
                           batch.rewards, batch.next_states, batch.dones, self.cfg.gamma, noise)

    def critic_loss(self, batch: SampledBatch, noise: np.ndarray | None = None):
        """Weighted squared TD loss for both critics.

        Returns ``(losses, td_errors, grads)`` where ``grads`` are the
        parameter gradients of the two losses.  Nothing is updated.
        """
        if len(batch) == 0:
            raise ValueError("empty batch")
        y = self.targets(batch, noise)
        sa = np.concatenate([batch.states, batch.actions], axis=1)
        n = len(batch)
        losses, grads, qs = [], [], []
        for critic in (self.critic1, self.critic2):
            q = critic.forward(sa)[:, 0]
            err = y - q
            losses.append(float(np.mean(batch.weights * err ** 2)))
            g_out = (-2.0 / n) * batch.weights * err
            grads.append(critic.backward(sa, g_out[:, None])[0])
            qs.append(q)
        q_eval = qs[0] if self.cfg.td_critic == "q1" else np.minimum(qs[0], qs[1])
        return (losses[0], losses[1]), y - q_eval, grads

    def critic_update(self, batch: SampledBatch, noise: np.ndarray | None = None):
        losses, td, grads = self.critic_loss(batch, noise)
        self.critic1.adam_step(grads[0], self.critic_adam)
        self.critic2.adam_step(grads[1], self.critic_adam)
        return losses, td

    # actor -----------------------------------------------------------------

    def actor_gradient(self, states: np.ndarray) -> tuple[float, np.ndarray]:
        """Gradient of ``-mean Q1(s, mu(s))`` with respect to the actor parameters."""
        states = np.atleast_2d(states)
        n = states.shape[0]
        a = self.actor.forward(states)
        sa = np.concatenate([states, a], axis=1)
        q = self.critic1.forward(sa)[:, 0]
        _, d_input = self.critic1.backward(sa, np.full((n, 1), -1.0 / n))
        grad, _ = self.actor.backward(states, d_input[:, self.state_dim:])
        return float(-q.mean()), grad

    def actor_update(self, states: np.ndarray) -> float:
        loss, grad = self.actor_gradient(states)
        self.actor.adam_step(grad, self.actor_adam)
        self.actor_updates += 1
        return loss

    def update_targets(self) -> None:
        self.actor_target.soft_update_from(self.actor, self.cfg.tau_actor)
        self.critic1_target.soft_update_from(self.critic1, self.cfg.tau_critic)
        self.critic2_target.soft_update_from(self.critic2, self.cfg.tau_critic)

    # full learning step ----------------------------------------------------

    def learn(self, buffer: ReplayBuffer, batch_size: int, beta: float,
              curriculum_state: cur.CurriculumState | None = None,
              curriculum_cfg: cur.CurriculumConfig | None = None,
              update_priorities: bool = True) -> LearnReport:
        batch = buffer.sample(batch_size, beta)
        losses, td = self.critic_update(batch)
        self.learn_steps += 1
        actor_updated = self.learn_steps % self.cfg.actor_delay == 0
        if actor_updated:
            self.actor_update(batch.states)
            self.update_targets()
        new_p = None
        if update_priorities and buffer.mode is ReplayMode.ACER:
            if curriculum_state is None or curriculum_cfg is None:
                raise ValueError("acer mode needs the curriculum state and config")
            new_p = cur.priority(td, curriculum_state.c, curriculum_cfg.k1, curriculum_cfg.k2)
        elif update_priorities and buffer.mode is ReplayMode.PER:
            new_p = per_priority(td)
        if new_p is not None:
            new_p = np.atleast_1d(new_p)
            buffer.update_priorities(batch.indices, new_p)
        return LearnReport(losses, td, batch.indices, new_p, actor_updated, batch.weights)

    # checkpoints -----------------------------------------------------------

    def networks(self) -> dict[str, Mlp]:
        return {name: getattr(self, name) for name in _NET_NAMES}

    def to_bytes(self) -> bytes:
        arrays = {"version": np.array(CHECKPOINT_VERSION),
                  "counters": np.array([self.learn_steps, self.actor_updates, self.noise_seed]),
                  "cfg": np.array(json.dumps(asdict(self.cfg)))}
        for name, net in self.networks().items():
            arrays.update(net.to_arrays(name + "/"))
        buf = io.BytesIO()
        np.savez(buf, **arrays)
        return buf.getvalue()

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes, cfg: Td3Config | None = None) -> "Td3Agent":
        with np.load(io.BytesIO(data), allow_pickle=False) as z:
            if int(z["version"]) != CHECKPOINT_VERSION:
                raise ValueError(f"unsupported checkpoint version {int(z['version'])}")
            if cfg is None:
                cfg = _parse_cfg(str(z["cfg"]))
            nets = {name: Mlp.from_arrays(z, name + "/") for name in _NET_NAMES}
            learn_steps, actor_updates, noise_seed = (int(v) for v in z["counters"])
        actor = nets["actor"]
        agent = cls(actor.spec.input_dim, actor.spec.output_dim, cfg,
                    rng=np.random.default_rng(0), noise_seed=noise_seed)
        for name, net in nets.items():
            setattr(agent, name, net)
        agent.learn_steps, agent.actor_updates = learn_steps, actor_updates
        return agent

    @classmethod
    def load(cls, path, cfg: Td3Config | None = None) -> "Td3Agent":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read(), cfg)


def _parse_cfg(text: str) -> Td3Config:
    return Td3Config(**json.loads(text))
