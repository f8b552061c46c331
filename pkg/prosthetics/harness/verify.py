"""
Быстрый набор проверок: детерминизм, градиенты, численные эталоны,
мягкое обновление целевых сетей DDPG и эквивалентность гейтов.

"""

import logging
from typing import Callable, List, NamedTuple, Tuple

import numpy

from prosthetics.algorithms.advantages import gae_advantages
from prosthetics.algorithms.checkpoint import AlgorithmId
from prosthetics.algorithms.ddpg import DdpgConfig, ddpg_update, make_ddpg_agent
from prosthetics.algorithms.gaussian import gaussian_logprob, policy_kl
from prosthetics.algorithms.replay import ReplayBuffer, Transition
from prosthetics.algorithms.training import Budget, train
from prosthetics.algorithms.trpo import conjugate_gradient
from prosthetics.defaults import ACTION_DIM
from prosthetics.exceptions import Prosthetics
from prosthetics.harness.checkpoint_io import dumps_checkpoint
from prosthetics.harness.oracles import dense_solve, gae_double_sum, kl_per_dim, random_spd
from prosthetics.harness.presenter import ConsolePresenter
from prosthetics.harness.reports import learning_curve_frame
from prosthetics.imitation.labeling import label_return_gated, label_reward_gated
from prosthetics.nn.gradcheck import random_gradchecks
from prosthetics.oracle import OraclePolicy
from prosthetics.stander import EnvConfig, StanderEnv

logger = logging.getLogger(__name__)

GRADIENT_TOLERANCE = 1e-4
GAE_TOLERANCE = 1e-10
CG_TOLERANCE = 1e-6
KL_TOLERANCE = 1e-12
BLEND_TOLERANCE = 1e-12

SOFT_UPDATE_STEPS = 1000
GATE_STATES = 1000


class CheckResult(NamedTuple):
    criterion: int
    name: str
    passed: bool
    detail: str


def check_determinism(seed: int) -> CheckResult:
    def env_trace():
        env = StanderEnv(EnvConfig(obs_noise=0.01))
        rng = numpy.random.default_rng(seed)
        obs = [env.reset(seed)]
        rewards = []
        while not env.done:
            result = env.step(rng.uniform(0.0, 1.0, size=ACTION_DIM))
            obs.append(result.observation)
            rewards.append(result.reward)
        return numpy.array(obs), numpy.array(rewards)

    def training_run():
        cfg = DdpgConfig(hidden_dims=(8, 8), batch_size=16, warmup_steps=20, buffer_capacity=1000)
        ckpt, report = train(AlgorithmId.DDPG, StanderEnv(EnvConfig(max_steps=40)), Budget(3, 40), seed, cfg)
        return dumps_checkpoint(ckpt), learning_curve_frame(report).to_csv(index=False, lineterminator='\n')

    (obs_a, rewards_a), (obs_b, rewards_b) = env_trace(), env_trace()
    same_env = numpy.array_equal(obs_a, obs_b) and numpy.array_equal(rewards_a, rewards_b)
    (ckpt_a, csv_a), (ckpt_b, csv_b) = training_run(), training_run()
    passed = same_env and ckpt_a == ckpt_b and csv_a == csv_b
    return CheckResult(1, 'determinism', passed, f'env={same_env}, checkpoint={ckpt_a == ckpt_b}, csv={csv_a == csv_b}')


def check_gradients(seed: int) -> CheckResult:
    worst = max(r.max_relative_error for r in random_gradchecks(10, seed))
    return CheckResult(2, 'gradients', worst < GRADIENT_TOLERANCE, f'max relative error {worst:.2e}')


def check_numerical_oracles(seed: int) -> CheckResult:
    rng = numpy.random.default_rng(seed)
    gae_error = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 21))
        rewards, values = rng.normal(size=n), rng.normal(size=n)
        dones = (rng.random(n) < 0.1).astype(float)
        last_value = float(rng.normal())
        gamma, lam = float(rng.uniform(0.8, 1.0)), float(rng.uniform(0.8, 1.0))
        adv, _ = gae_advantages(rewards, values, last_value, dones, gamma, lam)
        gae_error = max(gae_error, float(numpy.max(numpy.abs(adv - gae_double_sum(rewards, values, last_value, dones, gamma, lam)))))

    cg_error = 0.0
    for _ in range(20):
        matrix = random_spd(8, rng)
        b = rng.normal(size=8)
        x = conjugate_gradient(lambda v, m=matrix: m @ v, b, iters=50, tol=1e-12)
        cg_error = max(cg_error, float(numpy.linalg.norm(x - dense_solve(matrix, b))))

    d = 5
    kl_error = max(
        abs(policy_kl(numpy.zeros(d), numpy.zeros(d), numpy.zeros(d), numpy.zeros(d))),
        abs(policy_kl(numpy.zeros(1), numpy.zeros(1), numpy.ones(1), numpy.zeros(1)) - 0.5),
        abs(policy_kl(numpy.zeros(d), numpy.zeros(d), numpy.ones(d), numpy.zeros(d)) - 0.5 * d),
        abs(policy_kl([0.3], [numpy.log(2.0)], [-0.1], [numpy.log(0.5)]) - kl_per_dim(0.3, 2.0, -0.1, 0.5)),
        abs(gaussian_logprob(numpy.zeros(d), numpy.zeros(d), numpy.zeros(d)) + 0.5 * d * numpy.log(2 * numpy.pi)),
    )
    passed = gae_error < GAE_TOLERANCE and cg_error < CG_TOLERANCE and kl_error < KL_TOLERANCE
    return CheckResult(3, 'numerical oracles', passed, f'gae {gae_error:.1e}, cg {cg_error:.1e}, kl {kl_error:.1e}')


def check_soft_update(seed: int) -> CheckResult:
    rng = numpy.random.default_rng(seed)
    agent = make_ddpg_agent(DdpgConfig(hidden_dims=(16, 16), batch_size=32), seed)
    buffer = ReplayBuffer(2000)
    env = StanderEnv(EnvConfig())
    obs = env.reset(seed)
    while len(buffer) < 2000:
        action = rng.uniform(0.0, 1.0, size=ACTION_DIM)
        result = env.step(action)
        buffer.push(Transition(obs, action, result.reward, result.observation, result.fall))
        obs = env.reset(int(rng.integers(2 ** 31))) if result.done else result.observation

    worst = 0.0
    for _ in range(SOFT_UPDATE_STEPS):
        target_actor, target_critic = agent.target_actor, agent.target_critic
        ddpg_update(agent, buffer.sample(agent.batch_size, rng))
        for before, online, after in ((target_actor, agent.actor, agent.target_actor), (target_critic, agent.critic, agent.target_critic)):
            for t_old, o_new, t_new in zip(before.arrays(), online.arrays(), after.arrays()):
                expected = agent.tau * o_new + (1.0 - agent.tau) * t_old
                worst = max(worst, float(numpy.max(numpy.abs(t_new - expected))))
    return CheckResult(5, 'soft update', worst < BLEND_TOLERANCE, f'{SOFT_UPDATE_STEPS} updates, max deviation {worst:.1e}')


def check_gate_equivalence(seed: int) -> CheckResult:
    rng = numpy.random.default_rng(seed)
    env = StanderEnv(EnvConfig())
    policy = OraclePolicy(env.mix)
    disagreements = 0
    env.reset(seed)
    for _ in range(GATE_STATES):
        for _ in range(int(rng.integers(0, 20))):
            if env.step(rng.uniform(0.0, 1.0, size=ACTION_DIM)).done:
                env.reset(int(rng.integers(2 ** 31)))
        snap = env.snapshot()
        a_expert, a_target = rng.uniform(0.0, 1.0, size=ACTION_DIM), rng.uniform(0.0, 1.0, size=ACTION_DIM)
        by_reward = label_reward_gated(env, snap, a_expert, a_target)
        by_return = label_return_gated(env, snap, a_expert, a_target, policy, policy, horizon=1)
        disagreements += by_reward.expert_won != by_return.expert_won
    return CheckResult(9, 'gate equivalence', disagreements == 0, f'{GATE_STATES} states, {disagreements} disagreements')


CHECKS: List[Callable[[int], CheckResult]] = [
    check_determinism,
    check_gradients,
    check_numerical_oracles,
    check_soft_update,
    check_gate_equivalence,
]


def run_verification(seed: int = 0) -> List[CheckResult]:
    results = []
    for check in CHECKS:
        try:
            result = check(seed)
        except Prosthetics as e:
            result = CheckResult(0, check.__name__, False, f'raised {e}')
        logger.info(f'verify {result.name}: {"ok" if result.passed else "FAILED"} ({result.detail})')
        results.append(result)
    return results


def verify(seed: int = 0) -> Tuple[bool, List[CheckResult]]:
    results = run_verification(seed)
    presenter = ConsolePresenter()
    presenter.append_header('verify')
    presenter.append_table(
        [[r.criterion, r.name, 'ok' if r.passed else 'FAILED', r.detail] for r in results],
        headers=['criterion', 'check', 'result', 'detail'],
    )
    presenter.present()
    return all(r.passed for r in results), results
