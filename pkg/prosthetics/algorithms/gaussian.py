"""
Диагональная гауссова политика для PPO и TRPO.

Среднее выдаёт MLP с выходом на [0, 1] (границы возбуждений), log_std не зависит
от состояния. Выполняемое действие обрезается средой, логарифм плотности считается
по необрезанной выборке.

"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy

from prosthetics.exceptions import ProstheticsShapeError
from prosthetics.nn.mlp import MlpParams, backward, flatten, forward, unflatten

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class GaussianPolicy:
    mean_net: MlpParams
    log_std: numpy.ndarray

    @property
    def action_dim(self) -> int:
        return self.mean_net.output_dim

    def mean(self, obs) -> numpy.ndarray:
        return forward(self.mean_net, obs)

    def act(self, obs) -> numpy.ndarray:
        return self.mean(obs)

    def sample(self, obs, rng: numpy.random.Generator) -> numpy.ndarray:
        mean = self.mean(obs)
        return mean + numpy.exp(self.log_std) * rng.normal(size=numpy.shape(mean))

    def flat(self) -> numpy.ndarray:
        return numpy.concatenate([flatten(self.mean_net), self.log_std])

    def with_flat(self, theta: numpy.ndarray) -> 'GaussianPolicy':
        n_net = self.mean_net.size()
        if theta.shape != (n_net + self.action_dim,):
            raise ProstheticsShapeError(f'expect {n_net + self.action_dim} policy parameters, but got {theta.shape}')
        return GaussianPolicy(unflatten(self.mean_net, theta[:n_net]), theta[n_net:].copy())


def gaussian_logprob(mean, log_std, action):
    """Log-density of a diagonal Gaussian, summed over the last axis."""
    mean = numpy.asarray(mean, dtype=numpy.float64)
    action = numpy.asarray(action, dtype=numpy.float64)
    log_std = numpy.asarray(log_std, dtype=numpy.float64)
    if mean.shape != action.shape or mean.shape[-1] != log_std.shape[-1]:
        raise ProstheticsShapeError(f'mean {mean.shape}, log_std {log_std.shape} and action {action.shape} disagree')
    z = (action - mean) * numpy.exp(-log_std)
    d = mean.shape[-1]
    return -0.5 * numpy.sum(z ** 2, axis=-1) - numpy.sum(log_std) - 0.5 * d * LOG_2PI


def policy_kl(mean_old, log_std_old, mean_new, log_std_new) -> float:
    """KL(old || new) summed over action dims and averaged over the state batch."""
    mean_old = numpy.atleast_2d(numpy.asarray(mean_old, dtype=numpy.float64))
    mean_new = numpy.atleast_2d(numpy.asarray(mean_new, dtype=numpy.float64))
    log_std_old = numpy.asarray(log_std_old, dtype=numpy.float64)
    log_std_new = numpy.asarray(log_std_new, dtype=numpy.float64)
    if mean_old.shape != mean_new.shape:
        raise ProstheticsShapeError(f'old mean {mean_old.shape} and new mean {mean_new.shape} disagree')
    var_old = numpy.exp(2.0 * log_std_old)
    var_new = numpy.exp(2.0 * log_std_new)
    per_dim = log_std_new - log_std_old + (var_old + (mean_old - mean_new) ** 2) / (2.0 * var_new) - 0.5
    return float(numpy.mean(numpy.sum(per_dim, axis=-1)))


def logprob_gradients(policy: GaussianPolicy, obs: numpy.ndarray, actions: numpy.ndarray,
                      weights: numpy.ndarray) -> Tuple[numpy.ndarray, numpy.ndarray]:
    """
    Gradient of `sum_i weights[i] * logprob(actions[i] | obs[i])`.

    Returns the flat mean-network gradient and the log_std gradient.

    """
    mean = policy.mean(obs)
    inv_var = numpy.exp(-2.0 * policy.log_std)
    diff = actions - mean
    grads = backward(policy.mean_net, obs, weights[:, None] * diff * inv_var)
    log_std_grad = numpy.sum(weights[:, None] * (diff ** 2 * inv_var - 1.0), axis=0)
    return numpy.concatenate([a.ravel() for a in grads.arrays()]), log_std_grad


def kl_gradient(policy: GaussianPolicy, obs: numpy.ndarray, mean_old: numpy.ndarray,
                log_std_old: numpy.ndarray) -> numpy.ndarray:
    """Flat gradient of policy_kl(old, policy) with respect to the policy parameters."""
    n = obs.shape[0]
    mean_new = policy.mean(obs)
    inv_var = numpy.exp(-2.0 * policy.log_std)
    grads = backward(policy.mean_net, obs, (mean_new - mean_old) * inv_var / n)
    var_old = numpy.exp(2.0 * log_std_old)
    log_std_grad = numpy.mean(1.0 - (var_old + (mean_old - mean_new) ** 2) * inv_var, axis=0)
    return numpy.concatenate([numpy.concatenate([a.ravel() for a in grads.arrays()]), log_std_grad])
