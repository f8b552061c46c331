"""
Чекпоинты агентов в JSON.

Числа пишутся кратчайшим десятичным представлением, которое читается обратно
побитово, поэтому save -> load -> save даёт тот же файл байт в байт.

"""

import hashlib
import json
import logging
import math
from typing import Any, Dict, Optional

import numpy

from prosthetics.algorithms.checkpoint import AgentCheckpoint, AlgorithmId
from prosthetics.defaults import CHECKPOINT_FORMAT_VERSION
from prosthetics.exceptions import (
    CheckpointFingerprintError,
    CheckpointVersionError,
    MalformedCheckpointError,
    ProstheticsCheckpointError,
    ProstheticsConfigError,
    ProstheticsNumericalError,
    ProstheticsShapeError,
)
from prosthetics.nn.adam import AdamState
from prosthetics.nn.mlp import MlpParams, OutputActivation, flatten, init_params, unflatten

logger = logging.getLogger(__name__)


def dumps_checkpoint(ckpt: AgentCheckpoint) -> str:
    payload = {
        'format_version': CHECKPOINT_FORMAT_VERSION,
        'algorithm_id': ckpt.algorithm_id.value,
        'env_fingerprint': ckpt.env_fingerprint,
        'env_steps': int(ckpt.env_steps),
        'networks': {name: _network_to_dict(params) for name, params in ckpt.networks.items()},
        'vectors': {name: _floats(vector) for name, vector in ckpt.vectors.items()},
        'optimizers': {name: _adam_to_dict(state) for name, state in ckpt.optimizers.items()},
    }
    try:
        payload['payload_sha256'] = _digest(payload)
        return json.dumps(payload, sort_keys=True, indent=1, allow_nan=False) + '\n'
    except ValueError:
        raise ProstheticsNumericalError(f'{ckpt} holds non-finite values and can not be saved')


def loads_checkpoint(text: str, expected_fingerprint: Optional[str] = None, allow_mismatch: bool = False) -> AgentCheckpoint:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedCheckpointError(f'checkpoint is not valid JSON: {e}')
    if not isinstance(payload, dict):
        raise MalformedCheckpointError('checkpoint must be a JSON object')

    version = payload.get('format_version')
    if version != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointVersionError(f'checkpoint format version {version}, expect {CHECKPOINT_FORMAT_VERSION}')
    digest = payload.pop('payload_sha256', None)
    if digest != _digest(payload):
        raise MalformedCheckpointError('checkpoint content does not match its checksum')

    try:
        ckpt = AgentCheckpoint(
            algorithm_id=AlgorithmId(payload['algorithm_id']),
            env_fingerprint=str(payload['env_fingerprint']),
            networks={name: _network_from_dict(data) for name, data in payload['networks'].items()},
            vectors={name: numpy.array(values, dtype=numpy.float64) for name, values in payload['vectors'].items()},
            optimizers={name: _adam_from_dict(data) for name, data in payload['optimizers'].items()},
            env_steps=int(payload['env_steps']),
        )
    except (KeyError, TypeError, ValueError, AttributeError, ProstheticsConfigError, ProstheticsShapeError) as e:
        raise MalformedCheckpointError(f'checkpoint is missing or has broken field: {e!r}')

    if expected_fingerprint is not None and ckpt.env_fingerprint != expected_fingerprint:
        msg = f'checkpoint trained on env {ckpt.env_fingerprint[:12]}, current env is {expected_fingerprint[:12]}'
        if not allow_mismatch:
            raise CheckpointFingerprintError(msg)
        logger.warning(f'{msg}, loading anyway')
    return ckpt


def save_checkpoint(path: str, ckpt: AgentCheckpoint):
    text = dumps_checkpoint(ckpt)
    with open(path, 'w', encoding='utf-8', newline='\n') as fh:
        fh.write(text)
    logger.info(f'checkpoint {ckpt} saved to {path}')


def load_checkpoint(path: str, expected_fingerprint: Optional[str] = None, allow_mismatch: bool = False) -> AgentCheckpoint:
    try:
        with open(path, encoding='utf-8') as fh:
            text = fh.read()
    except UnicodeDecodeError as e:
        raise MalformedCheckpointError(f'checkpoint {path} is not text: {e}')
    except OSError as e:
        raise ProstheticsCheckpointError(f'can not read checkpoint {path}: {e}')
    return loads_checkpoint(text, expected_fingerprint, allow_mismatch)


def _digest(payload: Dict[str, Any]) -> str:
    canonical = json.dumps(payload, sort_keys=True, allow_nan=False)
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def _floats(array: numpy.ndarray):
    return [float(x) for x in numpy.ravel(array)]


def _network_to_dict(params: MlpParams) -> Dict[str, Any]:
    return {
        'layer_dims': list(params.layer_dims),
        'output_activation': params.output_activation.value,
        'params': _floats(flatten(params)),
    }


def _network_from_dict(data: Dict[str, Any]) -> MlpParams:
    template = init_params(data['layer_dims'], OutputActivation(data['output_activation']))
    flat = numpy.array(data['params'], dtype=numpy.float64)
    if flat.shape != (template.size(),):
        raise ValueError(f'network {template} needs {template.size()} parameters, file has {flat.size}')
    return unflatten(template, flat)


def _adam_to_dict(state: AdamState) -> Dict[str, Any]:
    return {
        'step_count': state.step_count,
        'beta1': state.beta1,
        'beta2': state.beta2,
        'epsilon_stab': state.epsilon_stab,
        'shapes': [list(m.shape) for m in state.first_moment],
        'first_moment': [_floats(m) for m in state.first_moment],
        'second_moment': [_floats(v) for v in state.second_moment],
    }


def _adam_from_dict(data: Dict[str, Any]) -> AdamState:
    shapes = [tuple(shape) for shape in data['shapes']]

    def moments(key):
        arrays = tuple(numpy.array(values, dtype=numpy.float64).reshape(shape) for values, shape in zip(data[key], shapes))
        if len(arrays) != len(shapes):
            raise ValueError(f'optimizer {key} has {len(arrays)} arrays, expect {len(shapes)}')
        return arrays

    step_count = int(data['step_count'])
    if step_count < 0 or not all(math.isfinite(data[k]) for k in ('beta1', 'beta2', 'epsilon_stab')):
        raise ValueError(f'broken optimizer hyperparameters {data}')
    return AdamState(
        first_moment=moments('first_moment'),
        second_moment=moments('second_moment'),
        step_count=step_count,
        beta1=float(data['beta1']),
        beta2=float(data['beta2']),
        epsilon_stab=float(data['epsilon_stab']),
    )
