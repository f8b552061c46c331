"""Hand-tuned proportional controller, the reference every learned agent is measured against."""

import numpy

from prosthetics.muscles import SUPPORT_MUSCLES, MuscleAction, MuscleMix
from prosthetics.stander import Observation

ORACLE_GAIN = 0.5

# observation layout: normalized height, vel_y, vel_x, velocity error
VELOCITY_ERROR_INDEX = 3


def oracle_controller(obs: Observation, mix: MuscleMix) -> MuscleAction:
    error = float(obs[VELOCITY_ERROR_INDEX])
    drive = numpy.clip(0.5 + ORACLE_GAIN * error * numpy.sign(mix.weights), 0.0, 1.0)
    return numpy.concatenate([numpy.ones(SUPPORT_MUSCLES), drive])


class OraclePolicy:
    def __init__(self, mix: MuscleMix):
        self.mix = mix

    def act(self, obs: Observation) -> MuscleAction:
        return oracle_controller(obs, self.mix)

    def __str__(self):
        return 'OraclePolicy'
