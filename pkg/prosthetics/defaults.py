import os

OUTPUT_DIR = os.path.expanduser(os.getenv('PROSTHETICS_OUTPUT_DIR', 'results'))
CHECKPOINT_FORMAT_VERSION = 1

OBSERVATION_DIM = 4
ACTION_DIM = 19
HIDDEN_DIMS = (64, 64)

# ProstheticsEnv reports at most 9 per timestep
MAX_TIMESTEP_REWARD = 9.0
DEFAULT_TARGET_VELOCITY = 3.0

# same hyperparameters for every algorithm
DEFAULT_GAMMA = 0.99
DEFAULT_GAE_LAMBDA = 0.95
DEFAULT_REWARD_SCALE = 0.01
