"""Gumbel-Softmax activation selection with a gradient-norm KL correction."""

from .activations import CATALOG, LEAKY_SLOPE, Activation
from .model import DivergenceError, Network, TrainConfig, TrainTrace, evaluate, train
from .numkit import Rng
from .routing import RoutedLayer, hard_select, route_backward, route_forward
from .synthdata import Dataset, DatasetSpec, generate, split

__version__ = "0.1.0"
