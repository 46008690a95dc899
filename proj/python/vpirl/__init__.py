"""Bayesian model-based exploration with VPI action selection."""

from vpirl._core import *  # noqa: F401,F403
