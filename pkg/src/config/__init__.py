"""
Configuration objects for wishmix.
"""

from .config import Hyperparams, SynthConfig, PreprocessConfig, RunConfig, get_default_hyperparams

__all__ = ["Hyperparams", "SynthConfig", "PreprocessConfig", "RunConfig", "get_default_hyperparams"]
