"""
Synthetic benchmark generator with planted ground truth.
"""

from .synthgen import GroundTruth, random_correlation, generate

__all__ = ["GroundTruth", "random_correlation", "generate"]
