"""
wishmix - Multiple-view clustering of correlation matrices with Wishart mixtures.
"""

__version__ = "0.1.0"
__author__ = "Pratik Patil"
