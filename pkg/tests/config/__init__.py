from .test_config import TestConfig, load_test_config

__all__ = ['TestConfig', 'load_test_config']