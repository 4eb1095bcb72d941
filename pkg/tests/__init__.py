"""
circle-lab test suite

Unit tests, integration and acceptance checks, performance benchmarks.
"""

__all__ = []
