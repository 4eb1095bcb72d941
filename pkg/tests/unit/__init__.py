"""Unit tests for circle-lab modules."""
