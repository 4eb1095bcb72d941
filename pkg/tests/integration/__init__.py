"""Integration tests: whole command runs and cross-module identities."""
