"""Performance benchmarks for circle-lab."""
