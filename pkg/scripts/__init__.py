"""Benchmark and maintenance scripts."""
