"""Test package for gz-concavity-lab."""
