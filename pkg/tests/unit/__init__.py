"""Unit tests for engines, models and interfaces."""
