"""Shared utilities for the gamma-lab numerical experiment scripts."""
