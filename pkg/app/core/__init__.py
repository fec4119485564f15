"""
Core computation: ingestion, metrics, significance tests, distribution
fitting and simulation experiments.
"""
