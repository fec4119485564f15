"""
Command-line interface for SigScale.
"""
