"""
Main application package for SigScale.
"""
