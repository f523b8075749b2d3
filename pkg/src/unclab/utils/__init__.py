"""Utilities for the error-disturbance laboratory."""
