"""Core functionality for the error-disturbance laboratory."""
