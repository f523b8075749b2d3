"""Command-line interface for the error-disturbance laboratory."""
