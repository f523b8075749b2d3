"""Test suite for the error-disturbance laboratory."""
