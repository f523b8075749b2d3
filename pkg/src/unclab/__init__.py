"""Error-disturbance laboratory package."""

__version__ = "0.1.0"
__author__ = "Error-Disturbance Lab developers"
