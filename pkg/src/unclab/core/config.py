"""Configuration management for the error-disturbance laboratory."""

import os


class Config:
    """Configuration class for the error-disturbance laboratory."""

    # Application settings
    APP_NAME: str = "Error-Disturbance Lab"
    APP_VERSION: str = "0.1.0"

    # Numerical tolerances
    NORMALIZATION_TOL: float = 1e-10
    HERMITIAN_TOL: float = 1e-12
    COMPLETENESS_TOL: float = 1e-10
    UNITARY_TOL: float = 1e-10
    PROBABILITY_TOL: float = 1e-10
    AUDIT_TOL: float = float(os.getenv("UNCLAB_AUDIT_TOL", "1e-9"))
    VARIANCE_FLOOR: float = -1e-12

    # Experiment defaults (about 90 neutrons/s over one minute per state)
    DEFAULT_COUNTS: int = int(os.getenv("UNCLAB_COUNTS", "5400"))
    DEFAULT_CONTRAST: float = 1.0
    DEFAULT_MISALIGN_DEG: float = 0.0
    SYSTEMATIC_DEG: float = float(os.getenv("UNCLAB_SYSTEMATIC_DEG", "1.6"))
    DEFAULT_BOOTSTRAP: int = int(os.getenv("UNCLAB_BOOTSTRAP", "1000"))
    AUX_NORMALIZATION: float = 2.0
    CORRUPTION_SIGMAS: float = 5.0
    MIN_POISSON_COUNTS: int = 50

    # Sweep and audit settings
    DEFAULT_PHI_GRID: str = "0:90:19"
    DEFAULT_AUDIT_DRAWS: int = 10000
    DEFAULT_INDIRECT_DRAWS: int = 1000
    DEFAULT_SHARDS: int = int(os.getenv("UNCLAB_SHARDS", "4"))

    # Output settings
    CSV_SIGNIFICANT_DIGITS: int = 6
    OUTPUT_FORMATS: tuple = ("csv", "json")

    @classmethod
    def default_seed(cls) -> int:
        """Get the default RNG seed, honouring UNCLAB_SEED."""
        return int(os.getenv("UNCLAB_SEED", "0"))

    @classmethod
    def log_level(cls) -> str:
        """Get the default log level name."""
        return os.getenv("UNCLAB_LOG_LEVEL", "WARNING").upper()

    @classmethod
    def csv_float_format(cls) -> str:
        """Get the printf-style float format used for CSV output."""
        return f"%.{cls.CSV_SIGNIFICANT_DIGITS}g"
