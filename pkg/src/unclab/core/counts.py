"""Count tables recorded for the four prepared states."""

from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType
from typing import Mapping, Optional, Tuple, Union

import numpy as np

from .exceptions import CountTableError
from .measurement import OUTCOMES


class PreparedState(str, Enum):
    """Input states of the three-state method, labelled by spin direction.

    PSI is the state under test; A_PSI = A|psi> (also B|psi> up to the
    phase i); X_AUX and Y_AUX are (A+I)|psi> and (B+I)|psi> over sqrt(2).
    """

    PSI = "+z"
    A_PSI = "-z"
    X_AUX = "+x"
    Y_AUX = "+y"

    @classmethod
    def parse(cls, label: Union[str, "PreparedState"]) -> "PreparedState":
        """Accept an enum member, a spin label such as ``+z`` or a role name."""
        if isinstance(label, cls):
            return label
        text = str(label).strip()
        for member in cls:
            if text == member.value or text.lower() == member.name.lower():
                return member
        raise ValueError(f"Unknown prepared state: {label!r}")


@dataclass(frozen=True, eq=False)
class CountTable:
    """Counts (or intensities) of the outcomes ++, +-, -+, -- in OUTCOMES order."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.array(self.counts, dtype=float).reshape(-1)
        if counts.shape != (4,):
            raise CountTableError(f"A count table has 4 cells, got {counts.shape[0]}")
        if not np.all(np.isfinite(counts)) or np.any(counts < 0):
            raise CountTableError(f"Counts must be finite and nonnegative: {counts}")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_mapping(cls, cells: Mapping[Tuple[int, int], float]) -> "CountTable":
        """Build from a {(m1, m2): count} mapping covering all four outcomes."""
        missing = [outcome for outcome in OUTCOMES if outcome not in cells]
        if missing:
            raise CountTableError(f"Missing outcomes {missing}")
        return cls(counts=np.array([cells[outcome] for outcome in OUTCOMES]))

    def __getitem__(self, outcome: Tuple[int, int]) -> float:
        return float(self.counts[OUTCOMES.index(outcome)])

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    @property
    def is_integral(self) -> bool:
        """True when every cell holds a whole number of counts."""
        return bool(np.all(self.counts == np.round(self.counts)))

    def marginal_first(self) -> np.ndarray:
        """Counts for m1 = +1 and m1 = -1."""
        return self.counts.reshape(2, 2).sum(axis=1)

    def marginal_second(self) -> np.ndarray:
        """Counts for m2 = +1 and m2 = -1."""
        return self.counts.reshape(2, 2).sum(axis=0)

    def normalized(self) -> np.ndarray:
        """Normalized intensities; raises on an empty table."""
        if self.total <= 0:
            raise CountTableError("Count table is empty")
        return self.counts / self.total

    def scaled(self, factor: float) -> "CountTable":
        return CountTable(counts=self.counts * factor)


@dataclass(frozen=True, eq=False)
class StatePreparationSet:
    """The four count tables taken at one detuning setting."""

    tables: Mapping[PreparedState, CountTable]
    phi: Optional[float] = None

    def __post_init__(self) -> None:
        tables = {PreparedState.parse(key): value for key, value in self.tables.items()}
        missing = [state.value for state in PreparedState if state not in tables]
        if missing:
            raise CountTableError(f"Missing prepared states: {', '.join(missing)}")
        object.__setattr__(self, "tables", MappingProxyType(tables))

    def __getitem__(self, state: Union[str, PreparedState]) -> CountTable:
        return self.tables[PreparedState.parse(state)]

    def scaled(self, factor: float) -> "StatePreparationSet":
        return StatePreparationSet(
            tables={
                state: table.scaled(factor) for state, table in self.tables.items()
            },
            phi=self.phi,
        )
