"""Time series model."""
from dataclasses import dataclass

import numpy as np

from qrnn.exceptions import DomainError, DimensionMismatchError


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Ordered scalars in [-1, 1] with the train/test split index."""

    values: np.ndarray
    train_len: int
    name: str = 'series'

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(values)):
            raise DomainError(f'{self.name} has non-finite values')
        if values.size and np.max(np.abs(values)) > 1.0:
            raise DomainError(f'{self.name} leaves [-1, 1] (max |x| = {np.max(np.abs(values))})')
        if not 2 <= self.train_len <= values.size:
            raise DimensionMismatchError(
                f'train_len must lie in [2, {values.size}], got {self.train_len}'
            )
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    def __repr__(self):
        return f'<TimeSeries {self.name} {len(self)} points, train {self.train_len}>'

    def __len__(self):
        return self.values.size

    @property
    def train_values(self) -> np.ndarray:
        return self.values[:self.train_len]

    @property
    def test_values(self) -> np.ndarray:
        return self.values[self.train_len:]

    def training_pairs(self) -> tuple:
        """Inputs x_0..x_{T-1} and targets x_1..x_{T-1}."""
        return self.train_values, self.values[1:self.train_len]

    def phase(self, t: int) -> str:
        return 'train' if t < self.train_len else 'test'

    def to_dict(self) -> dict:
        return {
            'name': self.name,
            'total_len': len(self),
            'train_len': self.train_len,
        }
