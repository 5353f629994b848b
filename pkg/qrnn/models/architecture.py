"""QRNN architecture, trainable parameters and recurrent state."""
from dataclasses import dataclass, replace
from itertools import product
from typing import Optional

import numpy as np

from qrnn.exceptions import ConfigError, DimensionMismatchError
from qrnn.models.density import DensityMatrix

ANGLE_NAMES = ('alpha', 'beta', 'gamma')


def coupling_pairs(n: int) -> list:
    """Index pairs (j, k), j > k, in draw order: j ascending, then k ascending."""
    return [(j, k) for j in range(1, n) for k in range(j)]


@dataclass(frozen=True)
class QrnnArchitecture:
    """Static circuit structure: registers, depth, tau and H_int coefficients."""

    n_A: int
    n_B: int
    depth: int
    tau: float
    a: tuple
    J: tuple

    def __post_init__(self):
        object.__setattr__(self, 'a', tuple(float(v) for v in self.a))
        object.__setattr__(self, 'J', tuple(float(v) for v in self.J))
        object.__setattr__(self, 'tau', float(self.tau))

        if self.n_A < 1 or self.n_B < 1:
            raise ConfigError(f'Both registers need at least one qubit (n_A={self.n_A}, n_B={self.n_B})')
        if self.depth < 1:
            raise ConfigError(f'Depth must be at least 1, got {self.depth}')
        if not np.isfinite(self.tau) or self.tau < 0:
            raise ConfigError(f'Evolution time must be finite and non-negative, got {self.tau}')
        if len(self.a) != self.n:
            raise DimensionMismatchError(f'Expected {self.n} field coefficients, got {len(self.a)}')
        if len(self.J) != self.n * (self.n - 1) // 2:
            raise DimensionMismatchError(
                f'Expected {self.n * (self.n - 1) // 2} couplings, got {len(self.J)}'
            )

    def __repr__(self):
        return f'<QrnnArchitecture n_A={self.n_A} n_B={self.n_B} D={self.depth} tau={self.tau}>'

    @property
    def n(self) -> int:
        return self.n_A + self.n_B

    @property
    def n_angles(self) -> int:
        return 3 * self.n * self.depth

    @property
    def n_params(self) -> int:
        return self.n_angles + 1

    def couplings(self) -> dict:
        """Map (j, k) -> J_jk."""
        return dict(zip(coupling_pairs(self.n), self.J))

    def with_tau(self, tau: float) -> 'QrnnArchitecture':
        return replace(self, tau=tau)

    @classmethod
    def uncoupled(cls, n_A: int, n_B: int, depth: int, tau: float = 0.0) -> 'QrnnArchitecture':
        """Architecture with all Hamiltonian coefficients zero."""
        n = n_A + n_B
        return cls(n_A, n_B, depth, tau, (0.0,) * n, (0.0,) * (n * (n - 1) // 2))

    def to_dict(self) -> dict:
        data = {
            'n_A': self.n_A,
            'n_B': self.n_B,
            'depth': self.depth,
            'tau': self.tau,
        }
        for j, value in enumerate(self.a):
            data[f'a_{j}'] = value
        for (j, k), value in zip(coupling_pairs(self.n), self.J):
            data[f'J_{j}_{k}'] = value
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'QrnnArchitecture':
        n = int(data['n_A']) + int(data['n_B'])
        try:
            a = [float(data[f'a_{j}']) for j in range(n)]
            J = [float(data[f'J_{j}_{k}']) for j, k in coupling_pairs(n)]
        except KeyError as e:
            raise ConfigError(f'Missing Hamiltonian coefficient {e}')
        return cls(int(data['n_A']), int(data['n_B']), int(data['depth']), float(data['tau']), a, J)


@dataclass(frozen=True, eq=False)
class QrnnParameters:
    """
    Flattened trainable vector.

    Layout: layer d = 1..D outer, qubit q = 0..n-1 inner, (alpha, beta, gamma)
    innermost, then c_out last; 3nD + 1 entries.
    """

    values: np.ndarray
    depth: int
    n_qubits: int

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        expected = 3 * self.n_qubits * self.depth + 1
        if values.size != expected:
            raise DimensionMismatchError(f'Expected {expected} parameters, got {values.size}')
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    def __repr__(self):
        return f'<QrnnParameters {len(self)} entries c_out={self.c_out:.6g}>'

    def __len__(self):
        return self.values.size

    @classmethod
    def initial(cls, arch: QrnnArchitecture) -> 'QrnnParameters':
        """All angles 0, c_out = 1."""
        values = np.zeros(arch.n_params)
        values[-1] = 1.0
        return cls(values, arch.depth, arch.n)

    @classmethod
    def from_vector(cls, arch: QrnnArchitecture, vector) -> 'QrnnParameters':
        return cls(vector, arch.depth, arch.n)

    @classmethod
    def random(cls, arch: QrnnArchitecture, rng: np.random.Generator,
               scale: float = np.pi, c_out: Optional[float] = None) -> 'QrnnParameters':
        values = rng.uniform(-scale, scale, arch.n_params)
        values[-1] = rng.uniform(0.5, 1.5) if c_out is None else c_out
        return cls(values, arch.depth, arch.n)

    @property
    def angles(self) -> np.ndarray:
        """Angles shaped (D, n, 3)."""
        return self.values[:-1].reshape(self.depth, self.n_qubits, 3)

    @property
    def c_out(self) -> float:
        return float(self.values[-1])

    @property
    def n_angles(self) -> int:
        return self.values.size - 1

    def angle_index(self, layer: int, qubit: int, which: int) -> int:
        """Flat index of angle `which` (0=alpha, 1=beta, 2=gamma); layer is 0-based."""
        return (layer * self.n_qubits + qubit) * 3 + which

    def locate(self, index: int) -> tuple:
        """Inverse of angle_index: (layer, qubit, which)."""
        if not 0 <= index < self.n_angles:
            raise IndexError(f'Angle index {index} out of range')
        layer, rest = divmod(index, 3 * self.n_qubits)
        qubit, which = divmod(rest, 3)
        return layer, qubit, which

    def shifted(self, index: int, delta: float) -> 'QrnnParameters':
        values = self.values.copy()
        values[index] += delta
        return QrnnParameters(values, self.depth, self.n_qubits)

    def names(self) -> list:
        """Parameter names in layout order, e.g. alpha_1_0 (layer 1-based)."""
        names = [
            f'{ANGLE_NAMES[which]}_{d + 1}_{q}'
            for d, q, which in product(range(self.depth), range(self.n_qubits), range(3))
        ]
        names.append('c_out')
        return names

    def to_dict(self) -> dict:
        return dict(zip(self.names(), (float(v) for v in self.values)))

    @classmethod
    def from_dict(cls, arch: QrnnArchitecture, data: dict) -> 'QrnnParameters':
        template = cls.initial(arch)
        try:
            values = [float(data[name]) for name in template.names()]
        except KeyError as e:
            raise ConfigError(f'Missing parameter {e}')
        return cls.from_vector(arch, values)


@dataclass(frozen=True, eq=False)
class QrnnState:
    """Memory register rho_A plus the evolution unitary it is stepped with."""

    rho_A: DensityMatrix
    unitary: np.ndarray
    params: QrnnParameters
    arch: QrnnArchitecture

    def __repr__(self):
        return f'<QrnnState rho_A on {self.rho_A.n_qubits} qubits>'

    def is_built_from(self, arch: QrnnArchitecture, params: QrnnParameters) -> bool:
        """True when the cached unitary belongs to this architecture and these parameters."""
        if self.arch is not arch and self.arch != arch:
            return False
        return self.params is params or np.array_equal(self.params.values, params.values)
