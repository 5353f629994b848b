"""Helper utilities."""
import numpy as np

MASK_64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """SplitMix64 stream; bit-exact across implementations."""

    def __init__(self, seed: int):
        self.state = seed & MASK_64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK_64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK_64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK_64
        return z ^ (z >> 31)

    def next_symmetric(self) -> float:
        """Draw in [-1, 1): top 53 bits scaled to [0, 1), then 2u - 1."""
        u = (self.next_u64() >> 11) * 2.0 ** -53
        return 2.0 * u - 1.0


def stream_seed(master_seed: int, seed_index: int) -> int:
    """master_seed XOR (seed_index * golden gamma), modulo 2^64."""
    return (master_seed ^ (seed_index * GOLDEN_GAMMA)) & MASK_64


def format_float(value) -> str:
    """17 significant digits; round-trips to the identical double."""
    if value is None:
        return ''
    return f'{float(value):.17g}'


def median(values) -> float:
    values = [v for v in values if v is not None]
    if not values:
        return float('nan')
    return float(np.median(values))


def relative_discrepancy(a, b) -> float:
    """max |a - b| over entries, relative to the larger infinity norm."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0), 1e-300)
    return float(np.max(np.abs(a - b), initial=0.0) / scale)


def entrywise_discrepancy(a, b, floor: float = 1e-6) -> float:
    """
    max_i |a_i - b_i| / max(|a_i|, |b_i|).

    Entries smaller than floor times the largest magnitude are measured
    against that level instead.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    magnitude = np.maximum(np.abs(a), np.abs(b))
    level = max(floor * np.max(magnitude, initial=0.0), 1e-300)
    return float(np.max(np.abs(a - b) / np.maximum(magnitude, level), initial=0.0))
