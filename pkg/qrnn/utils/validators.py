"""Input validation utilities."""
import math
import re

PRODUCT_STATE_PATTERN = r'^[01+\-rl]+$'
CONFIG_KEY_PATTERN = r'^[A-Za-z_][A-Za-z0-9_]*$'


def validate_unit_interval(x):
    """Validate a scalar for the arccos encoding."""
    try:
        x = float(x)
    except (TypeError, ValueError):
        return False
    return math.isfinite(x) and -1.0 <= x <= 1.0


def validate_u64(value):
    """Validate an unsigned 64-bit seed."""
    if isinstance(value, bool) or not isinstance(value, int):
        return False
    return 0 <= value < 1 << 64


def validate_axis(axis):
    """Validate a Pauli axis label."""
    return isinstance(axis, str) and axis.lower() in ('x', 'y', 'z')


def validate_product_label(label):
    """Validate a product-state label such as '000' or 'r00'."""
    if not label:
        return False
    return bool(re.match(PRODUCT_STATE_PATTERN, label))


def validate_config_key(key):
    """Validate a `key = value` file key."""
    if not key:
        return False
    return bool(re.match(CONFIG_KEY_PATTERN, key))


def validate_tau_grid(grid):
    """Validate a non-empty list of non-negative evolution times."""
    if not grid:
        return False
    return all(math.isfinite(t) and t >= 0 for t in grid)
