"""CSV results, `key = value` files and experiment config loading."""
import csv
import logging
from pathlib import Path

from qrnn.exceptions import ConfigError, SchemaError
from qrnn.models import ExperimentConfig, QrnnArchitecture, QrnnParameters
from qrnn.utils.helpers import format_float
from qrnn.utils.validators import validate_config_key

logger = logging.getLogger(__name__)

RESULT_SCHEMA = ('t', 'x_true', 'y_initial', 'y_trained', 'phase')
SUMMARY_SCHEMA = ('seed', 'mse', 'final_cost', 'iterations', 'converged', 'status')
SWEEP_SCHEMA = ('tau', 'seed', 'mse', 'status')
DATA_SCHEMA = ('t', 'x', 'phase')


def format_cell(value) -> str:
    """Floats with 17 significant digits, booleans lower-case, None empty."""
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float) or hasattr(value, 'dtype'):
        return format_float(value)
    return str(value)


def emit_csv(rows, schema, path) -> Path:
    """
    Write rows (dicts) under a header row.

    Every row must carry exactly the schema's keys; nothing is written
    otherwise.
    """
    rows = list(rows)
    schema = tuple(schema)
    for index, row in enumerate(rows):
        if set(row) != set(schema):
            missing = sorted(set(schema) - set(row))
            extra = sorted(set(row) - set(schema))
            raise SchemaError(f'Row {index} does not match schema (missing {missing}, unexpected {extra})')

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=schema, lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({key: format_cell(row[key]) for key in schema})

    logger.info(f'Wrote {len(rows)} rows to {path}')
    return path


def read_csv(path) -> list:
    """Rows as dicts of strings."""
    with Path(path).open('r', encoding='utf-8', newline='') as f:
        return list(csv.DictReader(f))


def write_key_values(data: dict, path, header: str = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f'# {header}'] if header else []
    lines.extend(f'{key} = {format_cell(value)}' for key, value in data.items())
    path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
    return path


def read_key_values(path) -> dict:
    """
    Parse `key = value` lines; `#` starts a comment.

    Malformed lines, bad keys and duplicates raise ConfigError.
    """
    values = {}
    text = Path(path).read_text(encoding='utf-8')
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f'{path}:{number}: expected `key = value`')

        key, value = (part.strip() for part in line.split('=', 1))
        if not validate_config_key(key):
            raise ConfigError(f'{path}:{number}: invalid key {key!r}')
        if key in values:
            raise ConfigError(f'{path}:{number}: duplicate key {key!r}')
        values[key] = value
    return values


def load_experiment_config(path, settings, task: str = None, **overrides) -> ExperimentConfig:
    """Config-file values over class defaults; task and keyword overrides win."""
    mapping = read_key_values(path) if path else {}
    if task is not None:
        mapping['task'] = task
    config = ExperimentConfig.from_mapping(settings, mapping)
    return config.with_overrides(**overrides)


def save_parameters(params: QrnnParameters, path) -> Path:
    return write_key_values(params.to_dict(), path, header='QRNN parameters')


def load_parameters(arch: QrnnArchitecture, path) -> QrnnParameters:
    return QrnnParameters.from_dict(arch, read_key_values(path))


def save_architecture(arch: QrnnArchitecture, path) -> Path:
    return write_key_values(arch.to_dict(), path, header='QRNN architecture')


def load_architecture(path) -> QrnnArchitecture:
    data = read_key_values(path)
    try:
        return QrnnArchitecture.from_dict(data)
    except ConfigError:
        raise
    except (KeyError, ValueError) as e:
        raise ConfigError(f'Invalid architecture file {path}: {e}')
