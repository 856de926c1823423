import csv
import dataclasses
import io
import json
import logging
import math
import os
import tempfile

from fractions import Fraction
from pathlib import Path

import numpy as np
from django.conf import settings
from django.db import DatabaseError, transaction
from django.utils import timezone

from apps.experiments.models import ExperimentRun, SweepPoint
from apps.utils.exceptions import DomainError

logger = logging.getLogger(__name__)

CSV_HEADER = ('gamma', 'p', 'p_error', 'p_double_gamma', 'residual')
CSV_FORMAT = '.12g'


def jsonable(value):
    """Plain JSON types; non-finite floats become null, complex numbers {real, imag}."""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return jsonable(dataclasses.asdict(value))
    if isinstance(value, dict):
        return {str(key): jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {'real': jsonable(value.real), 'imag': jsonable(value.imag)}
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def sweep_row(record):
    return {
        'gamma': record.gamma,
        'p': record.p,
        'p_error': record.p_error,
        'p_double_gamma': record.p_double_gamma,
        'residual': record.functional_residual,
        'route': record.route,
        'tau': record.tau,
        'error': record.error,
    }


def build_envelope(config, records, timestamp=True):
    envelope = {
        'command': config.command,
        'tool_version': settings.TOOL_VERSION,
        'config_echo': config.echo(),
        'records': jsonable(records),
    }
    if timestamp:
        envelope['created_at'] = timezone.now().isoformat()
    return envelope


def render_json(envelope):
    return json.dumps(envelope, indent=2, sort_keys=True, allow_nan=False) + '\n'


def render_sweep_csv(rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([
            'nan' if row[column] is None else format(float(row[column]), CSV_FORMAT)
            for column in CSV_HEADER
        ])
    return buffer.getvalue()


def atomic_write(path, data):
    """Write to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = data.encode('utf-8') if isinstance(data, str) else data
    handle = tempfile.NamedTemporaryFile(dir=path.parent, prefix=f'.{path.name}.', suffix='.tmp', delete=False)
    try:
        with handle:
            handle.write(payload)
        os.replace(handle.name, path)
    except BaseException:
        Path(handle.name).unlink(missing_ok=True)
        raise
    return path


def output_path_for(config, suffix=None):
    if config.output_path:
        return Path(config.output_path)
    return Path(settings.LZ_OUTPUT_DIR) / f"{config.command}.{suffix or config.output_format}"


def write_result(config, envelope):
    path = output_path_for(config)
    if config.output_format == 'csv':
        text = render_sweep_csv(envelope['records']['rows'])
    else:
        text = render_json(envelope)
    atomic_write(path, text)
    logger.info(f"Wrote {config.command} result to {path}")
    return path


def load_envelope(path):
    path = Path(path)
    if not path.is_file():
        raise DomainError(f"result file {path} does not exist")
    try:
        envelope = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path} is not a JSON result envelope: {exc}")
    if not isinstance(envelope, dict) or 'command' not in envelope:
        raise DomainError(f"{path} is not a result envelope")
    return envelope


def record_run(config, envelope, exit_code, path):
    """Persist the run and its sweep rows; a missing database only costs the record."""
    try:
        with transaction.atomic():
            run = ExperimentRun.objects.create(
                command=config.command,
                config=envelope['config_echo'],
                payload=envelope['records'],
                exit_code=exit_code,
                output_path=str(path),
                tool_version=settings.TOOL_VERSION,
            )
            rows = envelope['records'].get('rows', []) if isinstance(envelope['records'], dict) else []
            SweepPoint.objects.bulk_create([
                SweepPoint(
                    run=run,
                    position=position,
                    gamma=row['gamma'],
                    p=row['p'],
                    p_error=row['p_error'],
                    p_double_gamma=row['p_double_gamma'],
                    residual=row['residual'],
                    route=row['route'],
                    tau=row['tau'],
                    error=row['error'] or '',
                )
                for position, row in enumerate(rows)
            ])
    except DatabaseError as exc:
        logger.warning(f"Run of {config.command} not recorded (run migrate first?): {exc}")
        return None
    return run
