"""
On-disk formats.

Snapshot CSV (format_version 1):

    # format_version=1
    # m=3
    # dr=0.001
    # N=20000
    # time_tag=0.0
    r,u,ut
    1.0,0.0,0.0
    ...

Floats are written with repr, which round-trips exactly. Reports are JSON and
carry the fully resolved configuration together with its SHA-256 hash.
"""
import csv
import hashlib
import json
import logging
import math
import os

import numpy as np
from django.core.serializers.json import DjangoJSONEncoder

from waves.exceptions import ConfigError, ParseError
from waves.linear_wave import RadialField

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
HEADER_KEYS = ('format_version', 'm', 'dr', 'N', 'time_tag')
COLUMNS = ['r', 'u', 'ut']


class LabJSONEncoder(DjangoJSONEncoder):
    """
    DjangoJSONEncoder that also understands numpy scalars and arrays.
    """

    def default(self, o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        return super().default(o)


def _format(value):
    return repr(float(value))


def write_snapshot(field, path, m=3):
    """
    Write a RadialField as a snapshot CSV.
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', newline='') as handle:
        handle.write(f"# format_version={FORMAT_VERSION}\n")
        handle.write(f"# m={m}\n")
        handle.write(f"# dr={_format(field.dr)}\n")
        handle.write(f"# N={field.n}\n")
        handle.write(f"# time_tag={_format(field.time_tag)}\n")
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(COLUMNS)
        for r, u, ut in zip(field.grid, field.u, field.ut):
            writer.writerow([_format(r), _format(u), _format(ut)])


def _parse_header(lines):
    header = {}
    for number, line in enumerate(lines, start=1):
        if not line.startswith('#'):
            return header, number
        text = line[1:].strip()
        if '=' not in text:
            raise ParseError(f"malformed header entry '{text}'", line=number)
        key, value = (part.strip() for part in text.split('=', 1))
        if key not in HEADER_KEYS:
            raise ParseError(f"unknown header key '{key}'", line=number)
        try:
            header[key] = int(value) if key in ('format_version', 'm', 'N') else float(value)
        except ValueError:
            raise ParseError(f"header value '{value}' for {key} is not a number", line=number)
        if key == 'format_version' and header[key] != FORMAT_VERSION:
            raise ParseError(f"unsupported format_version {header[key]}", line=number)
    return header, len(lines) + 1


def read_snapshot(path):
    """
    Read and validate a snapshot CSV written by write_snapshot.
    """
    with open(path, newline='') as handle:
        lines = handle.read().split('\n')
    if lines and lines[-1] == '':
        lines.pop()

    header, first = _parse_header(lines)
    missing = [key for key in HEADER_KEYS if key not in header]
    if missing:
        raise ParseError(f"missing header keys: {', '.join(missing)}", line=first)
    if first > len(lines) or lines[first - 1].strip() != ','.join(COLUMNS):
        raise ParseError("expected the column line 'r,u,ut'", line=first)

    size = header['N'] + 1
    dr = header['dr']
    u = np.empty(size)
    ut = np.empty(size)
    rows = lines[first:]
    for index in range(size):
        number = first + 1 + index
        if index >= len(rows):
            raise ParseError(f"expected {size} rows, file ends after {index}", line=number)
        cells = rows[index].split(',')
        if len(cells) != 3:
            raise ParseError(f"expected 3 columns, got {len(cells)}", line=number)
        try:
            r, u[index], ut[index] = (float(cell) for cell in cells)
        except ValueError:
            raise ParseError("non-numeric value", line=number)
        if not all(math.isfinite(value) for value in (r, u[index], ut[index])):
            raise ParseError("non-finite value", line=number)
        if r != 1.0 + index * dr:
            raise ParseError(f"r={r!r} does not reproduce 1 + {index}*dr", line=number)
    if len(rows) > size:
        raise ParseError(f"expected {size} rows, found more", line=first + 1 + size)
    return RadialField(dr=dr, u=u, ut=ut, time_tag=header['time_tag'])


def write_rows(path, columns, rows):
    """
    Plain CSV with a column line; floats written round-trip exact.
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format(value) if isinstance(value, (float, np.floating)) else value for value in row])


def write_energy_log(trajectory, path):
    write_rows(path, ['t', 'energy'], trajectory.energy_log)


def write_profile(profile, path):
    """
    Stationary profile table: r, Q, Q'.
    """
    write_rows(path, ['r', 'Q', 'dQ'], zip(profile.grid, profile.samples, profile.slopes))


def config_hash(config):
    """
    SHA-256 of the canonical JSON form of a resolved configuration.
    """
    canonical = json.dumps(config, cls=LabJSONEncoder, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def write_report(path, payload, config):
    """
    JSON report embedding the resolved config and its hash.
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    document = {'config': config, 'config_hash': config_hash(config), **payload}
    with open(path, 'w') as handle:
        json.dump(document, handle, cls=LabJSONEncoder, indent=2, sort_keys=True)
    return document


def parse_config(source):
    """
    Parse and validate an experiment configuration (path to a JSON file, JSON text or dict).
    Returns (EvolutionConfig, data recipe, resolved config dict).
    """
    from waves.serializers import ExperimentConfigSerializer

    if isinstance(source, dict):
        raw = source
    else:
        text = source
        if os.path.exists(str(source)):
            with open(source) as handle:
                text = handle.read()
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"configuration is not valid JSON: {exc}")

    serializer = ExperimentConfigSerializer(data=raw)
    if not serializer.is_valid():
        errors = json.loads(json.dumps(serializer.errors))
        raise ConfigError(
            f"invalid configuration: {errors}",
            errors=errors,
            minimal_domain_end=serializer.minimal_domain_end,
        )
    resolved = json.loads(json.dumps(serializer.validated_data, cls=LabJSONEncoder))
    logger.debug("Resolved configuration %s", resolved)
    return serializer.evolution_config(), resolved['data'], resolved
