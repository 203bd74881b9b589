"""
Report writer for sweep outputs.

Reports are append-only JSON files named
`<system>__<family>__<notion>__<seed>.json`; floats are written with 12
significant digits and keys sorted, so identical runs give identical bytes.
"""
import csv
import json
import logging
import math
import re
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import jsonschema
import numpy as np

SCHEMA_VERSION = 1
SIGNIFICANT_DIGITS = 12
SCHEMA_PATH = Path(__file__).with_name('report.schema.json')
SUMMARY_FILE = 'summary.csv'
SUMMARY_HEADER = ['system', 'family', 'notion', 'epsilon', 'verdict', 'witness', 'seed']
DENSITY_FILE = 'densities.csv'
DENSITY_HEADER = ['set', 'horizon', 'upper', 'lower', 'banach_upper', 'banach_lower', 'convergence_spread']
WITNESS_TEXT_LIMIT = 160

_UNSAFE = re.compile(r'[^A-Za-z0-9._=+-]+')
_schema_cache: Optional[dict] = None


def fixed_float(x: float) -> Any:
    """x rounded to 12 significant digits; non-finite values become strings."""
    if not math.isfinite(x):
        return str(x)
    return float(f"{x:.{SIGNIFICANT_DIGITS}g}")


def normalize(value: Any) -> Any:
    """JSON-ready copy: fixed-digit floats, Fractions as p/q text, numpy and enums unwrapped."""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, Enum):
        return normalize(value.value)
    if isinstance(value, np.generic):
        return normalize(value.item())
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return fixed_float(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, dict):
        return {str(k): normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [normalize(v) for v in value]
    return str(value)


def canonical_json(document: Dict[str, Any]) -> str:
    return json.dumps(normalize(document), indent=2, sort_keys=True, ensure_ascii=False) + '\n'


def report_filename(system: str, family: str, notion: str, seed: int) -> str:
    parts = [_UNSAFE.sub('_', str(p)).strip('_') or '_' for p in (system, family, notion, seed)]
    return '__'.join(parts) + '.json'


def build_document(system: str, family: str, notion: str, seed: int, verdict: str,
                   witness: Dict[str, Any], horizon: int, config: Dict[str, Any],
                   epsilon: Optional[float] = None, delta_found: Optional[float] = None,
                   details: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    document = {
        'schema_version': SCHEMA_VERSION,
        'system': system,
        'family': family,
        'notion': notion,
        'seed': seed,
        'epsilon': epsilon,
        'verdict': verdict,
        'witness': witness,
        'horizon': horizon,
        'delta_found': delta_found,
        'config': config,
    }
    if details is not None:
        document['details'] = details
    return normalize(document)


def load_schema() -> dict:
    global _schema_cache
    if _schema_cache is None:
        _schema_cache = json.loads(SCHEMA_PATH.read_text(encoding='utf-8'))
    return _schema_cache


def validate_document(document: Dict[str, Any]) -> None:
    """
    Raises:
        jsonschema.ValidationError: the document does not match report.schema.json.
    """
    jsonschema.validate(instance=document, schema=load_schema())


def write_report(out_dir: Path, document: Dict[str, Any]) -> Optional[Path]:
    """
    Write one report. An existing file with the same content is left alone;
    one with different content is kept and the new report is skipped.

    Returns:
        The report path, or None when the write was skipped.
    """
    validate_document(document)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / report_filename(document['system'], document['family'],
                                     document['notion'], document['seed'])
    text = canonical_json(document)
    if path.exists():
        if path.read_text(encoding='utf-8') == text:
            logging.debug('[reports] %s unchanged', path.name)
            return path
        logging.warning('[reports] ⚠ %s exists with different content; keeping the earlier report', path.name)
        return None
    path.write_text(text, encoding='utf-8')
    logging.info('[reports]     ✓ %s (%d bytes)', path.name, len(text))
    return path


def witness_text(witness: Dict[str, Any]) -> str:
    """Short `key=value` digest of the scalar witness entries."""
    items = []
    for key in sorted(witness):
        value = normalize(witness[key])
        if isinstance(value, (dict, list)):
            continue
        if isinstance(value, bool):
            value = str(value).lower()
        items.append(f"{key}={value}")
    text = ';'.join(items)
    return text if len(text) <= WITNESS_TEXT_LIMIT else text[:WITNESS_TEXT_LIMIT - 3] + '...'


def summary_row(document: Dict[str, Any]) -> List[Any]:
    eps = document.get('epsilon')
    return [document['system'], document['family'], document['notion'],
            '' if eps is None else eps, document['verdict'],
            witness_text(document['witness']), document['seed']]


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='') as fh:
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([normalize(v) for v in row])
    return path


def write_summary(out_dir: Path, documents: Sequence[Dict[str, Any]]) -> Path:
    """summary.csv, one row per report, in the order given."""
    path = _write_csv(Path(out_dir) / SUMMARY_FILE, SUMMARY_HEADER, (summary_row(d) for d in documents))
    logging.info('[reports] ✓ %s (%d rows)', SUMMARY_FILE, len(documents))
    return path


def write_densities(out_dir: Path, rows: Sequence[Dict[str, Any]]) -> Path:
    path = _write_csv(Path(out_dir) / DENSITY_FILE, DENSITY_HEADER,
                      ([row[k] for k in DENSITY_HEADER] for row in rows))
    logging.info('[reports] ✓ %s (%d rows)', DENSITY_FILE, len(rows))
    return path


def write_trace(out_dir: Path, name: str, values: Sequence[float]) -> Path:
    """Plot-ready `n,value` CSV of a trace."""
    filename = _UNSAFE.sub('_', name).strip('_') + '.csv'
    return _write_csv(Path(out_dir) / filename, ['n', 'value'], enumerate(values))
