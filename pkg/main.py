"""
Main entry point for furdyn.

Subcommands run experiment sweeps (analyze, dichotomy, densities, lemmas)
or the family-algebra selftest. Exit status: 0 when no consistency check was
violated, 2 on a violation, 1 on a configuration or grammar error.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from pydantic import ValidationError

from config.loader import get_config_value
from config.settings import ExperimentConfig
from core.orchestrator import COMMANDS, EXIT_CONFIG, run_command


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='furdyn', description='Furstenberg-family dynamics experiments')
    parser.add_argument('command', choices=COMMANDS, help='Experiment to run')
    parser.add_argument('--system', dest='systems', action='append', help='System descriptor (repeatable)')
    parser.add_argument('--family', dest='families', action='append', help='Family descriptor (repeatable)')
    parser.add_argument('--epsilon', dest='eps_grid', type=float, nargs='+', help='Separation scales')
    parser.add_argument('--horizon', dest='horizon', type=int, help='Window length N (>= 1024)')
    parser.add_argument('--samples', dest='samples', type=int, help='Sampled points per ball')
    parser.add_argument('--seed', dest='seed', type=int, help='Random seed (required except for selftest)')
    parser.add_argument('--out', dest='outputs', help='Output directory')
    parser.add_argument('--format', dest='format', choices=['json', 'csv', 'both'], help='Report format')
    parser.add_argument('--config', dest='config', help='Experiment config file (JSON or YAML)')
    parser.add_argument('--set', dest='sets', action='append', help='Set expression for densities (repeatable)')
    parser.add_argument('--workers', dest='workers', type=int, help='Parallel cells')
    parser.add_argument('--margin', dest='margin', type=float, help='Density margin of the verdict policy')
    return parser


def load_experiment_file(path: str) -> Dict[str, Any]:
    """
    Raises:
        ValueError: the file is missing or is not a mapping.
    """
    p = Path(path)
    if not p.exists():
        raise ValueError(f"config file not found: {path}")
    text = p.read_text(encoding='utf-8')
    data = json.loads(text) if p.suffix == '.json' else yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a mapping, got {type(data).__name__}")
    return data


def experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    """Config file values overlaid with the flags given on the command line."""
    data: Dict[str, Any] = load_experiment_file(args.config) if args.config else {}
    for key in ('systems', 'families', 'eps_grid', 'horizon', 'samples', 'seed', 'outputs', 'format',
                'sets', 'workers'):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    if args.margin is not None:
        data['policy'] = {**data.get('policy', {}), 'margin': args.margin}
    if args.command == 'selftest' and 'seed' not in data:
        data['seed'] = get_config_value('probe.seed', 7)
    return ExperimentConfig(**data)


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
    args = build_parser().parse_args(argv)
    try:
        cfg = experiment_config(args)
        sweep = run_command(args.command, cfg)
    except ValidationError as e:
        logging.error('[config] ❌ invalid experiment config:\n%s', e)
        return EXIT_CONFIG
    except ValueError as e:
        # SpecParseError is a ValueError
        logging.error('[config] ❌ %s', e)
        return EXIT_CONFIG
    return sweep.exit_code


if __name__ == "__main__":
    sys.exit(main())
