"""
Command line entry point.

    python cli.py run --problem ZDT1 --algo nsga2-llm --pop 100 --evals 10000 --delta 0.1 --seed 1
    python cli.py batch --seeds 1..10 --problems ZDT1,ZDT2,UF1..UF10 --algos nsga2,nsga2-llm
    python cli.py ablate --deltas 0.01,0.05,0.1,0.5,1 --problems UF1..UF3

Every flag, the batch and ablate lists included, can also come from a KEY=value
run file (--config); flags win.
"""
import argparse
import json
import logging
import re
import sys

from config import config as settings_by_name
from models.run import RunConfig, read_run_file
from utils.errors import ConfigurationError, MoeaError
from utils.harness import ABLATION_DELTAS, ABLATION_PROBLEMS, ablation_delta, run, run_batch
from utils.outputs import emit_outputs

logger = logging.getLogger(__name__)

RANGE_PATTERN = re.compile(r'^([A-Za-z]*)(\d+)\.\.([A-Za-z]*)(\d+)$')
DEFAULT_SEEDS_TEXT = '1..10'
# batch / ablate keys; a run file may carry them alongside the run keys
SWEEP_KEYS = ('SEEDS', 'PROBLEMS', 'ALGOS', 'DELTAS', 'WORKERS')


def expand_list(text: str) -> list[str]:
    """
    Expand "1..3,7" or "ZDT1,UF1..UF3" into explicit items.

    Raises:
        ConfigurationError: On a malformed range
    """
    items = []
    for part in filter(None, (piece.strip() for piece in text.split(','))):
        match = RANGE_PATTERN.match(part)
        if not match:
            items.append(part)
            continue
        prefix, start, end_prefix, end = match.groups()
        if end_prefix and end_prefix.upper() != prefix.upper():
            raise ConfigurationError(f'range {part!r} mixes prefixes')
        first, last = int(start), int(end)
        if last < first:
            raise ConfigurationError(f'range {part!r} is descending')
        items.extend(f'{prefix}{number}' for number in range(first, last + 1))
    return items


def _int_list(text: str) -> list[int]:
    try:
        return [int(item) for item in expand_list(text)]
    except ValueError as e:
        raise ConfigurationError(f'expected integers, got {text!r}') from e


def _float_list(text: str) -> list[float]:
    try:
        return [float(item) for item in text.split(',') if item.strip()]
    except ValueError as e:
        raise ConfigurationError(f'expected numbers, got {text!r}') from e


def _positive_int(key: str, value) -> int:
    try:
        number = int(str(value).strip())
    except ValueError as e:
        raise ConfigurationError(f'{key} must be an integer, got {value!r}') from e
    if number < 1:
        raise ConfigurationError(f'{key} must be at least 1, got {number}')
    return number


def _add_run_options(parser: argparse.ArgumentParser):
    """Flags mirroring the run-file keys; unset flags stay None so the file can supply them."""
    parser.add_argument('--config', help='KEY=value run file')
    parser.add_argument('--problem', dest='PROBLEM')
    parser.add_argument('--algo', dest='ALGO', choices=['nsga2', 'nsga2-llm', 'nsga2-llm-always'])
    parser.add_argument('--pop', dest='POP', type=int)
    parser.add_argument('--evals', dest='EVALS', type=int)
    parser.add_argument('--delta', dest='DELTA', type=float)
    parser.add_argument('--l', dest='L', type=int)
    parser.add_argument('--s', dest='S', type=int)
    parser.add_argument('--seed', dest='SEED', type=int)
    parser.add_argument('--provider', dest='PROVIDER', choices=['mock', 'http', 'http-chat'])
    parser.add_argument('--model', dest='MODEL')
    parser.add_argument('--api-base', dest='API_BASE')
    parser.add_argument('--api-key-env', dest='API_KEY_ENV', help='name of the variable holding the key')
    parser.add_argument('--timeout', dest='TIMEOUT', type=float)
    parser.add_argument('--temperature', dest='TEMPERATURE', type=float)
    parser.add_argument('--out', dest='OUT')
    parser.add_argument('--free-llm-evals', dest='FREE_LLM_EVALS', action='store_const', const=True)
    parser.add_argument('--dim', dest='DIM', type=int)
    parser.add_argument('--retries', dest='RETRIES', type=int)
    parser.add_argument('--pf-samples', dest='PF_SAMPLES', type=int)
    parser.add_argument('--max-generations', dest='MAX_GENERATIONS', type=int)
    parser.add_argument('--no-plot', dest='PLOT', action='store_const', const=False)
    parser.add_argument('--log-level', default=None)


RUN_FLAG_KEYS = (
    'PROBLEM', 'ALGO', 'POP', 'EVALS', 'DELTA', 'L', 'S', 'SEED', 'PROVIDER', 'MODEL',
    'API_BASE', 'API_KEY_ENV', 'TIMEOUT', 'TEMPERATURE', 'OUT', 'FREE_LLM_EVALS', 'DIM',
    'RETRIES', 'PF_SAMPLES', 'MAX_GENERATIONS', 'PLOT',
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Adaptive LLM-assisted NSGA-II experiments')
    commands = parser.add_subparsers(dest='command', required=True)

    run_parser = commands.add_parser('run', help='single run')
    _add_run_options(run_parser)
    run_parser.set_defaults(handler=cmd_run)

    batch_parser = commands.add_parser('batch', help='problems x algorithms x seeds')
    _add_run_options(batch_parser)
    batch_parser.add_argument('--seeds')
    batch_parser.add_argument('--problems')
    batch_parser.add_argument('--algos')
    batch_parser.add_argument('--workers')
    batch_parser.set_defaults(handler=cmd_batch)

    ablate_parser = commands.add_parser('ablate', help='gate threshold sweep')
    _add_run_options(ablate_parser)
    ablate_parser.add_argument('--deltas')
    ablate_parser.add_argument('--seeds')
    ablate_parser.add_argument('--problems')
    ablate_parser.add_argument('--workers')
    ablate_parser.set_defaults(handler=cmd_ablate)
    return parser


def load_run_config(args: argparse.Namespace, settings) -> RunConfig:
    """Defaults from settings, then the run file, then flags."""
    values = {key: value for key, value in read_run_file(args.config).items() if key not in SWEEP_KEYS}
    values.update({key: getattr(args, key) for key in RUN_FLAG_KEYS if getattr(args, key, None) is not None})
    return RunConfig.from_mapping(values, base=RunConfig.from_settings(settings))


def load_sweep_options(args: argparse.Namespace, defaults: dict) -> dict:
    """
    Batch / ablation settings: flag, else run-file key, else default.

    Returns:
        dict: seeds (list[int]), problems (list[str] | None), algos (list[str] | None),
            deltas (list[float] | None), workers (int)
    """
    file_values = read_run_file(args.config)
    raw = {}
    for key in SWEEP_KEYS:
        flag = getattr(args, key.lower(), None)
        raw[key] = flag if flag is not None else file_values.get(key) or defaults.get(key)
    return {
        'seeds': _int_list(raw['SEEDS']),
        'problems': [name.upper() for name in expand_list(raw['PROBLEMS'])] if raw['PROBLEMS'] else None,
        'algos': [name.lower() for name in expand_list(raw['ALGOS'])] if raw['ALGOS'] else None,
        'deltas': _float_list(raw['DELTAS']) if raw['DELTAS'] else None,
        'workers': _positive_int('WORKERS', raw['WORKERS']),
    }


def cmd_run(args: argparse.Namespace, settings) -> int:
    config = load_run_config(args, settings).validate()
    report = run(config)
    if config.out_dir:
        emit_outputs(report, config.out_dir)
    print(json.dumps(report.summary(), indent=2))
    return 0


def cmd_batch(args: argparse.Namespace, settings) -> int:
    template = load_run_config(args, settings)
    options = load_sweep_options(args, {'SEEDS': DEFAULT_SEEDS_TEXT, 'WORKERS': '1'})
    result = run_batch(
        template,
        seeds=options['seeds'],
        problems=options['problems'],
        algorithms=options['algos'],
        out_dir=template.out_dir or settings.OUTPUT_DIR,
        workers=options['workers'],
    )
    print(result.summary[['problem', 'algorithm', 'runs', 'failures', 'HV', 'IGD']].to_string(index=False))
    return 1 if result.runs['status'].eq('failed').all() else 0


def cmd_ablate(args: argparse.Namespace, settings) -> int:
    template = load_run_config(args, settings)
    options = load_sweep_options(args, {
        'SEEDS': DEFAULT_SEEDS_TEXT,
        'WORKERS': '1',
        'PROBLEMS': ','.join(ABLATION_PROBLEMS),
        'DELTAS': ','.join(f'{delta:g}' for delta in ABLATION_DELTAS),
    })
    result = ablation_delta(
        template,
        deltas=options['deltas'],
        seeds=options['seeds'],
        problems=options['problems'],
        out_dir=template.out_dir or settings.OUTPUT_DIR,
        workers=options['workers'],
    )
    columns = ['delta', 'runs', 'failures', 'tokens_mean', 'igd_mean', 'invocations_mean']
    print(result.summary[columns].to_string(index=False))
    return 1 if result.runs['status'].eq('failed').all() else 0


def main(argv: list[str] | None = None) -> int:
    """
    Parse arguments and dispatch.

    Returns:
        int: 0 on success, 2 on configuration errors, 1 on other failures
    """
    args = build_parser().parse_args(argv)
    settings = settings_by_name['default']()
    logging.basicConfig(
        level=(args.log_level or settings.LOG_LEVEL).upper(),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )
    try:
        return args.handler(args, settings)
    except ConfigurationError as e:
        logger.error('Configuration error: %s', e)
        return 2
    except MoeaError as e:
        logger.error('%s: %s', e.code, e)
        return 1


if __name__ == '__main__':
    sys.exit(main())
