"""
Run artifacts.
Metrics and final-front CSVs, the JSON Lines run log, SVG plots, and batch
summary tables (written and recomputed from per-run CSVs).
"""
import json
import logging
import math
import re
from pathlib import Path

import matplotlib
import numpy as np
import pandas as pd

from models.run import METRICS_COLUMNS, RunReport
from utils.errors import OutputError

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402  pylint: disable=wrong-import-position

logger = logging.getLogger(__name__)

METRICS_FILE = 'metrics.csv'
FRONT_FILE = 'front.csv'
RUN_LOG_FILE = 'run.jsonl'
TIMING_FILE = 'timing.json'
CONVERGENCE_PLOT = 'convergence.svg'
FRONT_PLOT = 'front.svg'
HV_COMPARISON_PLOT = 'hv_comparison.svg'
FRONT_COMPARISON_PLOT = 'front_comparison.svg'
FLOAT_FORMAT = '%.10g'
SEED_DIR = re.compile(r'^seed-(\d+)$')


def run_directory(root: str | Path, problem: str, algorithm: str, seed: int) -> Path:
    """<root>/<problem>/<algo>/seed-<k>"""
    return Path(root) / problem / algorithm / f'seed-{seed}'


def _finite_or_none(value):
    if value is None:
        return None
    value = float(value)
    if math.isnan(value):
        return None
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return value


def _generation_record(record, delta: float) -> dict:
    return {
        'record': 'generation',
        'generation': record.generation,
        'evaluations': record.evaluations,
        'hv': _finite_or_none(record.hv),
        'igd': _finite_or_none(record.igd),
        'score': _finite_or_none(record.score),
        'delta': _finite_or_none(delta),
        'invoked': record.invoked,
        'tokens': record.tokens,
        'exchanges': [exchange.to_json() for exchange in record.exchanges],
    }


def _ensure_directory(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f'cannot create output directory {path}: {e}', path=str(path)) from e
    return path


def _save_svg(fig, path: Path, salt: str):
    """Save with a fixed id salt so reruns produce identical files."""
    with plt.rc_context({'svg.hashsalt': salt}):
        fig.savefig(path, format='svg', metadata={'Date': None})
    plt.close(fig)


def _front_axes(objectives: int, size: tuple = (5, 5)):
    fig = plt.figure(figsize=size)
    if objectives == 3:
        ax = fig.add_subplot(projection='3d')
        ax.set_zlabel('f3')
    else:
        ax = fig.add_subplot()
    ax.set_xlabel('f1')
    ax.set_ylabel('f2')
    return fig, ax


def _run_salt(report: RunReport) -> str:
    return f'{report.config.problem}-{report.config.algorithm}-{report.config.seed}'


def _plot_convergence(report: RunReport, path: Path):
    frame = report.to_frame()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(frame['evaluations'], frame['hv'], linewidth=1.5)
    ax.set_xlabel('evaluations')
    ax.set_ylabel('HV')
    ax.set_title(f'{report.config.problem} {report.config.algorithm} seed {report.config.seed}')
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save_svg(fig, path, _run_salt(report))


def _plot_front(report: RunReport, front: np.ndarray, path: Path):
    fig, ax = _front_axes(front.shape[1])
    ax.scatter(*report.pf.T, s=1, c='lightgray', label='true PF')
    ax.scatter(*front.T, s=12, c='tab:blue', label='final front')
    ax.legend()
    fig.tight_layout()
    _save_svg(fig, path, _run_salt(report))


def emit_outputs(report: RunReport, out_dir: str | Path | None = None) -> dict[str, str]:
    """
    Write every artifact of a run.

    Files: metrics.csv (one row per generation), front.csv (final non-dominated
    objective vectors), run.jsonl (one record per generation with gate fields
    and provider exchanges, then a summary record), timing.json (wall time and
    provider latencies), and when plotting is on, convergence.svg and front.svg.
    Everything except timing.json is byte-identical across reruns of one
    configuration with the mock provider.

    Args:
        report: Completed run report
        out_dir: Target directory, defaults to report.config.out_dir

    Returns:
        dict: Artifact name -> path written

    Raises:
        OutputError: If the directory or a file cannot be written
    """
    target = out_dir or report.config.out_dir
    if not target:
        raise OutputError('no output directory configured')
    directory = _ensure_directory(Path(target))
    paths = {}
    try:
        metrics_path = directory / METRICS_FILE
        report.to_frame().to_csv(metrics_path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
        paths['metrics'] = str(metrics_path)

        front = report.final_front()
        front_path = directory / FRONT_FILE
        pd.DataFrame(front, columns=[f'f{m + 1}' for m in range(front.shape[1])]).to_csv(
            front_path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n',
        )
        paths['front'] = str(front_path)

        log_path = directory / RUN_LOG_FILE
        with open(log_path, 'w', encoding='utf-8') as handle:
            for record in report.series:
                handle.write(json.dumps(_generation_record(record, report.config.delta)) + '\n')
            handle.write(json.dumps({'record': 'summary', **report.summary()}) + '\n')
        paths['log'] = str(log_path)

        timing_path = directory / TIMING_FILE
        timing_path.write_text(json.dumps(report.timing(), indent=2) + '\n', encoding='utf-8')
        paths['timing'] = str(timing_path)

        if report.config.plot:
            convergence_path = directory / CONVERGENCE_PLOT
            _plot_convergence(report, convergence_path)
            paths['convergence'] = str(convergence_path)
            front_plot_path = directory / FRONT_PLOT
            _plot_front(report, front, front_plot_path)
            paths['front_plot'] = str(front_plot_path)
    except OSError as e:
        raise OutputError(f'cannot write outputs to {directory}: {e}', path=str(directory)) from e

    logger.info('Outputs written to %s', directory)
    return paths


def format_mean_std(mean: float, std: float) -> str:
    """Render like 7.1777e-1 (5.50e-4)."""
    def compact(value: float, digits: int) -> str:
        if not math.isfinite(value):
            return str(value)
        mantissa, exponent = f'{value:.{digits}e}'.split('e')
        return f'{mantissa}e{int(exponent)}'
    return f'{compact(mean, 4)} ({compact(std, 2)})'


def summarize_runs(runs: pd.DataFrame, keys: list[str]) -> pd.DataFrame:
    """
    Mean and sample standard deviation of final HV / IGD, tokens and invocations.

    Failed runs are counted but excluded from the statistics; a single run
    reports a standard deviation of 0.

    Args:
        runs: Per-run table (status, hv, igd, tokens, invocations plus the keys)
        keys: Grouping columns

    Returns:
        pd.DataFrame: One row per group
    """
    rows = []
    for group, frame in runs.groupby(keys, sort=False):
        group = group if isinstance(group, tuple) else (group,)
        ok = frame[frame['status'] == 'ok']
        row = dict(zip(keys, group))
        row['runs'] = len(frame)
        row['failures'] = int((frame['status'] != 'ok').sum())
        for column in ('hv', 'igd', 'tokens', 'invocations'):
            values = ok[column].astype(float)
            row[f'{column}_mean'] = float(values.mean()) if len(values) else math.nan
            row[f'{column}_std'] = float(np.nan_to_num(values.std(ddof=1))) if len(values) else math.nan
        row['HV'] = format_mean_std(row['hv_mean'], row['hv_std'])
        row['IGD'] = format_mean_std(row['igd_mean'], row['igd_std'])
        rows.append(row)
    return pd.DataFrame(rows)


def write_batch_tables(out_dir: Path, runs: pd.DataFrame, summary: pd.DataFrame, prefix: str = '') -> dict:
    """Write <prefix>runs.csv and <prefix>summary.csv (ablation uses ablation_runs.csv / ablation.csv)."""
    directory = _ensure_directory(Path(out_dir))
    if prefix:
        runs_path = directory / f'{prefix}_runs.csv'
        summary_path = directory / f'{prefix}.csv'
    else:
        runs_path = directory / 'runs.csv'
        summary_path = directory / 'summary.csv'
    try:
        runs.to_csv(runs_path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
        summary.to_csv(summary_path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    except OSError as e:
        raise OutputError(f'cannot write batch tables to {directory}: {e}', path=str(directory)) from e
    return {'runs': str(runs_path), 'summary': str(summary_path)}


def _mean_hv_curve(run_dirs: list[Path]) -> pd.DataFrame:
    """Mean evaluations and HV per generation, truncated to the shortest run."""
    frames = [read_metrics(run_dir / METRICS_FILE) for run_dir in run_dirs]
    length = min(len(frame) for frame in frames)
    return pd.DataFrame({
        'evaluations': np.mean([frame['evaluations'].to_numpy(dtype=float)[:length] for frame in frames], axis=0),
        'hv': np.mean([frame['hv'].to_numpy(dtype=float)[:length] for frame in frames], axis=0),
    })


def median_run(runs: pd.DataFrame) -> pd.Series:
    """The run with the median final HV (lower median, seed breaks ties)."""
    ordered = runs.sort_values(['hv', 'seed'], kind='stable')
    return ordered.iloc[(len(ordered) - 1) // 2]


def write_batch_plots(out_dir: str | Path, runs: pd.DataFrame, pf_by_problem: dict[str, np.ndarray]) -> list[str]:
    """
    Per-problem comparison figures built from the stored per-run outputs.

    <out>/<problem>/hv_comparison.svg holds the mean HV curve against evaluations,
    one line per algorithm. <out>/<problem>/front_comparison.svg overlays the
    final front of each algorithm's median-HV run on the true PF sample.

    Args:
        out_dir: Batch output root holding <problem>/<algo>/seed-<k>/ directories
        runs: Per-run table from run_batch
        pf_by_problem: True PF sample per problem

    Returns:
        list: Paths written

    Raises:
        OutputError: If a figure cannot be written
    """
    root = Path(out_dir)
    written = []
    ok = runs[runs['status'] == 'ok']
    for problem, problem_runs in ok.groupby('problem', sort=False):
        pf = pf_by_problem[problem]
        directory = _ensure_directory(root / problem)
        curve_fig, curve_ax = plt.subplots(figsize=(6, 4))
        front_fig, front_ax = _front_axes(pf.shape[1], size=(6, 5))
        front_ax.scatter(*pf.T, s=1, c='lightgray', label='true PF')
        for algorithm, algorithm_runs in problem_runs.groupby('algorithm', sort=False):
            run_dirs = [run_directory(root, problem, algorithm, seed) for seed in algorithm_runs['seed']]
            curve = _mean_hv_curve(run_dirs)
            curve_ax.plot(curve['evaluations'], curve['hv'], linewidth=1.5, label=algorithm)
            median = median_run(algorithm_runs)
            front = pd.read_csv(run_directory(root, problem, algorithm, int(median['seed'])) / FRONT_FILE).to_numpy()
            front_ax.scatter(*front.T, s=12, label=f'{algorithm} (seed {int(median["seed"])})')
        curve_ax.set_xlabel('evaluations')
        curve_ax.set_ylabel('mean HV')
        curve_ax.set_title(problem)
        curve_ax.grid(True, alpha=0.3)
        curve_ax.legend()
        curve_fig.tight_layout()
        front_ax.set_title(problem)
        front_ax.legend()
        front_fig.tight_layout()
        try:
            _save_svg(curve_fig, directory / HV_COMPARISON_PLOT, f'{problem}-hv')
            _save_svg(front_fig, directory / FRONT_COMPARISON_PLOT, f'{problem}-front')
        except OSError as e:
            raise OutputError(f'cannot write comparison plots to {directory}: {e}', path=str(directory)) from e
        written += [str(directory / HV_COMPARISON_PLOT), str(directory / FRONT_COMPARISON_PLOT)]
    return written


def read_metrics(path: str | Path) -> pd.DataFrame:
    """Load a metrics CSV written by emit_outputs."""
    frame = pd.read_csv(path)
    missing = set(METRICS_COLUMNS) - set(frame.columns)
    if missing:
        raise OutputError(f'{path} is missing columns: {sorted(missing)}', path=str(path))
    return frame


def load_batch_summary(out_dir: str | Path) -> pd.DataFrame:
    """
    Recompute the batch summary from per-run metrics CSVs.

    Walks <out>/<problem>/<algo>/seed-<k>/metrics.csv and takes the last row
    of each as that run's final values.

    Args:
        out_dir: Batch output root

    Returns:
        pd.DataFrame: Same layout as run_batch's summary
    """
    root = Path(out_dir)
    records = []
    for metrics_path in sorted(root.glob(f'*/*/seed-*/{METRICS_FILE}')):
        seed_dir = metrics_path.parent
        match = SEED_DIR.match(seed_dir.name)
        if not match:
            continue
        frame = read_metrics(metrics_path)
        last = frame.iloc[-1]
        records.append({
            'problem': seed_dir.parent.parent.name,
            'algorithm': seed_dir.parent.name,
            'seed': int(match.group(1)),
            'status': 'ok',
            'hv': float(last['hv']),
            'igd': float(last['igd']),
            'tokens': int(last['tokens']),
            'invocations': int(frame['invoked'].astype(bool).sum()),
        })
    if not records:
        raise OutputError(f'no run outputs found under {root}', path=str(root))
    return summarize_runs(pd.DataFrame(records), ['problem', 'algorithm'])
