"""
Experiments API Blueprint
Lists benchmark problems, launches runs and serves stored run metrics.
"""
import re
import uuid
from pathlib import Path

from flask import Blueprint, request, current_app

from models.run import RunConfig
from utils.errors import MoeaError, OutputError
from utils.harness import run
from utils.outputs import METRICS_FILE, emit_outputs, read_metrics
from utils.problems import SUITE
from utils.responses import error_response, moea_error_response, success_response, to_jsonable

experiments_bp = Blueprint('experiments', __name__)

# no leading dot, so '.' and '..' never name a run
RUN_ID_PATTERN = re.compile(r'^[A-Za-z0-9_-][A-Za-z0-9_.-]*$')


def _output_root() -> Path:
    return Path(current_app.config['OUTPUT_DIR'])


@experiments_bp.route('/problems', methods=['GET'])
def list_problems() -> tuple:
    """
    List the benchmark suite.

    Returns:
        JSON response with name, default dimension and objective count per problem
    """
    problems = [entry.to_json() for entry in SUITE.values()]
    return success_response(data=problems, count=len(problems))


@experiments_bp.route('/runs', methods=['POST'])
def create_run() -> tuple:
    """
    Run one configuration synchronously and store its outputs.

    Request body (run-file keys, case-insensitive):
        {
            "problem": "ZDT1",
            "algo": "nsga2-llm",
            "pop": 20,
            "evals": 400,
            "delta": 0.1,
            "seed": 1,
            "provider": "mock"
        }

    Returns:
        JSON response with run_id and the run summary
    """
    data = request.get_json(silent=True)
    if data is None or not isinstance(data, dict):
        return error_response('INVALID_REQUEST', 'JSON object body is required')
    data = {key: value for key, value in data.items() if str(key).upper() != 'OUT'}
    try:
        config = RunConfig.from_mapping(data, base=RunConfig.from_settings(current_app.config)).validate()
        run_id = f'{config.problem.upper()}-{config.algorithm}-seed{config.seed}-{uuid.uuid4().hex[:8]}'
        report = run(config)
        emit_outputs(report, _output_root() / run_id)
    except MoeaError as e:
        current_app.logger.error('Run request failed: %s', e)
        return moea_error_response(e)
    return success_response(
        data=to_jsonable(report.summary()),
        message='Run complete',
        status_code=201,
        run_id=run_id,
    )


@experiments_bp.route('/runs', methods=['GET'])
def list_runs() -> tuple:
    """
    List stored runs.

    Returns:
        JSON response with run ids that have a metrics CSV
    """
    root = _output_root()
    run_ids = sorted(path.parent.name for path in root.glob(f'*/{METRICS_FILE}')) if root.is_dir() else []
    return success_response(data=run_ids, count=len(run_ids))


@experiments_bp.route('/runs/<run_id>/metrics', methods=['GET'])
def get_run_metrics(run_id: str) -> tuple:
    """
    Per-generation metrics of a stored run.

    Args:
        run_id: Identifier returned by POST /runs

    Returns:
        JSON response with one row per generation
    """
    if not RUN_ID_PATTERN.match(run_id):
        return error_response('NOT_FOUND', f'Run not found: {run_id}', 404)
    metrics_path = _output_root() / run_id / METRICS_FILE
    if not metrics_path.is_file():
        return error_response('NOT_FOUND', f'Run not found: {run_id}', 404)
    try:
        frame = read_metrics(metrics_path)
    except OutputError as e:
        current_app.logger.error('Unreadable metrics for %s: %s', run_id, e)
        return moea_error_response(e)
    rows = to_jsonable(frame.to_dict(orient='records'))
    return success_response(data=rows, count=len(rows), run_id=run_id)
