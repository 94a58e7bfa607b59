"""
Experiment harness.
The adaptive LLM-assisted NSGA-II loop, multi-seed batches and the delta ablation sweep.
"""
import logging
import math
import time
from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import pandas as pd

from models.exchange import TokenUsage
from models.individual import Population
from models.run import RunConfig, RunReport, GenerationRecord
from utils.core import RngStream, evaluate, initialize_population
from utils.errors import BudgetExhausted, MoeaError
from utils.gate import GateState, should_invoke_llm
from utils.llm_operator import build_mating_pool, llm_variation
from utils.metrics import MetricContext, hypervolume, igd, nondominated
from utils.nsga2 import environmental_selection, rank_and_crowd, reproduce
from utils.outputs import emit_outputs, run_directory, summarize_runs, write_batch_plots, write_batch_tables
from utils.problems import make_problem, true_pf_samples
from utils.providers import Provider, make_provider, usage_report

logger = logging.getLogger(__name__)

DEFAULT_SEEDS = tuple(range(1, 11))
ABLATION_DELTAS = (0.01, 0.05, 0.1, 0.5, 1.0)
ABLATION_PROBLEMS = ('UF1', 'UF2', 'UF3')

GenerationObserver = Callable[[Population], None]


def _measure(pop: Population, ctx: MetricContext, pf) -> tuple[float, float]:
    front = nondominated(pop.objectives())
    return hypervolume(front, ctx), igd(front, pf)


def run(
    config: RunConfig,
    provider: Provider | None = None,
    on_generation: GenerationObserver | None = None,
) -> RunReport:
    """
    Execute one optimization run.

    init -> evaluate -> loop { sort + crowding -> gate score -> LLM or plain
    variation -> evaluate Q_t -> environmental selection } until the next
    generation would overrun N_max or the generation cap is reached.

    Args:
        config: Run configuration (validated here)
        provider: LLM provider, built from config.provider when omitted
        on_generation: Called with the population after every generation, 0 included

    Returns:
        RunReport: Series, final population and LLM statistics

    Raises:
        ConfigurationError: If the configuration or provider setup is invalid
        EvaluationError: If the evaluator produces a non-finite objective
    """
    config.validate()
    spec = make_problem(config.problem, config.d)
    if config.uses_llm and provider is None:
        provider = make_provider(config.provider)
    pf = true_pf_samples(config.problem, config.pf_samples)
    ctx = MetricContext.from_pf(pf)
    rng = RngStream(config.seed)
    gate = GateState(delta=config.delta)
    charge = not config.free_llm_evals
    always = config.algorithm == 'nsga2-llm-always'

    logger.info(
        'Run start: %s %s seed=%s N=%s N_max=%s delta=%s',
        config.problem, config.algorithm, config.seed, config.N, config.N_max, config.delta,
    )
    started = time.perf_counter()

    pop = initialize_population(spec, config.N, rng)
    evaluate(spec, pop)
    hv, igd_value = _measure(pop, ctx, pf)
    series = [GenerationRecord(generation=0, evaluations=pop.evaluations_used, hv=hv, igd=igd_value)]
    if on_generation:
        on_generation(pop)

    exchanges = []
    tokens = TokenUsage()
    invocations = injected = fallbacks = 0
    stopped_reason = 'generation cap'

    for generation in range(1, config.generation_cap + 1):
        partition = rank_and_crowd(pop)
        score = gate.score(pop, partition)
        use_llm = config.uses_llm and (always or gate.would_invoke(score))
        cost = config.N + (config.s if use_llm and charge else 0)
        if pop.evaluations_used + cost > config.N_max:
            stopped_reason = 'evaluation budget'
            break
        should_invoke_llm(gate, score, generation)

        generation_exchanges = []
        if use_llm:
            try:
                result = llm_variation(
                    pop, spec, config.variation, provider, config.l, config.s, rng,
                    retries=config.retries,
                    generation=generation,
                    charge_evaluations=charge,
                    budget_remaining=config.N_max - pop.evaluations_used - config.N,
                )
            except BudgetExhausted as e:
                logger.warning('Generation %s discarded: %s', generation, e)
                stopped_reason = 'evaluation budget'
                break
            offspring = result.offspring
            generation_exchanges = result.exchanges
            invocations += 1
            injected += result.injected
            fallbacks += int(result.fell_back)
            tokens = tokens + result.usage
        else:
            pool = build_mating_pool(pop, config.N, rng)
            offspring = reproduce(pool, pop, spec, config.variation, rng)

        evaluate(spec, offspring)
        union = offspring.derive(pop.members + offspring.members, generation=generation)
        pop = environmental_selection(union, config.N)
        pop.generation = generation
        exchanges.extend(generation_exchanges)

        hv, igd_value = _measure(pop, ctx, pf)
        series.append(GenerationRecord(
            generation=generation,
            evaluations=pop.evaluations_used,
            hv=hv,
            igd=igd_value,
            score=score,
            invoked=use_llm,
            tokens=tokens.total,
            exchanges=generation_exchanges,
        ))
        if on_generation:
            on_generation(pop)

    rank_and_crowd(pop)
    usage = usage_report(exchanges)
    report = RunReport(
        config=config,
        series=series,
        final_population=pop,
        pf=pf,
        wall_time=time.perf_counter() - started,
        gate_history=gate.history,
        exchanges=exchanges,
        invocations=invocations,
        llm_failures=usage.failures,
        injected=injected,
        fallbacks=fallbacks,
        usage=usage,
        stopped_reason=stopped_reason,
    )
    logger.info(
        'Run end: %s %s seed=%s generations=%s evaluations=%s hv=%.4f igd=%.4g tokens=%s (%s)',
        config.problem, config.algorithm, config.seed, report.generations,
        pop.evaluations_used, report.final_hv, report.final_igd, usage.total_tokens, stopped_reason,
    )
    return report


@dataclass
class BatchResult:
    """
    Outcome of a batch.

    Schema:
        runs: pd.DataFrame - one row per (problem, algorithm, seed), failures included
        summary: pd.DataFrame - one row per (problem, algorithm) with mean / std statistics
    """
    runs: pd.DataFrame
    summary: pd.DataFrame


def _run_record(config: RunConfig, provider: Provider | None = None) -> dict:
    """Run one config and flatten the outcome; failures become records too."""
    record = {
        'problem': config.problem,
        'algorithm': config.algorithm,
        'seed': config.seed,
        'delta': config.delta,
    }
    try:
        report = run(config, provider=provider)
        if config.out_dir:
            emit_outputs(report, config.out_dir)
    except Exception as e:  # pylint: disable=broad-exception-caught
        code = e.code if isinstance(e, MoeaError) else type(e).__name__
        logger.error('Run failed: %s %s seed=%s: %s: %s', config.problem, config.algorithm, config.seed, code, e)
        record.update(status='failed', error=f'{code}: {e}', hv=math.nan, igd=math.nan,
                      tokens=0, invocations=0, generations=0, evaluations=0)
        return record
    record.update(
        status='ok', error='', hv=report.final_hv, igd=report.final_igd,
        tokens=report.total_tokens, invocations=report.invocations,
        generations=report.generations, evaluations=report.series[-1].evaluations,
    )
    return record


def _execute(configs: list[RunConfig], workers: int, provider: Provider | None) -> list[dict]:
    if workers > 1 and provider is None and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(_run_record, configs))
    records = []
    for index, config in enumerate(configs, start=1):
        records.append(_run_record(config, provider=provider))
        logger.info('Batch progress: %s/%s', index, len(configs))
    return records


def run_batch(
    template: RunConfig,
    seeds: Iterable[int] = DEFAULT_SEEDS,
    problems: Iterable[str] | None = None,
    algorithms: Iterable[str] | None = None,
    out_dir: str | None = None,
    workers: int = 1,
    provider: Provider | None = None,
) -> BatchResult:
    """
    Independent runs over problems x algorithms x seeds.

    Args:
        template: Settings shared by every run
        seeds: At least one seed
        problems: Problem names, defaults to the template's
        algorithms: Algorithm names, defaults to the template's
        out_dir: When set, each run writes to <out>/<problem>/<algo>/seed-<k>/
            and the tables go to <out>/runs.csv and <out>/summary.csv; with plotting
            on, <out>/<problem>/ also gets the HV and front comparison figures
        workers: Process count; runs share nothing
        provider: Shared provider instance (forces sequential execution)

    Returns:
        BatchResult: Per-run table and the mean (std) summary
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError('run_batch needs at least one seed')
    problems = list(problems or [template.problem])
    algorithms = list(algorithms or [template.algorithm])

    configs = []
    for problem in problems:
        for algorithm in algorithms:
            for seed in seeds:
                target = str(run_directory(out_dir, problem, algorithm, seed)) if out_dir else None
                configs.append(replace(template, problem=problem, algorithm=algorithm, seed=seed, out_dir=target))

    logger.info('Batch start: %s problem(s) x %s algorithm(s) x %s seed(s)', len(problems), len(algorithms), len(seeds))
    runs = pd.DataFrame(_execute(configs, workers, provider))
    summary = summarize_runs(runs, ['problem', 'algorithm'])
    if out_dir:
        write_batch_tables(Path(out_dir), runs, summary)
        if template.plot:
            solved = runs.loc[runs['status'] == 'ok', 'problem'].unique()
            pf_by_problem = {problem: true_pf_samples(problem, template.pf_samples) for problem in solved}
            write_batch_plots(out_dir, runs, pf_by_problem)
    return BatchResult(runs=runs, summary=summary)


def ablation_delta(
    template: RunConfig,
    deltas: Iterable[float] = ABLATION_DELTAS,
    seeds: Iterable[int] = DEFAULT_SEEDS,
    problems: Iterable[str] = ABLATION_PROBLEMS,
    out_dir: str | None = None,
    workers: int = 1,
    provider: Provider | None = None,
) -> BatchResult:
    """
    Sweep the gate threshold with the adaptive algorithm.

    Args:
        template: Shared settings; the algorithm is forced to nsga2-llm
        deltas: Thresholds to compare (non-empty)
        seeds: Seeds per (delta, problem)
        problems: Problems averaged over
        out_dir: Optional output root; tables go to ablation_runs.csv / ablation.csv
        workers: Process count
        provider: Shared provider instance (forces sequential execution)

    Returns:
        BatchResult: Per-run table and one summary row per delta
            (mean tokens per run, mean final IGD, mean invocations)
    """
    deltas = [float(delta) for delta in deltas]
    if not deltas:
        raise ValueError('ablation_delta needs at least one delta')
    seeds = list(seeds)
    problems = list(problems)

    configs = []
    for delta in deltas:
        for problem in problems:
            for seed in seeds:
                target = None
                if out_dir:
                    target = str(Path(out_dir) / f'delta-{delta:g}' / problem / f'seed-{seed}')
                configs.append(replace(
                    template, algorithm='nsga2-llm', delta=delta, problem=problem, seed=seed, out_dir=target,
                ))

    logger.info('Ablation start: deltas=%s problems=%s seeds=%s', deltas, problems, len(seeds))
    runs = pd.DataFrame(_execute(configs, workers, provider))
    summary = summarize_runs(runs, ['delta'])
    if out_dir:
        write_batch_tables(Path(out_dir), runs, summary, prefix='ablation')
    return BatchResult(runs=runs, summary=summary)
