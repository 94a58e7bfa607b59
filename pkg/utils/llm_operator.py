"""
LLM-assisted reproduction.
Mating pool, frequency-ranked elites, four-part prompt, validated parsing with
single-round retries, and offspring injection ahead of SBX + mutation.
"""
import logging
import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from tenacity import RetryError, Retrying, retry_if_exception_type, stop_after_attempt

from models.exchange import Exchange, TokenUsage
from models.individual import Individual, Population
from models.problem import ProblemSpec
from utils import prompt_grammar as grammar
from utils.core import RngStream, evaluate
from utils.errors import BudgetExhausted, ParseFailure, ProviderError
from utils.nsga2 import VariationParams, binary_tournament_select, reproduce
from utils.providers import Provider

logger = logging.getLogger(__name__)

IDENTITY = (
    'You are an expert in multi-objective optimization algorithms. '
    'Your task is to generate improved solutions with better objective values through given solutions.'
)


@dataclass
class ElitePool:
    """Most frequent mating-pool members, best first."""
    members: list[Individual]
    frequency: dict[int, int]


@dataclass
class PromptBundle:
    """The four prompt blocks and their rendering."""
    identity: str
    task: str
    context: str
    expectation: str

    @property
    def rendered(self) -> str:
        return '\n\n'.join((self.identity, self.task, self.context, self.expectation))


@dataclass
class ParsedOffspring:
    """Validated decision vectors recovered from a response."""
    vectors: list[np.ndarray]
    raw: str
    attempts: int = 1
    defects: list[str] = field(default_factory=list)


@dataclass
class LlmVariationResult:
    """
    Outcome of one LLM-assisted reproduction step.

    Schema:
        offspring: Population - the N children Q_t (unevaluated)
        exchanges: list[Exchange] - every provider attempt, in order
        attempts: int - provider attempts made
        failures: int - failed attempts
        injected: int - LLM offspring placed into the mating pool
        fell_back: bool - True if plain variation was used after retries ran out
    """
    offspring: Population
    exchanges: list[Exchange]
    attempts: int = 0
    failures: int = 0
    injected: int = 0
    fell_back: bool = False

    @property
    def usage(self) -> TokenUsage:
        total = TokenUsage()
        for exchange in self.exchanges:
            total = total + exchange.usage
        return total


def build_mating_pool(pop: Population, N: int, rng: RngStream) -> list[Individual]:  # pylint: disable=invalid-name
    """N binary-tournament winners, duplicates allowed."""
    return [binary_tournament_select(pop, rng) for _ in range(N)]


def _quality_key(member: Individual) -> tuple:
    return (member.rank, -member.crowding, member.id)


def select_elites(pool: list[Individual], l: int) -> ElitePool:  # pylint: disable=invalid-name
    """
    Top-l pool members by occurrence count.

    Ties are broken by lower rank, higher crowding, then lower id.

    Args:
        pool: Mating pool (non-empty)
        l: Elite count

    Returns:
        ElitePool: min(l, distinct) members and the frequency table
    """
    if not pool:
        raise ValueError('mating pool is empty')
    frequency = Counter(member.id for member in pool)
    distinct = {}
    for member in pool:
        distinct.setdefault(member.id, member)
    ordered = sorted(distinct.values(), key=lambda member: (-frequency[member.id],) + _quality_key(member))
    return ElitePool(members=ordered[:l], frequency=dict(frequency))


def build_prompt(elites: ElitePool, spec: ProblemSpec, s: int) -> PromptBundle:
    """
    Render the identity / task / context / expectation prompt.

    Args:
        elites: Evaluated elite pool
        spec: Problem definition
        s: Number of new solutions requested

    Returns:
        PromptBundle: The four blocks
    """
    task = (
        f'I have several solutions, all of which are in the form of {spec.d} dimensional decision vectors. '
        f'The problem has {spec.M} objectives and every objective is to be minimized. '
        'The following are the elite solutions in the mating pool, each followed by its objective values.\n'
        f'Lower bounds: {grammar.format_values(spec.lower)}\n'
        f'Upper bounds: {grammar.format_values(spec.upper)}'
    )
    lines = []
    for member in elites.members:
        if member.f is None:
            raise ValueError(f'elite {member.id} is unevaluated')
        lines.append(grammar.solution_line(member.x))
        lines.append(grammar.objective_line(member.f))
    expectation = (
        'You can use these multi-objective optimization algorithms to generate new solutions '
        '(one or more algorithms can be used). '
        f'Simply output {grammar.count_phrase(s)} new solutions with better objective values. '
        f'Each solution must start with {grammar.START} and end with {grammar.END}.'
    )
    return PromptBundle(IDENTITY, task, '\n'.join(lines), expectation)


def parse_response(text: str, spec: ProblemSpec, s: int) -> ParsedOffspring:
    """
    Extract s valid decision vectors from a response.

    Invalid spans are skipped; out-of-bounds components are clipped.

    Args:
        text: Raw provider output
        spec: Problem definition
        s: Number of vectors required

    Returns:
        ParsedOffspring: The first s valid vectors

    Raises:
        ParseFailure: If fewer than s spans are valid; the code names the defect
    """
    spans = grammar.extract_spans(text or '')
    if not spans and s > 0:
        raise ParseFailure('response contains no <start>...<end> spans', code='MISSING_DELIMITERS')

    vectors, defects = [], []
    for span in spans:
        try:
            values = grammar.split_values(span)
        except ValueError:
            defects.append('NON_NUMERIC')
            continue
        if values.size != spec.d:
            defects.append('WRONG_ARITY')
            continue
        if not np.all(np.isfinite(values)):
            defects.append('NON_FINITE')
            continue
        vectors.append(spec.clip(values))

    if len(vectors) < s:
        code = defects[0] if defects else 'TOO_FEW'
        raise ParseFailure(f'{len(vectors)} valid solutions of {s} requested ({code})', code=code)
    return ParsedOffspring(vectors=vectors[:s], raw=text, defects=defects)


def inject_offspring(pool: list[Individual], offspring: list[Individual]) -> list[Individual]:
    """
    Replace recurring pool members with LLM offspring.

    Duplicate slots go first (most frequent id first, earliest slot first); if
    there are not enough, the worst remaining slots (highest rank, lowest
    crowding) are overwritten. The pool size never changes.

    Args:
        pool: Mating pool
        offspring: Evaluated individuals to inject, len <= len(pool)

    Returns:
        list: New pool
    """
    if len(offspring) > len(pool):
        raise ValueError(f'cannot inject {len(offspring)} offspring into a pool of {len(pool)}')
    frequency = Counter(member.id for member in pool)
    seen = set()
    duplicate_slots = []
    for slot, member in enumerate(pool):
        if member.id in seen:
            duplicate_slots.append(slot)
        seen.add(member.id)
    duplicate_slots.sort(key=lambda slot: (-frequency[pool[slot].id],) + _quality_key(pool[slot]) + (slot,))

    targets = duplicate_slots[:len(offspring)]
    if len(targets) < len(offspring):
        taken = set(targets)
        remaining = [slot for slot in range(len(pool)) if slot not in taken]
        remaining.sort(key=lambda slot: (-pool[slot].rank, pool[slot].crowding, -pool[slot].id, -slot))
        targets.extend(remaining[:len(offspring) - len(targets)])

    updated = list(pool)
    for slot, child in zip(targets, offspring):
        updated[slot] = child
    return updated


def llm_variation(
    pop: Population,
    spec: ProblemSpec,
    params: VariationParams,
    provider: Provider,
    l: int,  # pylint: disable=invalid-name
    s: int,
    rng: RngStream,
    retries: int = 3,
    **options,
) -> LlmVariationResult:
    """
    LLM-assisted reproduction for one generation.

    pool -> elites -> prompt -> provider -> parse; a failed attempt is retried
    with a fresh single-round session up to `retries` times, after which plain
    SBX + mutation runs on the unmodified pool.

    Args:
        pop: Ranked and crowded parent population
        spec: Problem definition
        params: Variation settings
        provider: LLM provider
        l: Elite count in the prompt
        s: LLM offspring requested
        rng: Random stream
        retries: Extra attempts after the first failure
        **options: generation (int), charge_evaluations (bool),
            budget_remaining (int | None)

    Returns:
        LlmVariationResult: Offspring Q_t and the exchange log

    Raises:
        BudgetExhausted: If evaluating the LLM offspring would exceed the budget
    """
    generation = options.get('generation', pop.generation)
    charge = options.get('charge_evaluations', True)
    budget_remaining = options.get('budget_remaining')

    pool = build_mating_pool(pop, len(pop), rng)
    elites = select_elites(pool, l)
    prompt = build_prompt(elites, spec, s).rendered
    exchanges: list[Exchange] = []

    def attempt_once(attempt_number: int) -> ParsedOffspring:
        started = time.perf_counter()
        try:
            text, usage = provider.complete(prompt)
        except ProviderError as e:
            exchanges.append(Exchange(
                prompt=prompt, response='', usage=TokenUsage(),
                latency_ms=(time.perf_counter() - started) * 1000.0,
                attempt=attempt_number, generation=generation,
                ok=False, error=f'{e.code}: {e}',
            ))
            raise
        latency = (time.perf_counter() - started) * 1000.0
        try:
            parsed = parse_response(text, spec, s)
        except ParseFailure as e:
            exchanges.append(Exchange(
                prompt=prompt, response=text, usage=usage, latency_ms=latency,
                attempt=attempt_number, generation=generation,
                ok=False, error=f'{e.code}: {e}',
            ))
            raise
        exchanges.append(Exchange(
            prompt=prompt, response=text, usage=usage, latency_ms=latency,
            attempt=attempt_number, generation=generation, ok=True,
        ))
        parsed.attempts = attempt_number
        return parsed

    parsed = None
    try:
        for attempt in Retrying(
            stop=stop_after_attempt(retries + 1),
            retry=retry_if_exception_type((ParseFailure, ProviderError)),
            reraise=True,
        ):
            with attempt:
                parsed = attempt_once(attempt.retry_state.attempt_number)
    except (ParseFailure, ProviderError, RetryError) as e:
        logger.warning(
            'Generation %s: LLM failed after %s attempt(s) (%s); using plain variation',
            generation, len(exchanges), e,
        )

    failures = sum(1 for exchange in exchanges if not exchange.ok)
    if parsed is None:
        offspring = reproduce(pool, pop, spec, params, rng)
        return LlmVariationResult(
            offspring=offspring, exchanges=exchanges,
            attempts=len(exchanges), failures=failures, fell_back=True,
        )

    if charge and budget_remaining is not None and len(parsed.vectors) > budget_remaining:
        raise BudgetExhausted(
            f'{len(parsed.vectors)} LLM offspring exceed the remaining budget of {budget_remaining}'
        )
    llm_children = pop.derive([pop.spawn(vector) for vector in parsed.vectors])
    evaluate(spec, llm_children, charge=charge)
    pool = inject_offspring(pool, llm_children.members)

    offspring = reproduce(pool, pop, spec, params, rng)
    offspring.evaluations_used = llm_children.evaluations_used
    logger.info('Generation %s: injected %s LLM offspring', generation, len(parsed.vectors))
    return LlmVariationResult(
        offspring=offspring, exchanges=exchanges, attempts=len(exchanges),
        failures=failures, injected=len(parsed.vectors),
    )
