"""
Tests for LLM-assisted reproduction: pool, elites, prompt, parsing, injection
and the retry/fallback pipeline.
"""
import numpy as np
import pytest

from models.problem import ProblemSpec
from tests.common import ChaosProvider, ScriptedProvider, population_from_objectives
from utils import prompt_grammar as grammar
from utils.core import RngStream, evaluate, initialize_population
from utils.errors import BudgetExhausted, ParseFailure, ProviderError
from utils.llm_operator import (
    ElitePool,
    build_mating_pool,
    build_prompt,
    inject_offspring,
    llm_variation,
    parse_response,
    select_elites,
)
from utils.nsga2 import VariationParams, rank_and_crowd, reproduce


def _unit_box(d: int) -> ProblemSpec:
    return ProblemSpec(
        f'BOX{d}', d, 2, np.zeros(d), np.ones(d),
        lambda x: np.array([x[0], 1.0 - x[0]]), lambda n: None,
    )


def _ranked_population(spec, size, seed):
    pop = evaluate(spec, initialize_population(spec, size, RngStream(seed)))
    rank_and_crowd(pop)
    return pop


def _valid_response(d, count, value=0.5):
    return '\n'.join(grammar.frame(np.full(d, value)) for _ in range(count))


# ── mating pool and elites ──

@pytest.mark.unit
class TestMatingPoolAndElites:
    """Test tournament pool construction and elite ranking."""

    def test_single_member_population(self, rng):
        """Test a population of one fills the pool with copies of it."""
        pop = population_from_objectives([[1.0, 1.0]])
        pool = build_mating_pool(pop, 6, rng)
        assert len(pool) == 6
        assert all(member is pop[0] for member in pool)

    def test_most_frequent_is_elite(self):
        """Test [a, a, b] with l = 1 gives [a]."""
        pop = population_from_objectives([[0.0, 1.0], [1.0, 0.0]])
        a, b = pop[0], pop[1]
        elites = select_elites([b, a, a], 1)
        assert elites.members == [a]
        assert elites.frequency == {a.id: 2, b.id: 1}

    def test_distinct_pool_uses_quality_tiebreak(self):
        """Test all-ones frequency falls back to rank, crowding, id."""
        pop = population_from_objectives([
            [0.0, 1.0], [0.5, 0.5], [1.0, 0.0], [2.0, 2.0], [3.0, 3.0], [4.0, 4.0],
        ])
        elites = select_elites(list(reversed(pop.members)), 5)
        # front 1: two boundary members (inf, ordered by id), then the middle one
        assert [member.id for member in elites.members] == [
            pop[0].id, pop[2].id, pop[1].id, pop[3].id, pop[4].id,
        ]

    def test_elite_count_capped_by_distinct_members(self):
        """Test fewer distinct members than l returns them all."""
        pop = population_from_objectives([[0.0, 1.0], [1.0, 0.0]])
        elites = select_elites([pop[0], pop[1], pop[0]], 5)
        assert len(elites.members) == 2

    def test_empty_pool_rejected(self):
        """Test selecting from an empty pool is a contract violation."""
        with pytest.raises(ValueError):
            select_elites([], 3)


# ── build_prompt ──

@pytest.mark.unit
class TestBuildPrompt:
    """Test the four-part prompt."""

    def _elites(self, vectors, objectives):
        pop = population_from_objectives(objectives)
        for member, x in zip(pop, vectors):
            member.x = np.asarray(x, dtype=float)
        return ElitePool(members=list(pop.members), frequency={member.id: 1 for member in pop})

    def test_solution_line_rendering(self):
        """Test an elite vector appears framed at three decimals."""
        elites = self._elites(
            [[0.322, 0.947, 0.378, 0.583], [0.1, 0.2, 0.3, 0.4]],
            [[1.0, 2.0], [2.0, 1.0]],
        )
        bundle = build_prompt(elites, _unit_box(4), 3)
        assert '<start>0.322,0.947,0.378,0.583<end>' in bundle.context
        assert 'obj_value: 1.000,2.000' in bundle.context

    def test_blocks_in_order(self):
        """Test identity, task, context and expectation are rendered in order."""
        elites = self._elites([[0.1, 0.2], [0.3, 0.4]], [[1.0, 2.0], [2.0, 1.0]])
        bundle = build_prompt(elites, _unit_box(2), 3)
        rendered = bundle.rendered
        positions = [rendered.index(block) for block in (bundle.identity, bundle.task, bundle.context, bundle.expectation)]
        assert positions == sorted(positions)
        assert 'expert in multi-objective optimization' in bundle.identity

    def test_task_states_dimension_and_minimization(self):
        """Test the task block names d and minimization."""
        elites = self._elites([[0.1] * 7, [0.2] * 7], [[1.0, 2.0], [2.0, 1.0]])
        bundle = build_prompt(elites, _unit_box(7), 3)
        assert '7 dimensional' in bundle.task
        assert 'minimized' in bundle.task
        assert 'Lower bounds: ' in bundle.task

    @pytest.mark.parametrize('s,phrase', [(3, 'three new solutions'), (5, 'five new solutions'), (11, '11 new solutions')])
    def test_expectation_parameterized_by_s(self, s, phrase):
        """Test the requested count follows s."""
        elites = self._elites([[0.1, 0.2], [0.3, 0.4]], [[1.0, 2.0], [2.0, 1.0]])
        bundle = build_prompt(elites, _unit_box(2), s)
        assert phrase in bundle.expectation
        assert '<start>' in bundle.expectation and '<end>' in bundle.expectation

    def test_unevaluated_elite_rejected(self):
        """Test elites must carry objectives."""
        pop = population_from_objectives([[1.0, 2.0]])
        pop[0].f = None
        with pytest.raises(ValueError):
            build_prompt(ElitePool(members=list(pop.members), frequency={}), _unit_box(2), 3)

    def test_round_trip_over_random_elite_sets(self):
        """Test parsing the context recovers every elite to three decimals."""
        rng = RngStream(2024)
        for _ in range(1000):
            d = int(rng.integers(4)) + 2
            count = int(rng.integers(5)) + 1
            vectors = rng.random((count, d))
            elites = self._elites(vectors, rng.random((count, 2)))
            bundle = build_prompt(elites, _unit_box(d), count)
            parsed = parse_response(bundle.context, _unit_box(d), count)
            for recovered, original in zip(parsed.vectors, vectors):
                assert np.all(np.abs(recovered - original) <= 5e-4 + 1e-12)


# ── parse_response ──

@pytest.mark.unit
class TestParseResponse:
    """Test response validation."""

    def test_exact_format(self):
        """Test two well-formed spans parse to two vectors."""
        parsed = parse_response('<start>0.1,0.2<end><start>0.3,0.4<end>', _unit_box(2), 2)
        assert [vector.tolist() for vector in parsed.vectors] == [[0.1, 0.2], [0.3, 0.4]]

    def test_non_numeric(self):
        """Test a word inside a span is named as the defect."""
        with pytest.raises(ParseFailure) as excinfo:
            parse_response('<start>0.1,abc<end>', _unit_box(2), 1)
        assert excinfo.value.defect == 'NON_NUMERIC'

    def test_clipping(self):
        """Test out-of-bounds components are clipped to the box."""
        parsed = parse_response('<start>1.5,-0.2<end>', _unit_box(2), 1)
        assert parsed.vectors[0].tolist() == [1.0, 0.0]

    def test_missing_delimiters(self):
        """Test plain prose is a missing-delimiter failure."""
        with pytest.raises(ParseFailure) as excinfo:
            parse_response('0.1,0.2 and 0.3,0.4', _unit_box(2), 1)
        assert excinfo.value.defect == 'MISSING_DELIMITERS'

    def test_wrong_arity(self):
        """Test a span with the wrong component count is rejected."""
        with pytest.raises(ParseFailure) as excinfo:
            parse_response('<start>0.1,0.2,0.3<end>', _unit_box(2), 1)
        assert excinfo.value.defect == 'WRONG_ARITY'

    def test_non_finite(self):
        """Test nan and inf components are rejected."""
        with pytest.raises(ParseFailure) as excinfo:
            parse_response('<start>nan,0.2<end>', _unit_box(2), 1)
        assert excinfo.value.defect == 'NON_FINITE'

    def test_bad_spans_skipped_when_enough_remain(self):
        """Test invalid spans are dropped and the first s valid ones kept."""
        text = '<start>x<end><start>0.1,0.2<end><start>0.3,0.4<end><start>0.5,0.6<end>'
        parsed = parse_response(text, _unit_box(2), 2)
        assert [vector.tolist() for vector in parsed.vectors] == [[0.1, 0.2], [0.3, 0.4]]
        assert parsed.defects == ['NON_NUMERIC']

    def test_too_few_valid(self):
        """Test fewer valid spans than requested fails."""
        with pytest.raises(ParseFailure) as excinfo:
            parse_response('<start>0.1,0.2<end>', _unit_box(2), 3)
        assert excinfo.value.defect == 'TOO_FEW'

    def test_empty_response(self):
        """Test an empty response fails cleanly."""
        with pytest.raises(ParseFailure):
            parse_response('', _unit_box(2), 1)


# ── inject_offspring ──

@pytest.mark.unit
class TestInjectOffspring:
    """Test the replacement rule."""

    def test_duplicate_slot_replaced_first(self):
        """Test [a, a, b, c] with one offspring becomes [a, o, b, c]."""
        pop = population_from_objectives([[0.0, 1.0], [0.5, 0.5], [1.0, 0.0], [0.2, 0.2]])
        a, b, c, o = pop.members
        assert inject_offspring([a, a, b, c], [o]) == [a, o, b, c]

    def test_no_offspring_leaves_pool(self):
        """Test an empty injection is a no-op."""
        pop = population_from_objectives([[0.0, 1.0], [1.0, 0.0]])
        pool = list(pop.members)
        assert inject_offspring(pool, []) == pool

    def test_distinct_pool_replaces_worst(self):
        """Test without duplicates the two worst-ranked slots are overwritten."""
        pop = population_from_objectives([[0.0, 1.0], [1.0, 0.0], [2.0, 2.0], [3.0, 3.0], [0.1, 0.1], [0.2, 0.2]])
        pool = pop.members[:4]
        o1, o2 = pop[4], pop[5]
        updated = inject_offspring(pool, [o1, o2])
        assert updated[:2] == pool[:2]
        assert {updated[2].id, updated[3].id} == {o1.id, o2.id}

    def test_pool_size_preserved(self, rng):
        """Test cardinality never changes."""
        pop = population_from_objectives(RngStream(5).random((12, 2)))
        pool = build_mating_pool(pop, 12, rng)
        extra = population_from_objectives([[0.0, 0.0]] * 4)
        assert len(inject_offspring(pool, list(extra.members))) == 12

    def test_oversized_injection_rejected(self):
        """Test more offspring than slots is a contract violation."""
        pop = population_from_objectives([[0.0, 1.0], [1.0, 0.0], [0.5, 0.5]])
        with pytest.raises(ValueError):
            inject_offspring(pop.members[:2], pop.members)


# ── llm_variation ──

@pytest.mark.unit
class TestLlmVariation:
    """Test the provider pipeline with retries and fallback."""

    def test_mock_provider_liveness(self, zdt1, mock_provider):
        """Test the mock pipeline returns N children with injected offspring."""
        pop = _ranked_population(zdt1, 20, 1)
        result = llm_variation(pop, zdt1, VariationParams(), mock_provider, 5, 3, RngStream(2))
        assert len(result.offspring) == 20
        assert result.injected == 3
        assert result.attempts == 1
        assert result.fell_back is False
        assert result.offspring.evaluations_used == pop.evaluations_used + 3

    def test_garbage_four_times_falls_back(self, zdt1):
        """Test four garbage answers exhaust retries and fall back."""
        provider = ScriptedProvider('I cannot help with that.')
        pop = _ranked_population(zdt1, 20, 1)
        result = llm_variation(pop, zdt1, VariationParams(), provider, 5, 3, RngStream(2), retries=3)
        assert result.fell_back is True
        assert result.failures == 4
        assert result.attempts == 4
        assert result.injected == 0
        assert len(result.offspring) == 20
        assert len(provider.prompts) == 4

    def test_fallback_matches_plain_variation(self, zdt1):
        """Test fallback is SBX + mutation over the same, unmodified pool."""
        fallen = _ranked_population(zdt1, 20, 1)
        plain = _ranked_population(zdt1, 20, 1)
        result = llm_variation(fallen, zdt1, VariationParams(), ScriptedProvider('nope'), 5, 3, RngStream(9))
        rng = RngStream(9)
        pool = build_mating_pool(plain, 20, rng)
        expected = reproduce(pool, plain, zdt1, VariationParams(), rng)
        assert np.array_equal(result.offspring.decisions(), expected.decisions())

    def test_retry_then_success(self, zdt1):
        """Test a transport error and a bad answer are retried before success."""
        provider = ScriptedProvider(ProviderError('timed out'), 'garbage', _valid_response(30, 3))
        pop = _ranked_population(zdt1, 20, 1)
        result = llm_variation(pop, zdt1, VariationParams(), provider, 5, 3, RngStream(2))
        assert result.fell_back is False
        assert result.attempts == 3
        assert result.failures == 2
        assert [exchange.ok for exchange in result.exchanges] == [False, False, True]
        assert result.exchanges[0].error.startswith('PROVIDER_ERROR')

    def test_usage_summed_over_attempts(self, zdt1):
        """Test generation usage equals provider-reported usage across attempts."""
        provider = ScriptedProvider('garbage', 'garbage', _valid_response(30, 3))
        pop = _ranked_population(zdt1, 20, 1)
        result = llm_variation(pop, zdt1, VariationParams(), provider, 5, 3, RngStream(2))
        assert result.usage.prompt_tokens == 300
        assert result.usage.completion_tokens == 60
        assert result.usage.total == 360

    def test_every_attempt_is_single_round(self, zdt1):
        """Test each retry sends the same standalone prompt with no history."""
        provider = ScriptedProvider('garbage')
        pop = _ranked_population(zdt1, 20, 1)
        llm_variation(pop, zdt1, VariationParams(), provider, 5, 3, RngStream(2), retries=2)
        assert len(provider.prompts) == 3
        assert len(set(provider.prompts)) == 1
        assert 'garbage' not in provider.prompts[0]

    def test_uncharged_offspring(self, zdt1):
        """Test free LLM evaluations leave the budget untouched."""
        pop = _ranked_population(zdt1, 20, 1)
        result = llm_variation(
            pop, zdt1, VariationParams(), ScriptedProvider(_valid_response(30, 3)), 5, 3, RngStream(2),
            charge_evaluations=False,
        )
        assert result.injected == 3
        assert result.offspring.evaluations_used == pop.evaluations_used

    def test_budget_exhausted(self, zdt1):
        """Test LLM offspring that do not fit the budget end the generation."""
        pop = _ranked_population(zdt1, 20, 1)
        with pytest.raises(BudgetExhausted):
            llm_variation(
                pop, zdt1, VariationParams(), ScriptedProvider(_valid_response(30, 3)), 5, 3, RngStream(2),
                budget_remaining=2,
            )

    def test_exchanges_tagged_with_generation(self, zdt1, mock_provider):
        """Test exchange records carry the generation number."""
        pop = _ranked_population(zdt1, 20, 1)
        result = llm_variation(pop, zdt1, VariationParams(), mock_provider, 5, 3, RngStream(2), generation=7)
        assert [exchange.generation for exchange in result.exchanges] == [7]

    @pytest.mark.parametrize('seed', range(10))
    def test_chaos_provider_never_crashes(self, zdt1, seed):
        """Test timeouts and garbled or partial answers always yield N children."""
        provider = ChaosProvider(seed)
        pop = _ranked_population(zdt1, 20, seed + 1)
        for _ in range(5):
            result = llm_variation(pop, zdt1, VariationParams(), provider, 5, 3, RngStream(seed))
            assert len(result.offspring) == 20
            assert all(zdt1.contains(child.x) for child in result.offspring)
            assert result.attempts == len(result.exchanges) >= 1
