"""
Tests for the adaptive LLM gate.
"""
import math

import pytest

from tests.common import population_from_objectives
from utils.gate import GateState, auxiliary_score, should_invoke_llm
from utils.nsga2 import FrontPartition, rank_and_crowd


@pytest.mark.unit
class TestAuxiliaryScore:
    """Test the default population score."""

    def test_all_boundary_gives_sentinel(self):
        """Test two rank-1 members with inf crowding score -inf."""
        pop = population_from_objectives([[0.0, 1.0], [1.0, 0.0]])
        partition = rank_and_crowd(pop)
        assert auxiliary_score(pop, partition) == -math.inf

    def test_hand_computed_score(self):
        """Test finite crowdings {1, 3} plus two inf, all rank 1, give -1.0."""
        pop = population_from_objectives([[0.0, 3.0], [1.0, 2.0], [2.0, 1.0], [3.0, 0.0]], ranked=False)
        for member, crowding in zip(pop, [math.inf, 1.0, 3.0, math.inf]):
            member.rank = 1
            member.crowding = crowding
        partition = FrontPartition(fronts=[[0, 1, 2, 3]])
        assert auxiliary_score(pop, partition) == pytest.approx(-1.0)

    def test_rank_term_uses_every_member(self):
        """Test the mean front index counts dominated members too."""
        pop = population_from_objectives([[0.0, 1.0], [0.5, 0.5], [1.0, 0.0], [2.0, 2.0]])
        partition = rank_and_crowd(pop)
        # finite crowding: only the middle point, 2.0; ranks 1,1,1,2
        assert auxiliary_score(pop, partition) == pytest.approx(-2.0 + 1.25)


@pytest.mark.unit
class TestShouldInvokeLlm:
    """Test the threshold decision and its bookkeeping."""

    def test_below_threshold(self):
        """Test 0.05 over a 0.0 baseline stays under delta 0.1."""
        state = GateState(delta=0.1)
        assert should_invoke_llm(state, 0.05) is False

    def test_threshold_is_inclusive(self):
        """Test a gain of exactly delta invokes."""
        state = GateState(delta=0.1)
        assert should_invoke_llm(state, 0.10) is True

    def test_sentinel_previous_score(self):
        """Test a -inf previous score never invokes."""
        state = GateState(delta=0.1, prev_score=-math.inf)
        assert should_invoke_llm(state, 100.0) is False

    def test_sentinel_current_score(self):
        """Test a -inf current score never invokes."""
        state = GateState(delta=0.1)
        assert should_invoke_llm(state, -math.inf) is False

    def test_records_and_rolls_forward(self):
        """Test history grows by one and prev_score follows the score."""
        state = GateState(delta=0.5)
        should_invoke_llm(state, 1.0, generation=1)
        should_invoke_llm(state, 1.2, generation=2)
        should_invoke_llm(state, -math.inf, generation=3)
        should_invoke_llm(state, 2.0, generation=4)
        assert [record.generation for record in state.history] == [1, 2, 3, 4]
        assert [record.invoked for record in state.history] == [True, False, False, False]
        assert state.prev_score == 2.0
        assert state.invocations == 1

    def test_default_generation_numbering(self):
        """Test records are numbered from 1 when no generation is given."""
        state = GateState(delta=0.1)
        should_invoke_llm(state, 0.0)
        should_invoke_llm(state, 0.0)
        assert [record.generation for record in state.history] == [1, 2]

    def test_infinite_delta_never_invokes(self):
        """Test delta = inf disables the LLM."""
        state = GateState(delta=math.inf)
        assert not any(should_invoke_llm(state, score) for score in [1.0, 10.0, 1e300])

    def test_would_invoke_does_not_record(self):
        """Test the dry-run check leaves state untouched."""
        state = GateState(delta=0.1)
        assert state.would_invoke(0.2) is True
        assert state.history == []
        assert state.prev_score == 0.0

    @pytest.mark.parametrize('delta', [0.0, -0.1, math.nan])
    def test_invalid_delta(self, delta):
        """Test delta must be positive."""
        with pytest.raises(ValueError):
            GateState(delta=delta)

    def test_pluggable_auxiliary(self):
        """Test a custom auxiliary function replaces the default."""
        state = GateState(delta=0.1, auxiliary=lambda pop, partition: 42.0)
        pop = population_from_objectives([[0.0, 1.0], [1.0, 0.0]])
        assert state.score(pop, rank_and_crowd(pop)) == 42.0
