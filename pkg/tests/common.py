"""
Test helpers: response assertions, a brute-force dominance oracle, and
scripted / chaotic LLM stand-ins.
"""
from types import SimpleNamespace

import numpy as np

from models.exchange import TokenUsage
from models.individual import Population
from utils.core import RngStream
from utils.errors import ProviderError
from utils.nsga2 import rank_and_crowd
from utils.providers import MockProvider, estimate_tokens


def assert_success_response(response, status_code: int = 200):
    """
    Assert that an API response is a success envelope.

    Args:
        response: Flask test client response object
        status_code: Expected HTTP status

    Returns:
        dict: The JSON response data
    """
    assert response.status_code == status_code
    json_data = response.get_json()
    assert json_data['success'] is True
    return json_data


def brute_force_fronts(objectives: np.ndarray) -> list[set[int]]:
    """O(N^2 M) front peeling: repeatedly remove every member nobody remaining dominates."""
    rows = [tuple(float(value) for value in row) for row in objectives]
    dominators = {
        i: {
            j for j, other in enumerate(rows)
            if all(a <= b for a, b in zip(other, row)) and any(a < b for a, b in zip(other, row))
        }
        for i, row in enumerate(rows)
    }
    remaining = set(range(len(rows)))
    fronts = []
    while remaining:
        front = {i for i in remaining if not dominators[i] & remaining}
        fronts.append(front)
        remaining -= front
    return fronts


def population_from_objectives(objectives, ranked: bool = True) -> Population:
    """Population whose members carry the given objective vectors (decisions are dummies)."""
    objectives = np.asarray(objectives, dtype=float)
    pop = Population(members=[])
    for values in objectives:
        member = pop.spawn(np.zeros(2))
        member.f = values.copy()
        pop.members.append(member)
    if ranked:
        rank_and_crowd(pop)
    return pop


class ScriptedProvider:
    """Returns canned responses in order (the last one repeats); records every prompt."""

    def __init__(self, *responses):
        self.responses = list(responses)
        self.prompts = []

    def complete(self, prompt: str) -> tuple[str, TokenUsage]:
        self.prompts.append(prompt)
        response = self.responses[min(len(self.prompts), len(self.responses)) - 1]
        if isinstance(response, Exception):
            raise response
        return response, TokenUsage(100, 20)


class ChaosProvider:
    """
    Randomly times out, garbles, truncates or answers properly.

    Seeded, so a chaotic run is still reproducible.
    """

    BEHAVIOURS = ('timeout', 'garbled', 'partial', 'valid')

    def __init__(self, seed: int = 0):
        self._rng = RngStream(seed)
        self._mock = MockProvider()
        self.calls = 0

    def complete(self, prompt: str) -> tuple[str, TokenUsage]:
        self.calls += 1
        behaviour = self.BEHAVIOURS[int(self._rng.integers(len(self.BEHAVIOURS)))]
        if behaviour == 'timeout':
            raise ProviderError('request timed out after 60s')
        if behaviour == 'garbled':
            text = 'Sure! <start>0.1,,zz<end> <start>nan<end> and some <start>prose'
            return text, TokenUsage(estimate_tokens(prompt), estimate_tokens(text))
        text, usage = self._mock.complete(prompt)
        if behaviour == 'partial':
            text = text.splitlines()[0]
        return text, usage


class FakeCompletions:
    """Stands in for client.chat.completions; outcomes are consumed in order, the last repeats."""

    def __init__(self, outcomes):
        self.outcomes = list(outcomes)
        self.requests = []

    def create(self, **kwargs):
        self.requests.append(kwargs)
        outcome = self.outcomes[min(len(self.requests), len(self.outcomes)) - 1]
        if isinstance(outcome, Exception):
            raise outcome
        return outcome


class FakeOpenAIClient:
    """Minimal OpenAI-compatible client exposing chat.completions.create."""

    def __init__(self, *outcomes):
        self.completions = FakeCompletions(outcomes)
        self.chat = SimpleNamespace(completions=self.completions)


def chat_response(text: str, prompt_tokens: int | None = 120, completion_tokens: int | None = 30):
    """Object shaped like a chat-completions response."""
    usage = None
    if prompt_tokens is not None or completion_tokens is not None:
        usage = SimpleNamespace(prompt_tokens=prompt_tokens, completion_tokens=completion_tokens)
    return SimpleNamespace(
        choices=[SimpleNamespace(message=SimpleNamespace(role='assistant', content=text))],
        usage=usage,
    )
