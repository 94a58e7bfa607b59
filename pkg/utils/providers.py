"""
LLM providers.
One completion interface over a chat-completions HTTP client and a
deterministic offline mock, with token accounting for both.
"""
import logging
import math
import os
from collections.abc import Iterable
from typing import Protocol

import numpy as np
import openai
from openai import OpenAI

from models.exchange import Exchange, ProviderConfig, TokenUsage, UsageReport
from utils.errors import ConfigurationError, ProviderError
from utils import prompt_grammar as grammar

logger = logging.getLogger(__name__)

MOCK_WEIGHTS = (0.25, 0.5, 0.75)
CHARS_PER_TOKEN = 4
MALFORMED_RESPONSE = f'{grammar.START}not,a,solution{grammar.END} I could not read the prompt.'


class Provider(Protocol):
    """Anything that turns a prompt into (response text, usage)."""

    def complete(self, prompt: str) -> tuple[str, TokenUsage]:
        ...


def estimate_tokens(text: str) -> int:
    """Rough token count at four characters per token."""
    return math.ceil(len(text) / CHARS_PER_TOKEN)


def mock_complete(prompt: str, s: int, fault_injection: bool = False) -> str:
    """
    Offline surrogate for an LLM.

    Parses the elite solutions and their objective lines from the prompt, ranks
    them by objective sum, and emits s children extrapolated from the worst
    elite through the best one: child_j = clip(best + w_j * (best - worst)).

    Args:
        prompt: Prompt text in the shared grammar
        s: Number of children to emit
        fault_injection: Emit malformed text instead of raising on bad prompts

    Returns:
        str: s delimiter-framed solution lines

    Raises:
        ProviderError: If the prompt is unparseable and fault injection is off
    """
    try:
        solutions = [grammar.split_values(text) for text in grammar.SOLUTION_LINE_PATTERN.findall(prompt)]
        objectives = [grammar.split_values(text) for text in grammar.OBJECTIVE_LINE_PATTERN.findall(prompt)]
        if len(solutions) < 2 or len(objectives) != len(solutions):
            raise ValueError(
                f'expected >= 2 solutions with objective lines, got {len(solutions)}/{len(objectives)}'
            )
        if len({solution.size for solution in solutions}) != 1:
            raise ValueError('solutions differ in length')
    except ValueError as e:
        if fault_injection:
            return MALFORMED_RESPONSE
        raise ProviderError(f'mock provider cannot parse prompt: {e}') from e

    sums = [float(np.sum(values)) for values in objectives]
    order = sorted(range(len(solutions)), key=lambda index: (sums[index], index))
    best = solutions[order[0]]
    worst = solutions[order[-1]]

    lower = _bounds_line(grammar.LOWER_BOUNDS_PATTERN, prompt, best.size)
    upper = _bounds_line(grammar.UPPER_BOUNDS_PATTERN, prompt, best.size)
    lines = []
    for j in range(s):
        child = best + MOCK_WEIGHTS[j % len(MOCK_WEIGHTS)] * (best - worst)
        if lower is not None:
            child = np.maximum(child, lower)
        if upper is not None:
            child = np.minimum(child, upper)
        lines.append(grammar.frame(child, decimals=6))
    return '\n'.join(lines)


def _bounds_line(pattern, prompt: str, size: int) -> np.ndarray | None:
    match = pattern.search(prompt)
    if not match:
        return None
    try:
        values = grammar.split_values(match.group(1))
    except ValueError:
        return None
    return values if values.size == size else None


class MockProvider:
    """Deterministic offline provider; a pure function of (prompt, fault flag)."""

    def __init__(self, config: ProviderConfig | None = None):
        self.config = (config or ProviderConfig(kind='mock')).validate()

    def complete(self, prompt: str) -> tuple[str, TokenUsage]:
        match = grammar.COUNT_PATTERN.search(prompt)
        try:
            s = grammar.parse_count_phrase(match.group(1)) if match else len(MOCK_WEIGHTS)
        except ValueError:
            s = len(MOCK_WEIGHTS)
        response = mock_complete(prompt, s, fault_injection=self.config.fault_injection)
        return response, TokenUsage(estimate_tokens(prompt), estimate_tokens(response))


class HttpChatProvider:
    """
    Chat-completions client.

    Every call is a fresh single-turn session: one user message, no history.
    """

    def __init__(self, config: ProviderConfig, client=None):
        self.config = config.validate()
        if config.kind != 'http-chat':
            raise ConfigurationError(f"HttpChatProvider needs kind 'http-chat', got '{config.kind}'")
        api_key = os.environ.get(config.api_key_env, '')
        if not api_key:
            raise ConfigurationError(
                f'Environment variable {config.api_key_env} is not set; it must hold the API key'
            )
        self._client = client or OpenAI(
            api_key=api_key,
            base_url=config.endpoint,
            timeout=config.timeout,
            max_retries=0,
        )

    def build_request(self, prompt: str) -> dict:
        """Chat request body for a single user turn."""
        return {
            'model': self.config.model,
            'messages': [{'role': 'user', 'content': prompt}],
            'temperature': self.config.temperature,
        }

    def complete(self, prompt: str) -> tuple[str, TokenUsage]:
        """
        Send one prompt.

        Raises:
            ProviderError: On timeout, error status, or missing usage counts
        """
        try:
            response = self._client.chat.completions.create(**self.build_request(prompt))
        except openai.APITimeoutError as e:
            raise ProviderError(f'request timed out after {self.config.timeout}s') from e
        except openai.APIStatusError as e:
            raise ProviderError(f'provider returned status {e.status_code}') from e
        except openai.OpenAIError as e:
            raise ProviderError(f'provider request failed: {e}') from e

        usage = getattr(response, 'usage', None)
        prompt_tokens = getattr(usage, 'prompt_tokens', None)
        completion_tokens = getattr(usage, 'completion_tokens', None)
        if prompt_tokens is None or completion_tokens is None:
            raise ProviderError('provider response is missing usage counts')
        if not response.choices:
            raise ProviderError('provider response has no choices')
        text = response.choices[0].message.content or ''
        return text, TokenUsage(int(prompt_tokens), int(completion_tokens))


def make_provider(config: ProviderConfig, client=None) -> Provider:
    """
    Build the provider for a configuration.

    Args:
        config: Provider configuration
        client: Optional pre-built OpenAI-compatible client (http-chat only)

    Returns:
        Provider: Ready-to-use provider

    Raises:
        ConfigurationError: If the configuration is invalid or the key is missing
    """
    config.validate()
    if config.kind == 'mock':
        return MockProvider(config)
    return HttpChatProvider(config, client=client)


def complete(config: ProviderConfig, prompt: str) -> tuple[str, TokenUsage]:
    """One-shot completion through a freshly built provider."""
    return make_provider(config).complete(prompt)


def usage_report(exchanges: Iterable[Exchange]) -> UsageReport:
    """
    Sum usage across exchanges.

    Args:
        exchanges: Exchange records of one run

    Returns:
        UsageReport: Token totals, call count and failure count
    """
    report = UsageReport()
    for exchange in exchanges:
        report.prompt_tokens += exchange.usage.prompt_tokens
        report.completion_tokens += exchange.usage.completion_tokens
        report.calls += 1
        if not exchange.ok:
            report.failures += 1
    return report
