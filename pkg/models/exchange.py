"""
Provider exchange models.
Provider configuration, token usage and the append-only exchange log records.
"""
import math
from dataclasses import dataclass

from utils.errors import ConfigurationError

PROVIDER_KINDS = ('http-chat', 'mock')


@dataclass(frozen=True)
class ProviderConfig:
    """
    LLM backend configuration.

    Schema:
        kind: str - "http-chat" or "mock"
        endpoint: str | None - chat-completions base URL (http-chat only)
        model: str | None - model identifier (http-chat only)
        api_key_env: str - name of the environment variable holding the key
        timeout: float - seconds before an attempt counts as failed
        temperature: float - sampling temperature
        fault_injection: bool - mock only, emit malformed text on unparseable prompts
    """
    kind: str = 'mock'
    endpoint: str | None = None
    model: str | None = None
    api_key_env: str = 'LLM_API_KEY'
    timeout: float = 60.0
    temperature: float = 1.0
    fault_injection: bool = False

    def validate(self) -> 'ProviderConfig':
        """
        Check the configuration without touching the network.

        Raises:
            ConfigurationError: If a field is invalid or missing for the kind
        """
        if self.kind not in PROVIDER_KINDS:
            raise ConfigurationError(
                f"Invalid provider kind '{self.kind}'. Must be one of: {', '.join(PROVIDER_KINDS)}"
            )
        if self.kind == 'http-chat' and not (self.endpoint and self.model):
            raise ConfigurationError('http-chat provider requires both endpoint and model')
        if not self.timeout > 0:
            raise ConfigurationError(f'timeout must be positive, got {self.timeout}')
        if not (self.temperature >= 0 and math.isfinite(self.temperature)):
            raise ConfigurationError(f'temperature must be >= 0, got {self.temperature}')
        return self


@dataclass(frozen=True)
class TokenUsage:
    """Token counts for one provider call."""
    prompt_tokens: int = 0
    completion_tokens: int = 0

    @property
    def total(self) -> int:
        return self.prompt_tokens + self.completion_tokens

    def __add__(self, other: 'TokenUsage') -> 'TokenUsage':
        return TokenUsage(
            self.prompt_tokens + other.prompt_tokens,
            self.completion_tokens + other.completion_tokens,
        )


@dataclass(frozen=True)
class Exchange:
    """
    One provider attempt.

    Schema:
        prompt: str - full prompt text sent
        response: str - raw response text ('' on transport failure)
        usage: TokenUsage - reported or estimated usage
        latency_ms: float - wall-clock duration of the call
        attempt: int - 1-based attempt number within the invocation
        generation: int - generation that triggered the invocation
        ok: bool - True if the response parsed into enough offspring
        error: str - failure code and message, '' on success
    """
    prompt: str
    response: str
    usage: TokenUsage
    latency_ms: float
    attempt: int
    generation: int = 0
    ok: bool = False
    error: str = ''

    def to_json(self) -> dict:
        """Convert to a JSON-serializable dict; latency is left to the timing record."""
        return {
            'generation': self.generation,
            'attempt': self.attempt,
            'ok': self.ok,
            'error': self.error,
            'prompt': self.prompt,
            'response': self.response,
            'prompt_tokens': self.usage.prompt_tokens,
            'completion_tokens': self.usage.completion_tokens,
            'total_tokens': self.usage.total,
        }


@dataclass
class UsageReport:
    """Per-run token totals."""
    prompt_tokens: int = 0
    completion_tokens: int = 0
    calls: int = 0
    failures: int = 0

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens

    def to_json(self) -> dict:
        return {
            'prompt_tokens': self.prompt_tokens,
            'completion_tokens': self.completion_tokens,
            'total_tokens': self.total_tokens,
            'calls': self.calls,
            'failures': self.failures,
        }
