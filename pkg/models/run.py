"""
Run models.
Run configuration (file, flag and API input), per-generation records and the run report.
"""
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import pandas as pd
from dotenv import dotenv_values

from models.exchange import Exchange, ProviderConfig, UsageReport
from models.individual import Population
from utils.errors import ConfigurationError
from utils.gate import GateRecord
from utils.metrics import nondominated
from utils.nsga2 import VariationParams
from utils.problems import make_problem

ALGORITHMS = ('nsga2', 'nsga2-llm', 'nsga2-llm-always')
LLM_ALGORITHMS = ('nsga2-llm', 'nsga2-llm-always')
PROVIDER_ALIASES = {'mock': 'mock', 'http': 'http-chat', 'http-chat': 'http-chat'}
METRICS_COLUMNS = ['generation', 'evaluations', 'hv', 'igd', 'score', 'invoked', 'tokens']

_TRUE_WORDS = ('1', 'true', 'yes', 'on')
_FALSE_WORDS = ('0', 'false', 'no', 'off', '')


def _to_int(key: str, value) -> int:
    try:
        return int(str(value).strip())
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f'{key} must be an integer, got {value!r}') from exc


def _to_float(key: str, value) -> float:
    try:
        return float(str(value).strip())
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f'{key} must be a number, got {value!r}') from exc


def _to_bool(key: str, value) -> bool:
    if isinstance(value, bool):
        return value
    word = str(value).strip().lower()
    if word in _TRUE_WORDS:
        return True
    if word in _FALSE_WORDS:
        return False
    raise ConfigurationError(f'{key} must be true or false, got {value!r}')


def _to_provider(key: str, value) -> str:
    kind = PROVIDER_ALIASES.get(str(value).strip().lower())
    if kind is None:
        raise ConfigurationError(f"{key} must be one of: {', '.join(PROVIDER_ALIASES)}, got {value!r}")
    return kind


def _to_str(_key: str, value) -> str:
    return str(value).strip()


# run-file key -> (RunConfig / ProviderConfig field, converter)
RUN_KEYS = {
    'PROBLEM': ('problem', lambda key, value: str(value).strip().upper()),
    'ALGO': ('algorithm', lambda key, value: str(value).strip().lower()),
    'POP': ('N', _to_int),
    'EVALS': ('N_max', _to_int),
    'DELTA': ('delta', _to_float),
    'L': ('l', _to_int),
    'S': ('s', _to_int),
    'SEED': ('seed', _to_int),
    'OUT': ('out_dir', _to_str),
    'FREE_LLM_EVALS': ('free_llm_evals', _to_bool),
    'DIM': ('d', _to_int),
    'RETRIES': ('retries', _to_int),
    'PF_SAMPLES': ('pf_samples', _to_int),
    'MAX_GENERATIONS': ('max_generations', _to_int),
    'PLOT': ('plot', _to_bool),
}
PROVIDER_KEYS = {
    'PROVIDER': ('kind', _to_provider),
    'API_BASE': ('endpoint', _to_str),
    'MODEL': ('model', _to_str),
    'API_KEY_ENV': ('api_key_env', _to_str),
    'TIMEOUT': ('timeout', _to_float),
    'TEMPERATURE': ('temperature', _to_float),
    'FAULT_INJECTION': ('fault_injection', _to_bool),
}


def read_run_file(path: str | None) -> dict:
    """
    Parse a dotenv-format run file into upper-cased keys.

    Raises:
        ConfigurationError: If the file cannot be read
    """
    if not path:
        return {}
    try:
        with open(path, encoding='utf-8') as handle:
            values = dotenv_values(stream=handle)
    except OSError as e:
        raise ConfigurationError(f'cannot read run config {path}: {e}') from e
    return {str(key).strip().upper(): value for key, value in values.items()}


@dataclass(frozen=True)
class RunConfig:  # pylint: disable=too-many-instance-attributes
    """
    One optimization run.

    Schema:
        problem: str - suite problem name
        algorithm: str - nsga2 | nsga2-llm | nsga2-llm-always
        N: int - population size
        N_max: int - evaluation budget
        l: int - elites serialized into the prompt
        s: int - LLM offspring requested per invocation
        delta: float - gate threshold (math.inf disables the LLM)
        variation: VariationParams - SBX / mutation settings
        seed: int - random seed
        provider: ProviderConfig - LLM backend
        out_dir: str | None - where emit_outputs writes
        free_llm_evals: bool - LLM offspring evaluations do not count against N_max
        d: int | None - decision dimension override
        retries: int - extra provider attempts per invocation
        pf_samples: int - true-front sample size for the indicators
        max_generations: int | None - generation cap, 2 * N_max / N when unset
        plot: bool - write SVG plots
    """
    # pylint: disable=invalid-name
    problem: str = 'ZDT1'
    algorithm: str = 'nsga2-llm'
    N: int = 100
    N_max: int = 10000
    l: int = 5
    s: int = 3
    delta: float = 0.1
    variation: VariationParams = field(default_factory=VariationParams)
    seed: int = 1
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    out_dir: str | None = None
    free_llm_evals: bool = False
    d: int | None = None
    retries: int = 3
    pf_samples: int = 10000
    max_generations: int | None = None
    plot: bool = True

    @property
    def uses_llm(self) -> bool:
        return self.algorithm in LLM_ALGORITHMS

    @property
    def generation_cap(self) -> int:
        if self.max_generations is not None:
            return self.max_generations
        return max(1, 2 * self.N_max // self.N)

    def validate(self) -> 'RunConfig':
        """
        Check every field; nothing is evaluated and no network is touched.

        Raises:
            ConfigurationError: On the first invalid field
        """
        if self.algorithm not in ALGORITHMS:
            raise ConfigurationError(
                f"Invalid algorithm '{self.algorithm}'. Must be one of: {', '.join(ALGORITHMS)}"
            )
        make_problem(self.problem, self.d)
        if self.N < 2:
            raise ConfigurationError(f'population size must be at least 2, got {self.N}')
        if self.N_max < self.N:
            raise ConfigurationError(f'evaluation budget {self.N_max} is smaller than the population {self.N}')
        if not 1 <= self.s <= self.l <= self.N:
            raise ConfigurationError(f'need 1 <= s <= l <= N, got s={self.s}, l={self.l}, N={self.N}')
        if math.isnan(self.delta) or not self.delta > 0:
            raise ConfigurationError(f'delta must be positive, got {self.delta}')
        if self.retries < 0:
            raise ConfigurationError(f'retries must be non-negative, got {self.retries}')
        if self.pf_samples < 2:
            raise ConfigurationError(f'pf_samples must be at least 2, got {self.pf_samples}')
        if self.max_generations is not None and self.max_generations < 1:
            raise ConfigurationError(f'max_generations must be positive, got {self.max_generations}')
        if self.uses_llm:
            self.provider.validate()
        return self

    @classmethod
    def from_settings(cls, settings) -> 'RunConfig':
        """
        Defaults seeded from process settings (a config object or Flask's app.config).

        The provider stays mock unless a run file or flag selects http.
        """
        def setting(name, default):
            if isinstance(settings, dict):
                return settings.get(name, default)
            return getattr(settings, name, default)

        provider = ProviderConfig(
            endpoint=setting('LLM_API_BASE', None) or None,
            model=setting('LLM_MODEL', None) or None,
            api_key_env=setting('LLM_API_KEY_ENV', 'LLM_API_KEY'),
            timeout=float(setting('LLM_TIMEOUT', 60.0)),
            temperature=float(setting('LLM_TEMPERATURE', 1.0)),
        )
        return cls(provider=provider)

    @classmethod
    def from_mapping(cls, values: dict, base: 'RunConfig | None' = None) -> 'RunConfig':
        """
        Apply run-file style keys (case-insensitive) on top of a base config.

        None values are skipped, so flag parsers can pass every option.

        Raises:
            ConfigurationError: On an unknown key or an unconvertible value
        """
        base = base or cls()
        run_fields, provider_fields = {}, {}
        for raw_key, value in values.items():
            if value is None:
                continue
            key = str(raw_key).strip().upper()
            if key in RUN_KEYS:
                name, convert = RUN_KEYS[key]
                run_fields[name] = convert(key, value)
            elif key in PROVIDER_KEYS:
                name, convert = PROVIDER_KEYS[key]
                provider_fields[name] = convert(key, value)
            else:
                known = ', '.join(list(RUN_KEYS) + list(PROVIDER_KEYS))
                raise ConfigurationError(f"Unknown run setting '{raw_key}'. Must be one of: {known}")
        provider = replace(base.provider, **provider_fields)
        return replace(base, provider=provider, **run_fields)

    @classmethod
    def from_file(cls, path: str | None = None, overrides: dict | None = None,
                  base: 'RunConfig | None' = None) -> 'RunConfig':
        """
        Load a dotenv-format run file, then apply overrides (flags win).

        Args:
            path: KEY=value file, optional
            overrides: Run-file style keys from flags or a request body
            base: Defaults to start from

        Returns:
            RunConfig: Unvalidated configuration
        """
        values = read_run_file(path)
        values.update({key: value for key, value in (overrides or {}).items() if value is not None})
        return cls.from_mapping(values, base=base)

    def to_json(self) -> dict:
        data = asdict(self)
        data['delta'] = 'inf' if math.isinf(self.delta) else self.delta
        return data


@dataclass
class GenerationRecord:
    """
    One row of the convergence series.

    Schema:
        generation: int - 0 for the initial population
        evaluations: int - evaluations_used after the generation
        hv: float - normalized hypervolume of the population
        igd: float - IGD of the population
        score: float - gate score (NaN for generation 0)
        invoked: bool - True if the LLM operator ran
        tokens: int - cumulative tokens so far
        exchanges: list[Exchange] - provider attempts made in this generation
    """
    generation: int
    evaluations: int
    hv: float
    igd: float
    score: float = math.nan
    invoked: bool = False
    tokens: int = 0
    exchanges: list[Exchange] = field(default_factory=list)

    def row(self) -> dict:
        return {
            'generation': self.generation,
            'evaluations': self.evaluations,
            'hv': self.hv,
            'igd': self.igd,
            'score': self.score,
            'invoked': self.invoked,
            'tokens': self.tokens,
        }


@dataclass
class RunReport:  # pylint: disable=too-many-instance-attributes
    """
    Everything a run produced.

    Schema:
        config: RunConfig - the validated configuration
        series: list[GenerationRecord] - generation 0 first
        final_population: Population - survivors of the last generation
        pf: np.ndarray - true-front sample used by the indicators
        wall_time: float - seconds (reported by timing() only)
        gate_history: list[GateRecord] - gate outcomes per generation
        exchanges: list[Exchange] - every provider attempt
        invocations: int - generations that used the LLM operator
        llm_failures: int - failed provider attempts
        injected: int - LLM offspring injected into mating pools
        fallbacks: int - invocations that ended in plain variation
        usage: UsageReport - token totals
        stopped_reason: str - why the loop ended
    """
    config: RunConfig
    series: list[GenerationRecord]
    final_population: Population
    pf: np.ndarray
    wall_time: float = 0.0
    gate_history: list[GateRecord] = field(default_factory=list)
    exchanges: list[Exchange] = field(default_factory=list)
    invocations: int = 0
    llm_failures: int = 0
    injected: int = 0
    fallbacks: int = 0
    usage: UsageReport = field(default_factory=UsageReport)
    stopped_reason: str = ''

    @property
    def generations(self) -> int:
        """Variation generations executed (generation 0 excluded)."""
        return len(self.series) - 1

    @property
    def final_hv(self) -> float:
        return self.series[-1].hv

    @property
    def final_igd(self) -> float:
        return self.series[-1].igd

    @property
    def total_tokens(self) -> int:
        return self.usage.total_tokens

    def to_frame(self) -> pd.DataFrame:
        """Per-generation series with the metrics CSV columns."""
        return pd.DataFrame([record.row() for record in self.series], columns=METRICS_COLUMNS)

    def final_front(self) -> np.ndarray:
        """Objective vectors of the final non-dominated set."""
        return nondominated(self.final_population.objectives())

    def summary(self) -> dict:
        return {
            'problem': self.config.problem,
            'algorithm': self.config.algorithm,
            'seed': self.config.seed,
            'generations': self.generations,
            'evaluations': self.series[-1].evaluations,
            'hv': self.final_hv,
            'igd': self.final_igd,
            'invocations': self.invocations,
            'llm_failures': self.llm_failures,
            'fallbacks': self.fallbacks,
            'injected': self.injected,
            'usage': self.usage.to_json(),
            'stopped_reason': self.stopped_reason,
        }

    def timing(self) -> dict:
        """Wall-clock measurements; these differ between otherwise identical runs."""
        return {
            'wall_time': round(self.wall_time, 3),
            'exchanges': [
                {
                    'generation': exchange.generation,
                    'attempt': exchange.attempt,
                    'latency_ms': round(exchange.latency_ms, 3),
                }
                for exchange in self.exchanges
            ],
        }
