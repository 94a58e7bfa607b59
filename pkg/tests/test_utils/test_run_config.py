"""
Tests for run configuration loading and validation.
"""
import math

import pytest

from config import TestingConfig
from models.exchange import ProviderConfig
from models.run import RunConfig
from utils.errors import ConfigurationError


@pytest.mark.unit
class TestRunConfigDefaults:
    """Test default settings and derived values."""

    def test_defaults(self):
        """Test the documented defaults."""
        config = RunConfig()
        assert (config.N, config.N_max, config.l, config.s, config.delta) == (100, 10000, 5, 3, 0.1)
        assert config.algorithm == 'nsga2-llm'
        assert config.retries == 3
        assert config.provider.kind == 'mock'
        assert config.validate() is config

    def test_generation_cap(self):
        """Test the cap is 2 * N_max / N unless set."""
        assert RunConfig(N=100, N_max=10000).generation_cap == 200
        assert RunConfig(max_generations=7).generation_cap == 7

    def test_uses_llm(self):
        """Test only the LLM algorithms need a provider."""
        assert RunConfig(algorithm='nsga2').uses_llm is False
        assert RunConfig(algorithm='nsga2-llm-always').uses_llm is True

    def test_from_settings(self):
        """Test provider defaults come from process settings."""
        settings = {'LLM_API_BASE': 'https://llm.example.test/v1', 'LLM_MODEL': 'm', 'LLM_TIMEOUT': 30}
        config = RunConfig.from_settings(settings)
        assert config.provider.endpoint == 'https://llm.example.test/v1'
        assert config.provider.timeout == 30.0
        assert config.provider.kind == 'mock'

    def test_from_settings_object(self):
        """Test a config class instance is accepted."""
        config = RunConfig.from_settings(TestingConfig())
        assert config.provider.api_key_env == 'LLM_API_KEY'


@pytest.mark.unit
class TestRunConfigValidation:
    """Test configuration errors are raised before any run starts."""

    @pytest.mark.parametrize('changes', [
        {'algorithm': 'random-search'},
        {'problem': 'ZDT9'},
        {'N': 1},
        {'N': 100, 'N_max': 50},
        {'s': 0},
        {'s': 6, 'l': 5},
        {'l': 30, 'N': 20, 'N_max': 400},
        {'delta': 0.0},
        {'delta': -1.0},
        {'delta': math.nan},
        {'retries': -1},
        {'pf_samples': 1},
        {'max_generations': 0},
        {'problem': 'UF8', 'd': 3},
    ])
    def test_invalid(self, changes):
        """Test each invalid field is a configuration error."""
        with pytest.raises(ConfigurationError):
            RunConfig(**changes).validate()

    def test_infinite_delta_allowed(self):
        """Test delta = inf is valid and disables the LLM."""
        assert RunConfig(delta=math.inf).validate().delta == math.inf

    def test_http_provider_checked_only_with_llm(self):
        """Test an incomplete http provider fails LLM runs but not plain ones."""
        provider = ProviderConfig(kind='http-chat')
        with pytest.raises(ConfigurationError):
            RunConfig(provider=provider).validate()
        RunConfig(algorithm='nsga2', provider=provider).validate()


@pytest.mark.unit
class TestRunConfigLoading:
    """Test run files, flag mappings and precedence."""

    def test_mapping_keys_case_insensitive(self):
        """Test run-file keys map onto fields with conversion."""
        config = RunConfig.from_mapping({
            'problem': 'UF1', 'ALGO': 'NSGA2', 'pop': '40', 'Evals': '800',
            'delta': '0.5', 'free_llm_evals': 'yes', 'provider': 'http',
            'api_base': 'https://llm.example.test/v1', 'model': 'm',
        })
        assert (config.problem, config.algorithm, config.N, config.N_max) == ('UF1', 'nsga2', 40, 800)
        assert config.delta == 0.5
        assert config.free_llm_evals is True
        assert config.provider.kind == 'http-chat'
        assert config.provider.model == 'm'

    def test_none_values_skipped(self):
        """Test unset flags leave the base untouched."""
        base = RunConfig(N=30, N_max=600)
        assert RunConfig.from_mapping({'POP': None, 'SEED': 4}, base=base).N == 30

    def test_unknown_key(self):
        """Test an unknown setting names the valid keys."""
        with pytest.raises(ConfigurationError, match='PROBLEM'):
            RunConfig.from_mapping({'POPULATION': 10})

    @pytest.mark.parametrize('key,value', [('POP', 'many'), ('DELTA', 'small'), ('PLOT', 'maybe'), ('PROVIDER', 'fax')])
    def test_unconvertible_value(self, key, value):
        """Test bad values are configuration errors."""
        with pytest.raises(ConfigurationError):
            RunConfig.from_mapping({key: value})

    def test_file_then_flags(self, tmp_path):
        """Test flags override the run file, which overrides the base."""
        run_file = tmp_path / 'run.env'
        run_file.write_text('PROBLEM=ZDT2\nPOP=40\nEVALS=2000\n# comment\nDELTA=inf\n', encoding='utf-8')
        config = RunConfig.from_file(str(run_file), {'POP': 50, 'SEED': None})
        assert config.problem == 'ZDT2'
        assert config.N == 50
        assert config.N_max == 2000
        assert math.isinf(config.delta)

    def test_missing_file(self, tmp_path):
        """Test an unreadable run file is a configuration error."""
        with pytest.raises(ConfigurationError):
            RunConfig.from_file(str(tmp_path / 'absent.env'))

    def test_to_json_renders_infinite_delta(self):
        """Test the JSON form is serializable with delta = inf."""
        data = RunConfig(delta=math.inf).to_json()
        assert data['delta'] == 'inf'
        assert data['provider']['kind'] == 'mock'
