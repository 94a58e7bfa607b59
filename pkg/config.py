"""
Configuration file for the experiment toolkit.
Loads settings from environment variables (via .env file in development).
"""
import os
from dataclasses import dataclass
from dotenv import load_dotenv

# Load environment variables from .env file (development only)
load_dotenv()


@dataclass
# pylint: disable=too-few-public-methods,invalid-name
class Config:
    """Base configuration class."""
    # Where runs, batches and API-launched runs are written
    OUTPUT_DIR: str = os.environ.get('OUTPUT_DIR') or 'results'
    # LLM provider defaults (the key itself is only ever read from LLM_API_KEY_ENV)
    LLM_API_BASE: str = os.environ.get('LLM_API_BASE') or ''
    LLM_MODEL: str = os.environ.get('LLM_MODEL') or ''
    LLM_API_KEY_ENV: str = os.environ.get('LLM_API_KEY_ENV') or 'LLM_API_KEY'
    LLM_TIMEOUT: float = float(os.environ.get('LLM_TIMEOUT') or 60)
    LLM_TEMPERATURE: float = float(os.environ.get('LLM_TEMPERATURE') or 1.0)
    # Application settings
    LOG_LEVEL: str = os.environ.get('LOG_LEVEL') or 'INFO'
    DEBUG: bool = os.environ.get('FLASK_ENV') == 'development'
    TESTING: bool = False


@dataclass
# pylint: disable=too-few-public-methods
class DevelopmentConfig(Config):
    """Development environment configuration."""
    DEBUG: bool = True
    TESTING: bool = False


@dataclass
# pylint: disable=too-few-public-methods
class TestingConfig(Config):
    """Testing environment configuration."""
    TESTING: bool = True
    OUTPUT_DIR: str = os.path.join('results', 'test')
    LOG_LEVEL: str = 'WARNING'


@dataclass
# pylint: disable=too-few-public-methods
class ProductionConfig(Config):
    """Production environment configuration."""
    DEBUG: bool = False
    TESTING: bool = False


# Configuration dictionary
config = {
    'development': DevelopmentConfig,
    'testing': TestingConfig,
    'production': ProductionConfig,
    'default': DevelopmentConfig
}
