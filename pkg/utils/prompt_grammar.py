"""
Prompt/response grammar.
The single definition of solution framing shared by the prompt builder,
the response parser and the mock provider.
"""
import re

import numpy as np

START = '<start>'
END = '<end>'
DECIMALS = 3

SPAN_PATTERN = re.compile(re.escape(START) + r'(.*?)' + re.escape(END), re.DOTALL)
SOLUTION_LINE_PATTERN = re.compile(
    r'^solution: ' + re.escape(START) + r'(.*?)' + re.escape(END) + r'\s*$', re.MULTILINE
)
OBJECTIVE_LINE_PATTERN = re.compile(r'^obj_value: (.*?)\s*$', re.MULTILINE)
LOWER_BOUNDS_PATTERN = re.compile(r'^Lower bounds: (.*?)\s*$', re.MULTILINE)
UPPER_BOUNDS_PATTERN = re.compile(r'^Upper bounds: (.*?)\s*$', re.MULTILINE)
COUNT_PATTERN = re.compile(r'output (\w+) new solutions')

NUMBER_WORDS = (
    'zero', 'one', 'two', 'three', 'four', 'five',
    'six', 'seven', 'eight', 'nine', 'ten',
)


def format_values(values, decimals: int = DECIMALS) -> str:
    """Comma-separated fixed-point rendering."""
    return ','.join(f'{float(value):.{decimals}f}' for value in values)


def frame(values, decimals: int = DECIMALS) -> str:
    """Wrap a vector in the solution delimiters."""
    return f'{START}{format_values(values, decimals)}{END}'


def solution_line(values) -> str:
    return f'solution: {frame(values)}'


def objective_line(values) -> str:
    return f'obj_value: {format_values(values)}'


def count_phrase(count: int) -> str:
    """Spell small counts out ("three"), larger ones as digits."""
    return NUMBER_WORDS[count] if 0 <= count < len(NUMBER_WORDS) else str(count)


def parse_count_phrase(word: str) -> int:
    """Inverse of count_phrase."""
    if word in NUMBER_WORDS:
        return NUMBER_WORDS.index(word)
    return int(word)


def split_values(text: str) -> np.ndarray:
    """
    Parse a comma-separated list of reals.

    Raises:
        ValueError: If any token is not a number
    """
    return np.array([float(token) for token in text.split(',')], dtype=float)


def extract_spans(text: str) -> list[str]:
    """All delimiter-framed spans in order of appearance."""
    return SPAN_PATTERN.findall(text)
