"""Shared fixtures: the three worked examples and a seeded random suite.

Model files live in tests/fixtures and are loaded through the public
parser so every test run also exercises the document schema.
"""

import pathlib
import random

import pytest

from drxp import (
    ExplanationProblem,
    parse_instance,
    parse_model,
    random_problem,
    validate_explanation_problem,
)

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def load_example(name: str) -> ExplanationProblem:
    problem = parse_model((FIXTURES / f"{name}.model").read_text())
    instance = parse_instance((FIXTURES / f"{name}.instance").read_text().strip(), problem)
    return validate_explanation_problem(problem, instance)


@pytest.fixture(scope="session")
def example1() -> ExplanationProblem:
    """Three continuous features on [-1, 4] (0.25 grid), region classifier
    0 < x1 < 2 and 4 x1 >= x2 + x3, instance v = (1, 1, 1) with label 1."""
    return load_example("example1")


@pytest.fixture(scope="session")
def example6() -> ExplanationProblem:
    """Two features over {0, 0.5, 1}, lookup classifier with zeros at
    (0.5, 0.5), (0, 1), (1, 0), instance v = (1, 1) with label 1."""
    return load_example("example6")


@pytest.fixture(scope="session")
def example7() -> ExplanationProblem:
    """Three discrete features, lookup classifier with zeros at
    (0.5, 0.5, 1), (1, 0.5, 0.5), (-0.5, 1, 1), (1, 1, -0.5),
    instance v = (1, 1, 1) with label 1."""
    return load_example("example7")


def random_suite(count: int, base_seed: int = 0, **kwargs) -> list:
    """Deterministic list of small random explanation problems."""
    return [random_problem(random.Random(base_seed + k), **kwargs) for k in range(count)]
