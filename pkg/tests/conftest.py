import numpy as np
import pytest

from pcd2d import scheme
from pcd2d.harness import generate_library
from pcd2d.gf import FieldSpec

ACCEPTANCE_RESULTS: dict[str, str] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


def make_library(params, symbols_per_subfile=2, seed=7):
    fs = FieldSpec.for_length(params.n_coded)
    return generate_library(params.N, params.F * symbols_per_subfile, seed, fs)


@pytest.fixture
def example_setup():
    params = scheme.derive_params(6, 2, 6, 2)
    code = scheme.code_for(params)
    library = make_library(params, symbols_per_subfile=3)
    caches = scheme.place(params, library, code)
    return params, code, library, caches


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"{ACCEPTANCE_RESULTS[name]}  {name}")
