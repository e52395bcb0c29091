import numpy as np
import pytest

from ebgan.nn import init_mlp
from ebgan.numerics import make_stream


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    denom = max(np.linalg.norm(a), np.linalg.norm(b), 1e-300)
    return np.linalg.norm(a - b) / denom


@pytest.fixture
def small_nets():
    """Factory for small random generator/discriminator pairs."""
    def make(seed, d_z=3, d_x=4, gen_hidden=6, disc_hidden=5, init_std=1.5):
        g = init_mlp((d_z, gen_hidden, d_x), "identity", init_std, make_stream(seed, "g"))
        d = init_mlp((d_x, disc_hidden, 1), "sigmoid", init_std, make_stream(seed, "d"))
        rng = make_stream(seed, "bias")
        # nonzero biases so kinks are not all at the origin
        for b in g.biases + d.biases:
            b[:] = rng.normal(b.shape, 0.0, 0.3)
        return g, d
    return make


_CRITERIA: dict[int, str] = {}


@pytest.fixture(scope="session")
def criterion_report():
    """Record one result line per acceptance criterion; printed in the terminal summary."""
    def record(number, passed, detail):
        _CRITERIA[number] = f"CRITERION {number}: {'PASS' if passed else 'FAIL'} - {detail}"
        print(_CRITERIA[number])
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[k])
