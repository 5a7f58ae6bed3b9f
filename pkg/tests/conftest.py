import numpy as np
import pytest

from extmap import make_cassini, make_circle, make_ellipse, unit_square

SMOOTH_BUILTINS = [
    ("circle-1", lambda: make_circle(1.0)),
    ("circle-0.5", lambda: make_circle(0.5)),
    ("ellipse-2", lambda: make_ellipse(2.0)),
    ("ellipse-5", lambda: make_ellipse(5.0)),
    ("cassini-2", lambda: make_cassini(2.0)),
    ("cassini-1.25", lambda: make_cassini(1.25)),
]


@pytest.fixture(params=[f for _, f in SMOOTH_BUILTINS], ids=[k for k, _ in SMOOTH_BUILTINS])
def smooth_curve(request):
    return request.param()


@pytest.fixture(params=[f for _, f in SMOOTH_BUILTINS] + [unit_square],
                ids=[k for k, _ in SMOOTH_BUILTINS] + ["square"])
def any_curve(request):
    return request.param()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=lambda k: (int(k.split(".")[0]), k)):
        terminalreporter.write_line(RESULTS[key])
