import os
import subprocess
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from maginterp.ground_states import compute_C_p  # noqa: E402

CRITERIA = {}


@pytest.fixture(scope="session")
def gn3():
    return compute_C_p(2, 3.0)


@pytest.fixture(scope="session")
def gn14():
    return compute_C_p(2, 1.4)


@pytest.fixture
def record():
    """record(n, passed, detail) stores the outcome of acceptance criterion n."""
    def _rec(n, passed, detail=""):
        CRITERIA[n] = (bool(passed), detail)
        return passed
    return _rec


def run_python_backend(code):
    """Run a snippet with numba disabled; returns its last stdout line."""
    env = dict(os.environ, MAGINTERP_DISABLE_NUMBA="1")
    src = os.path.join(os.path.dirname(__file__), "..", "src")
    env["PYTHONPATH"] = os.pathsep.join([os.path.abspath(src), env.get("PYTHONPATH", "")])
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return out.stdout.strip().splitlines()[-1]


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
