import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=50, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def random_hermitian(rng, n, psd=False, rank=None):
    """Random Hermitian matrix; ``psd=True`` gives A A^H with A of ``rank`` columns."""
    m = rank or n
    a = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    if psd:
        return a @ a.conj().T
    return 0.5 * (a + a.conj().T)


def random_vector(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance summary --------------------------------------------------------

ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def record(criterion: str, passed: bool, detail: str) -> bool:
    """Store (and print) one acceptance line; returns ``passed``."""
    ACCEPTANCE[criterion] = (bool(passed), detail)
    print(f"{criterion}: {'PASS' if passed else 'FAIL'} - {detail}")
    return bool(passed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda s: [int(p) if p.isdigit() else p for p in s.replace(".", " ").split()]):
        passed, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{name}: {'PASS' if passed else 'FAIL'} - {detail}")
