import pytest

from relay_ee.montecarlo import McConfig, simulate
from relay_ee.params import reference_params

MC_SEED = 7
MC_N = 10_000


@pytest.fixture(scope="session")
def ref_params():
    return reference_params(rho=1)


@pytest.fixture(scope="session")
def ref_mc():
    return McConfig(n_realizations=MC_N, seed=MC_SEED)


@pytest.fixture(scope="session")
def ref_samples(ref_params, ref_mc):
    """One 1e4-realization run of the reference network, shared by the MC tests."""
    return simulate(ref_params, ref_mc)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Record one PASS/FAIL line per acceptance criterion; printed in the terminal summary."""
    def report(label, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {label}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
