import pytest

from kex.bench import GenConfig, generate_instance
from kex.instance import appendix_example


@pytest.fixture
def ex():
    return appendix_example()


@pytest.fixture
def unit_ex():
    """Example graph with zero tau weights."""
    from kex.instance import make_instance
    inst = appendix_example()
    return make_instance(inst.rdp_count, inst.ndd_count, inst.arcs)


def random_instance(seed, R=8, N=2, density=0.35, weighted=False):
    return generate_instance(GenConfig(R, N / R if R else 0, density, weighted=weighted, seed=seed))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
