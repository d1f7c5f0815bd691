import pytest

from kex.enumeration import enumerate_chains, enumerate_cycles
from kex.instance import make_instance
from kex.oracle import OracleCapError, brute_force_optimum, candidates, subset_optimum
from kex.solution import validate_solution

from conftest import random_instance


def test_appendix(ex):
    r = brute_force_optimum(ex, 2, 3)
    assert r.value == 6
    assert validate_solution(ex, r.best, 2, 3).valid


def test_candidates_match_enumeration():
    inst = random_instance(7, R=8, N=2, density=0.35)
    c = candidates(inst, 3, 4)
    assert sum(x.cycle is not None for x in c) == len(enumerate_cycles(inst, 3))
    assert sum(x.chain is not None for x in c) == len(enumerate_chains(inst, 4))


@pytest.mark.parametrize("seed", range(30))
def test_two_oracles_agree(seed):
    inst = random_instance(seed, R=5, N=1, density=0.3, weighted=seed % 2 == 0)
    try:
        ref = subset_optimum(inst, 3, 3)
    except OracleCapError:
        pytest.skip("too many candidates for subset enumeration")
    assert brute_force_optimum(inst, 3, 3).value == ref.value


def test_cap():
    inst = random_instance(1, R=10, N=2, density=0.8)
    with pytest.raises(OracleCapError):
        brute_force_optimum(inst, 5, 6, cap=50)


def test_empty_instance():
    inst = make_instance(0, 0, {})
    assert brute_force_optimum(inst, 3, 3).value == 0
