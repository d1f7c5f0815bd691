import pytest

from kex.cycle_models import (build_cf_cycle, build_ef_cycle, build_eef_cycle, build_hcf_cycle,
                              build_pief_cycle)
from kex.enumeration import PsMethod
from kex.ir import IpStatus, solve_ip, solve_lp
from kex.oracle import brute_force_optimum
from kex.separation import separate

from conftest import random_instance

BUILDERS = [build_cf_cycle, build_hcf_cycle, build_ef_cycle, build_eef_cycle, build_pief_cycle]


def test_sizes_appendix(ex):
    assert build_cf_cycle(ex, 4).stats["vars"] == 3
    assert build_hcf_cycle(ex, 4).stats["vars"] == 6
    assert build_ef_cycle(ex, 3, reduce=False).stats["vars"] == 6
    assert build_ef_cycle(ex, 3).stats["vars"] == 5
    assert build_eef_cycle(ex, 4, reduce=False).stats["vars"] == 10
    assert build_eef_cycle(ex, 4).stats["vars"] == 8
    assert build_pief_cycle(ex, 4).stats["vars"] == 9


@pytest.mark.parametrize("builder", BUILDERS)
def test_appendix_cycles_only(ex, builder):
    # only the 2-cycle <1,4> is available at K=2
    res = solve_ip(builder(ex, 2).model)
    assert res.status is IpStatus.OPTIMAL and res.objective == 2


@pytest.mark.parametrize("seed", range(8))
def test_match_oracle(seed):
    inst = random_instance(100 + seed, R=9, N=0, density=0.3, weighted=seed % 2 == 1)
    for K in (2, 3, 4):
        want = brute_force_optimum(inst, K, 0).value
        for builder in BUILDERS:
            b = builder(inst, K)
            res = solve_ip(b.model)
            assert res.objective == want, (builder.__name__, K)
            assert not separate(res.x, b.lazy)
        b = build_pief_cycle(inst, K, ps_method=PsMethod.SHORTEST_PATH)
        assert solve_ip(b.model).objective == want


@pytest.mark.parametrize("seed", range(6))
def test_lp_relations(seed):
    inst = random_instance(200 + seed, R=9, N=0, density=0.35)
    for K in (3, 4):
        cf = solve_lp(build_cf_cycle(inst, K).model).objective
        assert solve_lp(build_hcf_cycle(inst, K).model).objective == pytest.approx(cf, abs=1e-6)
        assert solve_lp(build_pief_cycle(inst, K).model).objective == pytest.approx(cf, abs=1e-6)
        assert solve_lp(build_ef_cycle(inst, K).model).objective >= cf - 1e-6
        assert solve_lp(build_eef_cycle(inst, K).model).objective >= cf - 1e-6


def test_ef_cycle_k1_self_loops_only():
    from kex.instance import make_instance
    inst = make_instance(2, 0, {(1, 1): 3, (1, 2): 1, (2, 1): 1}, allow_self_loops=True)
    assert solve_ip(build_ef_cycle(inst, 1).model).objective == 3
    assert solve_ip(build_ef_cycle(inst, 2).model).objective == 3
