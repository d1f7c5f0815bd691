import time

import pytest

from kex.assembly import (Method, SolveConfig, build, build_ef_hybrid, combine, method_ids, solve)
from kex.chain_models import UNBOUNDED
from kex.cycle_models import build_cf_cycle
from kex.chain_models import build_cf_chain
from kex.enumeration import PsMethod
from kex.instance import appendix_example
from kex.ir import IpStatus, solve_ip
from kex.oracle import brute_force_optimum
from kex.separation import separate

from conftest import random_instance


def test_method_ids():
    ids = method_ids()
    assert len(ids) == 42 and len(set(ids)) == 42
    assert sum(m[2] == "rcvf" for m in ids) == 6


def test_golden_all_methods(ex):
    t0 = time.perf_counter()
    for c, h, m in method_ids():
        out = solve(ex, c, h, 2, 3, SolveConfig(method=Method(m)))
        assert out.status is IpStatus.OPTIMAL and out.objective == 6, (c, h, m)
        assert out.report.valid
    assert time.perf_counter() - t0 < 10


def test_combine_rejects_mismatch(ex):
    other = random_instance(1)
    with pytest.raises(ValueError):
        combine(build_cf_cycle(ex, 2), build_cf_chain(other, 3))


def test_combine_merges_rows(ex):
    b = combine(build_cf_cycle(ex, 3), build_cf_chain(ex, 3))
    # one packing row per RDP
    assert sorted(b.rdp_use) == list(ex.rdps)
    assert solve_ip(b.model).objective == brute_force_optimum(ex, 3, 3).value


def test_none_none(ex):
    out = solve(ex, "none", "none", 3, 3)
    assert out.objective == 0 and out.xs.cycles == [] and out.xs.chains == []


@pytest.mark.parametrize("seed", range(6))
def test_hybrid_special_matches(seed):
    inst = random_instance(500 + seed, R=8, N=2, density=0.3)
    for K, L in [(2, 2), (2, 3), (3, 3), (3, 4), (2, 5)]:
        want = brute_force_optimum(inst, K, L).value
        for special in (False, True):
            b = build_ef_hybrid(inst, K, L, special=special)
            res = solve_ip(b.model)
            assert res.objective == want, (K, L, special)
            assert not separate(res.x, b.lazy)


@pytest.mark.parametrize("seed", range(4))
def test_sample_methods_match_oracle(seed):
    inst = random_instance(600 + seed, R=8, N=2, density=0.35, weighted=True)
    K, L = 3, 4
    want = brute_force_optimum(inst, K, L).value
    for c, h, m in method_ids():
        out = solve(inst, c, h, K, L, SolveConfig(method=Method(m)))
        assert out.objective == want, (c, h, m)
        assert out.report.valid


def test_options_keep_optimum(ex):
    want = brute_force_optimum(ex, 3, UNBOUNDED).value
    for cfg in (SolveConfig(tau_mode="explicit"), SolveConfig(ps_method=PsMethod.SHORTEST_PATH),
                SolveConfig(reduce=False), SolveConfig(reorder=False)):
        assert solve(ex, "pief", "pief", 3, UNBOUNDED, cfg).objective == want
        assert solve(ex, "eef", "eef-mtz", 3, UNBOUNDED, cfg).objective == want


def test_build_unknown_model(ex):
    with pytest.raises(ValueError):
        build(ex, "xyz", "cf", 3, 3)


def test_time_limit_validation():
    with pytest.raises(ValueError):
        SolveConfig(time_limit=0)


def test_solution_uses_original_labels():
    inst = appendix_example()
    out = solve(inst, "pief", "pief", 2, 3)
    assert [(c.ndd, c.rdps) for c in out.xs.chains] == [(5, (1, 4)), (6, (2, 3))]
