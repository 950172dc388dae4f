import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mdpkit.dist import (
    Dist,
    Kernel,
    bind,
    close,
    compact,
    expectation,
    kleisli_compose,
    kleisli_iterate,
    ret,
    ret_kernel,
)
from mdpkit.envs import SplitMix64, random_dist, random_kernel

from helpers import dense, dense_kernel, dists, kernels


def test_ret_is_point_mass():
    p = ret(2, 5)
    assert [p.prob(i) for i in range(5)] == [0, 0, 1, 0, 0]


def test_ret_out_of_range():
    with pytest.raises(ValueError):
        ret(5, 5)


def test_expectation_of_point_mass():
    f = [3.0, -1.0, 7.5, 2.0, 0.0]
    assert expectation(ret(2, 5), f) == 7.5
    assert expectation(ret(2, 5), lambda s: s * s) == 4.0


def test_bind_of_ret_is_kernel_value():
    f = lambda a: Dist([(0.2, 1), (0.8, 2)], 3)
    assert compact(bind(ret(0, 3), f)) == compact(f(0))


def test_bind_routes_all_mass_to_one_point():
    p = Dist.uniform(2)
    out = compact(bind(p, lambda a: ret(0, 2)))
    assert out.entries == ((1.0, 0),)


def test_bind_hand_example():
    p = Dist([(0.5, 0), (0.5, 1)], 2)
    k = Kernel([Dist([(0.5, 0), (0.5, 1)], 2), Dist([(1.0, 1)], 2)])
    out = bind(p, k)
    # 0.5*0.5 = 0.25 at 0; 0.5*0.5 + 0.5*1 = 0.75 at 1
    assert np.allclose(out.to_array(), [0.25, 0.75], atol=1e-15, rtol=0)
    assert np.allclose(out.to_array(), dense(p) @ dense_kernel(k), atol=1e-15, rtol=0)


def test_bind_with_ret_is_identity():
    p = Dist([(0.3, 2), (0.1, 0), (0.6, 2)], 4)
    assert compact(bind(p, lambda x: ret(x, 4))) == compact(p)


def test_bind_rejects_mixed_codomain():
    p = Dist.uniform(2)
    with pytest.raises(ValueError):
        bind(p, lambda a: ret(0, 2) if a == 0 else ret(0, 3))


def test_bind_rejects_kernel_domain_mismatch():
    with pytest.raises(ValueError):
        bind(Dist.uniform(3), ret_kernel(2))


@pytest.mark.parametrize(
    "entries, n",
    [
        ([(-0.1, 0), (1.1, 1)], 2),
        ([(0.5, 0), (0.49, 1)], 2),
        ([(1.0, 3)], 3),
        ([(float("nan"), 0)], 1),
    ],
)
def test_invalid_dist_rejected(entries, n):
    with pytest.raises(ValueError):
        Dist(entries, n)


def test_dist_sum_tolerance():
    Dist([(0.5, 0), (0.5 + 5e-10, 1)], 2)
    with pytest.raises(ValueError):
        Dist([(0.5, 0), (0.5 + 5e-9, 1)], 2)


def test_single_outcome_set():
    p = ret(0, 1)
    assert bind(p, ret_kernel(1)) == p


def test_compact_merges_and_sorts():
    out = compact(Dist([(0.3, 1), (0.3, 1), (0.4, 0)], 2))
    assert out.entries == ((0.4, 0), (0.3 + 0.3, 1))


def test_compact_canonical_unchanged():
    p = Dist([(0.25, 0), (0.75, 3)], 4)
    assert compact(p) == p


def test_compact_drops_zero_weights():
    assert compact(Dist([(0.0, 0), (1.0, 1)], 2)).entries == ((1.0, 1),)


@given(dists(), st.data())
def test_compact_idempotent_on_bind_outputs(p, data):
    k = data.draw(kernels(p.n, data.draw(st.integers(1, 6))))
    x = bind(p, k)
    assert compact(compact(x)) == compact(x)
    assert abs(sum(w for w, _ in x.entries) - 1.0) <= 1e-9


def test_compose_permutations():
    f = Kernel([ret(1, 3), ret(2, 3), ret(0, 3)])
    g = Kernel([ret(2, 3), ret(0, 3), ret(1, 3)])
    h = kleisli_compose(f, g)
    assert [h(x) for x in range(3)] == [ret(0, 3), ret(1, 3), ret(2, 3)]


def test_compose_random_matches_matrix_product():
    rng = SplitMix64(7)
    f, g = random_kernel(rng, 3), random_kernel(rng, 3)
    got = kleisli_compose(f, g).to_matrix()
    assert np.max(np.abs(got - dense_kernel(f) @ dense_kernel(g))) <= 1e-12


def test_compose_with_ret_kernel():
    f = random_kernel(11, 4)
    h = kleisli_compose(f, ret_kernel(4))
    assert all(close(h(x), f(x)) for x in range(4))


def test_compose_rectangular_and_mismatch():
    f = random_kernel(3, 2, 5)
    g = random_kernel(4, 5, 3)
    h = kleisli_compose(f, g)
    assert (h.n_in, h.n_out) == (2, 3)
    with pytest.raises(ValueError):
        kleisli_compose(g, f)


def test_iterate_zero_steps():
    p0 = random_dist(5, 4)
    assert kleisli_iterate(p0, random_kernel(6, 4), 0) is p0


def test_iterate_three_cycle():
    cycle = Kernel([ret(1, 3), ret(2, 3), ret(0, 3)])
    assert kleisli_iterate(ret(0, 3), cycle, 3) == ret(0, 3)


def test_iterate_one_step_is_bind():
    p0, k = random_dist(1, 4), random_kernel(2, 4)
    assert close(kleisli_iterate(p0, k, 1), compact(bind(p0, k)))


def test_iterate_matches_matrix_power():
    rng = SplitMix64(42)
    p0, k = random_dist(rng, 4), random_kernel(rng, 4)
    expected = dense(p0) @ np.linalg.matrix_power(dense_kernel(k), 5)
    assert np.max(np.abs(kleisli_iterate(p0, k, 5).to_array() - expected)) <= 1e-12


def test_iterate_negative():
    with pytest.raises(ValueError):
        kleisli_iterate(ret(0, 1), ret_kernel(1), -1)


def test_expectation_examples():
    assert expectation(ret(1, 3), float) == 1.0
    assert expectation(Dist.uniform(4), float) == 1.5
    rng = SplitMix64(3)
    p = random_dist(rng, 6)
    f = np.array([rng.uniform(-5, 5) for _ in range(6)])
    assert abs(expectation(p, f) - float(dense(p) @ f)) <= 1e-12


@given(st.integers(0, 7), st.integers(1, 8), st.data())
def test_left_identity(a, n, data):
    a = a % n
    k = data.draw(kernels(n, data.draw(st.integers(1, 8))))
    assert close(compact(bind(ret(a, n), k)), compact(k(a)))


@given(dists())
def test_right_identity(p):
    assert close(compact(bind(p, ret_kernel(p.n))), compact(p))


@given(dists(), st.data())
def test_associativity(p, data):
    m = data.draw(st.integers(1, 8))
    f = data.draw(kernels(p.n, m))
    g = data.draw(kernels(m, data.draw(st.integers(1, 8))))
    lhs = bind(bind(p, f), g)
    rhs = bind(p, lambda x: bind(f(x), g))
    assert close(compact(lhs), compact(rhs))


def test_dist_is_hashable_and_immutable():
    p = ret(0, 2)
    assert {p: 1}[ret(0, 2)] == 1
    with pytest.raises(AttributeError):
        p._n = 3
