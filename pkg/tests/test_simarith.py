from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radixlab.numsys import (
    Overflow, SystemSpec, fl, log_round, log_value, standard_systems, system_by_name,
)
from radixlab.refarith import REF, DivideByZero, DomainError, as_fraction, ref_add, ref_div, ref_mul, ref_sqrt, ref_sub
from radixlab.simarith import (
    FpContext, LogContext, RefContext, context_for, sim_abs, sim_add, sim_cmp, sim_div,
    sim_mul, sim_neg, sim_sqrt, sim_sub,
)
from radixlab.theory import eps_worst

CONTEXTS = [context_for(spec, name) for name, spec in standard_systems()]
FP_CONTEXTS = [c for c in CONTEXTS if isinstance(c, FpContext)]
S0 = LogContext(system_by_name("S0"))

moderate = st.floats(min_value=1e-6, max_value=1e6).flatmap(
    lambda m: st.sampled_from([m, -m]))


def test_log_multiplication_exact_on_many_pairs():
    rng = np.random.default_rng(1)
    lam1 = rng.integers(1 << 29, 3 << 29, 10**6) * rng.choice([-1, 1], 10**6)
    lam2 = rng.integers(1 << 29, 3 << 29, 10**6) * rng.choice([-1, 1], 10**6)
    b = S0.spec.b
    prod = S0.mul(lam1, lam2)
    want = np.sign(lam1) * np.sign(lam2) * (np.abs(lam1) + np.abs(lam2) - b)
    np.testing.assert_array_equal(prod, want)
    quo = S0.div(lam1, lam2)
    want = np.sign(lam1) * np.sign(lam2) * (np.abs(lam1) - np.abs(lam2) + b)
    np.testing.assert_array_equal(quo, want)


def test_log_multiplication_scalar():
    x, y = S0.const(3.0), S0.const(0.1)
    assert sim_mul(S0, x, y) == x + y - S0.spec.b


def test_log_addition_rounds_reference_sum():
    x, y = S0.const(1.0), S0.const(2.0)
    s = sim_add(S0, x, y)
    assert s == log_round(S0.spec, REF(3))
    assert S0.value(s) == pytest.approx(3.0, rel=1e-6)


def test_s1_addition_absorbs_tiny_term():
    ctx = context_for(system_by_name("S1"))
    one = ctx.const(1)
    tiny = ctx.const(2.0**-30)
    assert sim_add(ctx, one, tiny) == 1


@pytest.mark.parametrize("ctx", CONTEXTS, ids=lambda c: c.name)
def test_x_over_x_is_one(ctx):
    for x in (0.3, -7.25, 1e-5, 255.9):
        v = ctx.const(x)
        assert ctx.value(sim_div(ctx, v, v)) == 1


@pytest.mark.parametrize("ctx", CONTEXTS, ids=lambda c: c.name)
def test_errors_propagate(ctx):
    with pytest.raises(DivideByZero):
        sim_div(ctx, ctx.const(1), ctx.zero)
    with pytest.raises(DomainError):
        sim_sqrt(ctx, ctx.const(-4))
    big = ctx.const(2.0**200)
    with pytest.raises(Overflow):
        sim_mul(ctx, big, big)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(FP_CONTEXTS), moderate, moderate)
def test_single_operation_error_bound(ctx, a, b):
    x, y = ctx.const(a), ctx.const(b)
    eps = Fraction(eps_worst(ctx.spec.k, ctx.spec.u, ctx.spec.mode))
    qx, qy = as_fraction(x), as_fraction(y)
    for op, exact in ((sim_add, qx + qy), (sim_sub, qx - qy), (sim_mul, qx * qy),
                      (sim_div, qx / qy)):
        got = as_fraction(op(ctx, x, y))
        assert abs(got - exact) <= eps * abs(exact)
    root = as_fraction(sim_sqrt(ctx, sim_abs(ctx, x)))
    assert abs(root**2 - abs(qx)) <= 3 * eps * abs(qx)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(FP_CONTEXTS), moderate, moderate)
def test_result_is_fl_of_reference_result(ctx, a, b):
    x, y = ctx.const(a), ctx.const(b)
    assert as_fraction(sim_mul(ctx, x, y)) == fl(ctx.spec, ref_mul(x, y)).as_fraction()
    assert as_fraction(sim_add(ctx, x, y)) == fl(ctx.spec, ref_add(x, y)).as_fraction()


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(CONTEXTS), moderate, moderate)
def test_commutative(ctx, a, b):
    x, y = ctx.const(a), ctx.const(b)
    assert sim_add(ctx, x, y) == sim_add(ctx, y, x)
    assert sim_mul(ctx, x, y) == sim_mul(ctx, y, x)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(CONTEXTS), moderate, moderate)
def test_exact_operations(ctx, a, b):
    x, y = ctx.const(a), ctx.const(b)
    assert ctx.value(sim_neg(ctx, x)) == -ctx.value(x)
    assert ctx.value(sim_abs(ctx, x)) == abs(ctx.value(x))
    vx, vy = ctx.value(x), ctx.value(y)
    assert sim_cmp(ctx, x, y) == int(vx > vy) - int(vx < vy)


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e30, 1e30), st.floats(-1e30, 1e30).filter(lambda v: v != 0))
def test_ref_context_is_reference_arithmetic(a, b):
    ctx = RefContext()
    x, y = REF(a) / 3, REF(b)
    assert sim_add(ctx, x, y) == ref_add(x, y)
    assert sim_sub(ctx, x, y) == ref_sub(x, y)
    assert sim_mul(ctx, x, y) == ref_mul(x, y)
    assert sim_div(ctx, x, y) == ref_div(x, y)
    assert sim_sqrt(ctx, abs(x)) == ref_sqrt(abs(x))


@pytest.mark.parametrize("ctx", CONTEXTS, ids=lambda c: c.name)
def test_array_and_scalar_paths_agree(ctx):
    rng = np.random.default_rng(4)
    a = rng.uniform(-100, 100, 300).astype(REF)
    b = rng.uniform(-100, 100, 300).astype(REF)
    x, y = ctx.round(a), ctx.round(b)
    for op in (ctx.add, ctx.sub, ctx.mul, ctx.div):
        vec = op(x, y)
        scal = [op(xi if isinstance(ctx, FpContext) else int(xi),
                   yi if isinstance(ctx, FpContext) else int(yi)) for xi, yi in zip(x, y)]
        np.testing.assert_array_equal(vec, np.array(scal, dtype=vec.dtype))


def test_truncating_products_within_twice_eps():
    ctx = FpContext(SystemSpec(k=4, u=24, e_min=-64, e_max=64, mode="trunc"))
    rng = np.random.default_rng(6)
    x = ctx.round(rng.uniform(0.5, 2, 10**5).astype(REF))
    y = ctx.round(rng.uniform(0.5, 2, 10**5).astype(REF))
    exact = x * y                      # exact: 48-bit product in a 64-bit significand
    rel = np.abs((ctx.mul(x, y) - exact) / exact).astype(np.float64)
    assert rel.max() <= 2.0**-20
    assert np.all(np.abs(ctx.mul(x, y)) <= np.abs(exact))


def test_log_value_codes_sorted_like_values():
    lam = np.array([-5 << 28, -1 << 28, 0, 1 << 28, 5 << 28])
    vals = log_value(S0.spec, lam)
    assert np.all(np.diff(vals) > 0)
