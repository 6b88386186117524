import math
import random
from fractions import Fraction

import pytest

from robpcount import (
    binary_alphabet,
    constant_program,
    counter_alphabet,
    evaluate,
    exact_counter,
    minimal_error,
    rounded_counter,
    rounded_counter_width_bound,
    rounding_plan,
    tribes,
    tribes_plan,
    validate,
    verify,
)
from robpcount.constructions import WidthBudgetError


def test_exact_counter_shape():
    p = exact_counter(3, 2)
    assert validate(p).layer_sizes == (1, 2, 3, 4)
    finals = {p.output_tuple(v) for v in range(4)}
    assert finals == {
        (Fraction(0), Fraction(3)),
        (Fraction(1), Fraction(2)),
        (Fraction(2), Fraction(1)),
        (Fraction(3), Fraction(0)),
    }


def test_exact_counter_final_width_three_symbols():
    p = exact_counter(4, 3)
    assert p.layer_sizes[-1] == 15  # compositions of 4 into 3 parts


def test_exact_counter_outputs_are_true_counts():
    rng = random.Random(2)
    for n, k in [(5, 2), (4, 3), (3, 4)]:
        p = exact_counter(n, k)
        for _ in range(40):
            x = [rng.randrange(k) for _ in range(n)]
            out, _ = evaluate(p, x)
            assert out == tuple(Fraction(x.count(j)) for j in range(k))


def test_exact_counter_verifies_at_zero():
    for n, k in [(5, 3), (8, 2), (6, 4)]:
        p = exact_counter(n, k)
        assert p.width == math.comb(n + k - 1, k - 1)
        assert verify(p, counter_alphabet(k), 0).valid


def test_exact_counter_width_budget():
    with pytest.raises(WidthBudgetError):
        exact_counter(100, 4, max_width=1000)


def test_constant_program_cases():
    p = constant_program(10, Fraction(5))
    delta, outputs = minimal_error(p, binary_alphabet())
    assert delta == 5 and outputs == [(Fraction(5),)]
    assert validate(constant_program(0, Fraction(0))).valid


def test_tribes_plan_layout():
    plan = tribes_plan(30, 3)
    assert plan.l == 3
    assert plan.breakpoints == (0, 10, 20, 30)
    assert plan.threshold == 1
    plan = tribes_plan(100, 4)
    assert plan.l == 5
    lens = [b - a for a, b in zip(plan.breakpoints, plan.breakpoints[1:])]
    assert sorted(lens) == [20, 20, 20, 20, 20]
    plan = tribes_plan(103, 4)
    lens = [b - a for a, b in zip(plan.breakpoints, plan.breakpoints[1:])]
    assert max(lens) - min(lens) == 1 and sum(lens) == 103


def test_tribes_preconditions():
    with pytest.raises(ValueError):
        tribes(20, 3)  # w > n/10
    with pytest.raises(ValueError):
        tribes(100, 2)


def test_tribes_computes_segment_thresholds():
    n, w = 30, 3
    p = tribes(n, w)
    plan = tribes_plan(n, w)
    accept = Fraction(n) / 2 + Fraction(plan.gap, 2)
    rng = random.Random(13)
    cases = [[1] * n, [0] * n]
    for _ in range(60):
        cases.append([rng.randrange(2) for _ in range(n)])
    # one 1 in every segment except the last
    x = [0] * n
    for a in plan.breakpoints[:-2]:
        x[a] = 1
    cases.append(x)
    for x in cases:
        expected = all(
            sum(x[a:b]) >= plan.threshold
            for a, b in zip(plan.breakpoints, plan.breakpoints[1:])
        )
        out, _ = evaluate(p, x)
        assert (out[0] == accept) == expected


def test_tribes_all_ones_hits_accept_value():
    p = tribes(40, 4)
    plan = tribes_plan(40, 4)
    out, _ = evaluate(p, [1] * 40)
    assert out == (Fraction(40, 2) + Fraction(plan.gap, 2),)
    out, _ = evaluate(p, [0] * 40)
    assert out == (Fraction(40, 2) - Fraction(plan.gap, 2),)


def test_tribes_width_and_verification_grid():
    for n, w in [(100, 4), (100, 10), (320, 5), (2000, 7), (1000, 3)]:
        p = tribes(n, w)
        rep = validate(p)
        assert rep.valid and rep.width <= w
        plan = tribes_plan(n, w)
        delta = Fraction(n) / 2 - Fraction(plan.gap, 2)
        assert verify(p, binary_alphabet(), delta).valid
        # the guarantee is at least as strong as n/2 - sqrt(nw)/20
        assert 100 * plan.gap * plan.gap >= n * w


def test_tribes_optimal_outputs_mode():
    p = tribes(100, 4, outputs="optimal")
    delta_star, _ = minimal_error(p, binary_alphabet())
    assert verify(p, binary_alphabet(), delta_star).valid
    symmetric = tribes(100, 4, outputs="symmetric")
    fixed_delta = Fraction(100, 2) - Fraction(tribes_plan(100, 4).gap, 2)
    assert verify(symmetric, binary_alphabet(), fixed_delta).valid
    assert delta_star <= fixed_delta


def test_rounding_plan_values():
    plan = rounding_plan(100, 2, 10)
    assert plan.l == 5 and plan.m == 29
    assert plan.target_sum == (plan.l - 1) * (100 - plan.m) // plan.l


def test_rounding_rule_brackets_and_sum():
    rng = random.Random(4)
    for k in (2, 3, 4):
        plan = rounding_plan(120 * k, k, 12)
        total = 120 * k - plan.m
        for _ in range(50):
            cuts = sorted(rng.randint(0, total) for _ in range(k - 1))
            a = tuple(b - a for a, b in zip([0] + cuts, cuts + [total]))
            b = plan.round_tuple(a)
            assert sum(b) == plan.target_sum
            for aj, bj in zip(a, b):
                scaled = Fraction(plan.l - 1, plan.l) * aj
                assert math.floor(scaled) <= bj <= math.ceil(scaled)


def test_rounded_counter_verifies():
    for n, k, delta in [(100, 2, 10), (100, 3, 10), (150, 2, Fraction(25, 2))]:
        p = rounded_counter(n, k, delta)
        rep = validate(p)
        assert rep.valid
        assert rep.width <= rounded_counter_width_bound(n, k, delta)
        cert = verify(p, counter_alphabet(k), delta)
        assert cert.valid
        plan = rounding_plan(n, k, delta)
        assert cert.max_halfwidth <= Fraction(plan.l + plan.m, plan.l - 1)


def test_rounded_counter_boundary_regime():
    # delta = 10 forces n >= 100 (the preconditions meet at delta = n/10)
    for k in (2, 3, 4):
        p = rounded_counter(100, k, 10)
        assert validate(p).valid
        assert verify(p, counter_alphabet(k), 10).valid


def test_rounded_counter_outputs_scaled():
    p = rounded_counter(100, 2, 10)
    plan = rounding_plan(100, 2, 10)
    x = [0] * 100
    out, _ = evaluate(p, x)
    # all-zero input: first counter saturates, outputs are l/(l-1) * tuple
    assert out[0].denominator in (1, plan.l - 1)
    assert out[0] + out[1] == Fraction(plan.l, plan.l - 1) * (plan.target_sum + plan.m)


def test_rounded_counter_error_chain_sampled_inputs():
    # direct input-level check, independent of the label-based verifier
    n, k, delta = 100, 3, 10
    p = rounded_counter(n, k, delta)
    rng = random.Random(8)
    cases = [[0] * n, [k - 1] * n, [i % k for i in range(n)]]
    for _ in range(200):
        cases.append([rng.randrange(k) for _ in range(n)])
    for x in cases:
        out, _ = evaluate(p, x)
        for j in range(k):
            assert abs(out[j] - x.count(j)) <= delta


def test_rounded_counter_preconditions():
    with pytest.raises(ValueError):
        rounded_counter(100, 2, 5)  # delta < 10
    with pytest.raises(ValueError):
        rounded_counter(100, 2, 11)  # delta > n/10
    with pytest.raises(ValueError):
        rounded_counter(15, 2, 10)  # n < 10k


def test_exact_roundtrip_serialization():
    from robpcount import read_robp, write_robp

    for n, k in [(6, 2), (4, 3)]:
        p = exact_counter(n, k)
        assert read_robp(write_robp(p)) == p
