import itertools
import random
from fractions import Fraction

import pytest

from robpcount import (
    IntervalSystem,
    minimal_error,
    binary_alphabet,
    constant_program,
    counter_alphabet,
    evaluate,
    exact_counter,
    exhaustive_verify,
    frontier,
    frontier_brute_force,
    lb_small_w,
    parallel_alphabet,
    random_robp,
    system_to_robp,
    thm_main_feasible,
    validate,
    verify,
)
from robpcount.oracle import BudgetError


def test_exhaustive_verify_examples():
    assert exhaustive_verify(exact_counter(4, 2), counter_alphabet(2), 0)
    assert not exhaustive_verify(
        constant_program(4, Fraction(1)), binary_alphabet(), 1
    )
    assert exhaustive_verify(constant_program(4, Fraction(2)), binary_alphabet(), 2)


def test_exhaustive_verify_budget():
    p = constant_program(30, Fraction(15))
    with pytest.raises(BudgetError):
        exhaustive_verify(p, binary_alphabet(), 15, max_inputs=1000)


def test_random_robp_deterministic():
    a = random_robp(5, binary_alphabet(), 3, 1)
    b = random_robp(5, binary_alphabet(), 3, 1)
    assert a == b
    c = random_robp(5, binary_alphabet(), 3, 2)
    assert a != c


def test_random_robp_always_valid():
    rng = random.Random(0)
    for seed in range(300):
        alphabet = [binary_alphabet(), counter_alphabet(3), parallel_alphabet(2)][seed % 3]
        n, w = rng.randint(0, 9), rng.randint(1, 5)
        p = random_robp(n, alphabet, w, seed)
        rep = validate(p)
        assert rep.valid, (seed, rep.violations[:3])
        assert rep.width <= w


def test_frontier_base_cases():
    assert frontier(2, 2).delta_star == Fraction(1, 2)
    for n in range(1, 11):
        assert frontier(n, 1).delta_star == Fraction(n, 2)
    assert frontier(3, 4).delta_star == 0  # w = n+1: all-singleton system
    assert frontier(4, 4).delta_star == Fraction(1, 2)  # one merge forced


def test_frontier_budget_guard():
    with pytest.raises(BudgetError):
        frontier(50, 2)


def test_frontier_witness_is_sound():
    for n, w in [(2, 2), (5, 2), (6, 3), (8, 3)]:
        point = frontier(n, w)
        point.witness.check()
        assert point.witness.max_final_length == 2 * point.delta_star
        p = system_to_robp(point.witness)
        rep = validate(p)
        assert rep.valid and rep.width <= w
        assert verify(p, binary_alphabet(), point.delta_star).valid


def test_frontier_monotonicity():
    values = {(n, w): frontier(n, w).delta_star for n in range(1, 9) for w in (1, 2, 3)}
    for n in range(1, 9):
        for w in (1, 2):
            assert values[(n, w)] >= values[(n, w + 1)]
    for n in range(1, 8):
        for w in (1, 2, 3):
            assert values[(n + 1, w)] >= values[(n, w)]


def test_frontier_matches_brute_force_tiny():
    for n in range(1, 5):
        for w in (1, 2):
            assert frontier(n, w).delta_star == frontier_brute_force(n, w)


def enumerate_all_programs_delta(n, w):
    """Direct product enumeration over every edge map (tiny sizes only)."""
    best = Fraction(n, 2) + 1
    size_options = list(range(1, w + 1))
    for sizes in itertools.product(size_options, repeat=n):
        layer_sizes = [1] + list(sizes)
        maps_per_layer = []
        for t in range(n):
            a, b = layer_sizes[t], layer_sizes[t + 1]
            maps_per_layer.append(
                [m for m in itertools.product(range(b), repeat=2 * a)
                 if len(set(m)) == b]
            )
        for combo in itertools.product(*maps_per_layer):
            labels = [(0, 0)]
            ok = True
            for t in range(n):
                nxt = [None] * layer_sizes[t + 1]
                for u in range(layer_sizes[t]):
                    for z in (0, 1):
                        tgt = combo[t][2 * u + z]
                        lo, hi = labels[u][0] + z, labels[u][1] + z
                        if nxt[tgt] is None:
                            nxt[tgt] = (lo, hi)
                        else:
                            nxt[tgt] = (min(nxt[tgt][0], lo), max(nxt[tgt][1], hi))
                labels = nxt
            best = min(best, Fraction(max(b - a for a, b in labels), 2))
    return best


def test_brute_force_matches_product_enumeration():
    for n in range(1, 4):
        for w in (1, 2):
            assert frontier_brute_force(n, w) == enumerate_all_programs_delta(n, w)


def test_frontier_consistent_with_feasibility():
    for n in range(1, 9):
        for w in (1, 2, 3):
            delta = frontier(n, w).delta_star
            assert not thm_main_feasible(n, 2, w, delta).ruled_out
            if w >= 3:
                assert lb_small_w(n, 2, w) <= delta


def test_system_to_robp_width_one():
    layers = tuple(((0, t),) for t in range(5))
    sys_ = IntervalSystem(
        n=4,
        layers=layers,
        witness0=((0,),) * 4,
        witness1=((0,),) * 4,
    )
    p = system_to_robp(sys_)
    q = constant_program(4, Fraction(2))
    assert p == q


def test_system_to_robp_exact_counter():
    n = 3
    layers = tuple(tuple((i, i) for i in range(t + 1)) for t in range(n + 1))
    w0 = tuple(tuple(range(t + 1)) for t in range(n))
    w1 = tuple(tuple(range(1, t + 2)) for t in range(n))
    p = system_to_robp(IntervalSystem(n=n, layers=layers, witness0=w0, witness1=w1))
    assert validate(p).valid
    for x in itertools.product((0, 1), repeat=n):
        out, _ = evaluate(p, x)
        assert out == (Fraction(sum(x)),)


def test_interval_system_check_rejects():
    bad = IntervalSystem(
        n=1,
        layers=(((0, 0),), ((0, 0),)),
        witness0=((0,),),
        witness1=((0,),),  # [1,1] not inside [0,0]
    )
    with pytest.raises(ValueError, match="obligation"):
        bad.check()
    not_antichain = IntervalSystem(
        n=0,
        layers=(((0, 0),),),
        witness0=(),
        witness1=(),
    )
    not_antichain.check()  # single layer, fine
    with pytest.raises(ValueError):
        IntervalSystem(
            n=0, layers=(((0, 1),),), witness0=(), witness1=()
        ).check()  # layer-0 must be [0,0]


def test_no_random_program_beats_the_frontier():
    rng = random.Random(23)
    best = {}
    for seed in range(400):
        n, w = rng.randint(1, 8), rng.randint(1, 3)
        p = random_robp(n, binary_alphabet(), w, seed)
        delta_star, _ = minimal_error(p, binary_alphabet())
        key = (n, p.width)
        best[key] = min(best.get(key, delta_star), delta_star)
    for (n, w), delta in best.items():
        assert delta >= frontier(n, w).delta_star, (n, w)


def test_verifier_agrees_with_exhaustive_on_systems():
    rng = random.Random(19)
    for seed in range(20):
        n, w = rng.randint(2, 7), rng.randint(1, 3)
        point = frontier(n, w)
        p = system_to_robp(point.witness)
        assert exhaustive_verify(p, binary_alphabet(), point.delta_star)
