"""Skew-shift orbits, tower identities, factorization routes, multiple averages."""

import math
from fractions import Fraction

import numpy as np
import pytest

from oscillab.polyphase import PhasePolynomial, phase_at, phase_stream, unit_values
from oscillab.sequences import ComplexSequence, rademacher_sequence
from oscillab.torus import (
    CharacterObservable,
    QuasiEigenTower,
    SkewShiftSystem,
    TimePolynomial,
    build_tower,
    multiple_ergodic_average,
    orbit_point,
    tower_phase_polynomial,
    tower_product,
    tower_thetas,
    verify_factorization,
)

GOLDEN = (math.sqrt(5) - 1) / 2


def circular_distance(a: float, b: float) -> float:
    delta = abs(a - b) % 1.0
    return min(delta, 1.0 - delta)


def random_tower(rng, max_dim=4):
    m = int(rng.integers(1, max_dim + 1))
    system = SkewShiftSystem(m, GOLDEN)
    freqs = [int(v) for v in rng.integers(-3, 4, m)]
    if not any(freqs):
        freqs[-1] = 1
    return system, build_tower(system, CharacterObservable(tuple(freqs)))


def test_orbit_identity_at_zero():
    system = SkewShiftSystem(3, 0.37)
    x = (0.1, 0.2, 0.3)
    assert orbit_point(system, x, 0) == x


def test_orbit_circle_rotation():
    system = SkewShiftSystem(1, 0.125)
    for n in range(20):
        assert orbit_point(system, (0.5,), n)[0] == pytest.approx(
            (0.5 + n * 0.125) % 1.0, abs=1e-12
        )


def test_orbit_hand_iterated_example():
    system = SkewShiftSystem(2, 0.1)
    x = (0.25, 0.5)
    expected = x
    for _ in range(4):
        expected = system.step(expected)
    got = orbit_point(system, x, 4)
    assert got[0] == pytest.approx(0.65, abs=1e-12)
    assert got[1] == pytest.approx(0.10, abs=1e-12)
    assert got[0] == pytest.approx(expected[0], abs=1e-9)
    assert got[1] == pytest.approx(expected[1], abs=1e-9)


def exact_step(alpha, point):
    """One-step map in rational arithmetic (drift-free iteration oracle)."""
    new = [(point[0] + alpha) % 1]
    for j in range(1, len(point)):
        new.append((point[j] + point[j - 1]) % 1)
    return tuple(new)


def test_orbit_closed_form_matches_iteration():
    rng = np.random.default_rng(3)
    for _ in range(10):
        m = int(rng.integers(1, 5))
        alpha = float(rng.random())
        system = SkewShiftSystem(m, alpha)
        x = tuple(float(v) for v in rng.random(m))
        point = tuple(Fraction(c) for c in x)
        alpha_f = Fraction(alpha)
        for n in range(1, 1001):
            point = exact_step(alpha_f, point)
            if n % 125 == 0:
                closed = orbit_point(system, x, n)
                for a, b in zip(closed, point):
                    delta = abs(a - float(b)) % 1.0
                    assert min(delta, 1 - delta) <= 1e-9


def test_build_tower_second_coordinate_character():
    system = SkewShiftSystem(2, 0.1)
    tower = build_tower(system, CharacterObservable((0, 1)))
    assert tower.order == 2
    assert tower.levels[2].frequencies == (0, 1)
    assert tower.levels[1].frequencies == (1, 0)
    assert tower.levels[1].constant_phase == 0
    assert tower.levels[0].frequencies == (0, 0)
    assert tower.levels[0].constant_phase == Fraction(0.1)
    assert tower.is_valid()


def test_build_tower_eigenfunction_case():
    system = SkewShiftSystem(2, 0.3)
    tower = build_tower(system, CharacterObservable((1, 0)))
    assert tower.order == 1
    # eigenvalue level: constant phase alpha
    assert tower.levels[0].constant_phase == Fraction(0.3)


def test_build_tower_order_three():
    system = SkewShiftSystem(3, 0.2)
    tower = build_tower(system, CharacterObservable((0, 0, 1)))
    assert tower.order == 3


def test_build_tower_rejects_zero_vector():
    system = SkewShiftSystem(2, 0.1)
    with pytest.raises(ValueError):
        build_tower(system, CharacterObservable((0, 0)))
    const = QuasiEigenTower.constant(system, 0.25)
    assert const.order == 0


def test_tower_identities_hold_for_random_towers():
    rng = np.random.default_rng(5)
    for _ in range(50):
        _, tower = random_tower(rng)
        assert tower.is_valid()


def test_tower_phase_polynomial_example():
    system = SkewShiftSystem(2, 0.1)
    tower = build_tower(system, CharacterObservable((0, 1)))
    x = (0.25, 0.5)
    thetas = tower_thetas(tower, x)
    assert [float(t) for t in thetas] == [0.1, 0.25, 0.5]
    q = tower_phase_polynomial(tower, x)
    assert phase_at(q, 4) == pytest.approx(0.1, abs=1e-12)
    for n in range(12):
        direct = (0.1 * math.comb(n, 2) + 0.25 * n + 0.5) % 1.0
        assert circular_distance(phase_at(q, n), direct) <= 1e-12


def test_tower_phase_polynomial_at_origin():
    system = SkewShiftSystem(3, 0.2)
    tower = build_tower(system, CharacterObservable((0, 0, 1)))
    q = tower_phase_polynomial(tower, (0.0, 0.0, 0.0))
    for n in range(20):
        assert circular_distance(phase_at(q, n), (0.2 * math.comb(n, 3)) % 1.0) <= 1e-12


def test_tower_phase_polynomial_rotation():
    system = SkewShiftSystem(1, 0.3)
    tower = build_tower(system, CharacterObservable((1,)))
    q = tower_phase_polynomial(tower, (0.6,))
    assert q.degree <= 1
    for n in range(10):
        assert circular_distance(phase_at(q, n), (0.3 * n + 0.6) % 1.0) <= 1e-12


def test_verify_factorization_sharp():
    system = SkewShiftSystem(2, 0.1)
    tower = build_tower(system, CharacterObservable((0, 1)))
    assert verify_factorization(tower, (0.25, 0.5), 1000) <= 1e-9


def test_verify_factorization_random_towers():
    rng = np.random.default_rng(7)
    for _ in range(20):
        system, tower = random_tower(rng)
        x = tuple(float(v) for v in rng.random(system.dimension))
        assert verify_factorization(tower, x, 300) <= 1e-9


def test_tower_product_group_closure():
    rng = np.random.default_rng(11)
    for _ in range(200):
        m = int(rng.integers(1, 5))
        system = SkewShiftSystem(m, GOLDEN)
        freqs = []
        for _ in range(2):
            f = [int(v) for v in rng.integers(-3, 4, m)]
            if not any(f):
                f[-1] = 1
            freqs.append(tuple(f))
        t1 = build_tower(system, CharacterObservable(freqs[0]))
        t2 = build_tower(system, CharacterObservable(freqs[1]))
        product = tower_product(t1, t2)
        assert product.is_valid()
        assert product.order <= max(t1.order, t2.order)
        assert product.top.frequencies == tuple(
            a + b for a, b in zip(freqs[0], freqs[1])
        )


def test_tower_product_evaluates_to_product():
    system = SkewShiftSystem(3, GOLDEN)
    t1 = build_tower(system, CharacterObservable((1, 2, 0)))
    t2 = build_tower(system, CharacterObservable((0, -1, 1)))
    product = tower_product(t1, t2)
    x = (0.12, 0.34, 0.56)
    p1 = tower_phase_polynomial(t1, x)
    p2 = tower_phase_polynomial(t2, x)
    pp = tower_phase_polynomial(product, x)
    for n in range(50):
        combined = (phase_at(p1, n) + phase_at(p2, n)) % 1.0
        delta = abs(phase_at(pp, n) - combined) % 1.0
        assert min(delta, 1 - delta) <= 1e-12


def test_time_polynomial_basics():
    q = TimePolynomial((0, 1, 2))  # n^2
    assert q.degree == 2
    assert [q(n) for n in range(6)] == [0, 1, 4, 9, 16, 25]
    cubed = TimePolynomial.from_power(3)
    assert [cubed(n) for n in range(5)] == [0, 1, 8, 27, 64]
    assert TimePolynomial.from_power(0)(17) == 1


def test_time_polynomial_negativity_detection():
    # q(n) = C(n,1) - 3 = n - 3 dips below zero for n < 3
    q = TimePolynomial((-3, 1))
    assert q.first_negative_on_range(10) == 0
    assert TimePolynomial((0, 1)).first_negative_on_range(100) is None
    # (n - 5)^2 - 1 is negative exactly at n in {4, 5, 6} ... check root localization
    shifted = TimePolynomial((24, -9, 2))  # expands to n^2 - 10n + 24 = (n-4)(n-6)
    assert [shifted(n) for n in range(8)] == [24, 15, 8, 3, 0, -1, 0, 3]
    assert shifted.first_negative_on_range(100) == 5


def test_multiple_average_trivial_tensor():
    system = SkewShiftSystem(2, GOLDEN)
    ones = ComplexSequence(np.ones(500), "ones")
    zero_char = CharacterObservable((0, 0))
    series = multiple_ergodic_average(
        system, [zero_char], [TimePolynomial.from_power(1)], (0.1, 0.2), ones, [500]
    )
    assert series.averages[0] == pytest.approx(1.0, abs=1e-12)


def test_multiple_average_reverse_cancellation():
    """Weights chosen as the conjugate composite phase collapse to 1."""
    system = SkewShiftSystem(2, GOLDEN)
    x = (0.25, 0.5)
    chars = [CharacterObservable((0, 1)), CharacterObservable((0, 1))]
    qs = [TimePolynomial.from_power(1), TimePolynomial.from_power(2)]
    from oscillab.polyphase import compose_time_polynomial
    from oscillab.torus import build_tower as bt

    total = PhasePolynomial.zero()
    for char, q in zip(chars, qs):
        tower = bt(system, char)
        total = total + compose_time_polynomial(
            tower_phase_polynomial(tower, x), q
        )
    n = 5000
    conj_weights = np.conj(unit_values(phase_stream(total, n)))
    seq = ComplexSequence(conj_weights, "conjugate-phase")
    series = multiple_ergodic_average(system, chars, qs, x, seq, [n])
    assert abs(series.averages[0] - 1.0) <= 1e-6


def test_multiple_average_random_weights_scale():
    system = SkewShiftSystem(2, GOLDEN)
    chars = [CharacterObservable((0, 1)), CharacterObservable((0, 1))]
    qs = [TimePolynomial.from_power(1), TimePolynomial.from_power(2)]
    seq = rademacher_sequence(1, 10**5)
    series = multiple_ergodic_average(
        system, chars, qs, (0.25, 0.5), seq, [10**5]
    )
    assert abs(series.averages[0]) <= 0.05


def test_multiple_average_matches_literal_iteration():
    system = SkewShiftSystem(2, GOLDEN)
    chars = [CharacterObservable((1, 1)), CharacterObservable((0, 2))]
    qs = [TimePolynomial.from_power(1), TimePolynomial.from_power(2)]
    x = (0.3, 0.7)
    n = 150
    seq = rademacher_sequence(9, n)
    series = multiple_ergodic_average(system, chars, qs, x, seq, [n])
    total = 0.0
    for i in range(n):
        pa, pb = x, x
        for _ in range(qs[0](i)):
            pa = system.step(pa)
        for _ in range(qs[1](i)):
            pb = system.step(pb)
        total += seq.values[i] * chars[0].evaluate(pa) * chars[1].evaluate(pb)
    assert abs(total / n - series.averages[0]) <= 1e-6


def test_multiple_average_rejects_negative_times():
    system = SkewShiftSystem(2, GOLDEN)
    chars = [CharacterObservable((0, 1))]
    qs = [TimePolynomial((-3, 1))]
    seq = rademacher_sequence(2, 100)
    with pytest.raises(ValueError) as err:
        multiple_ergodic_average(system, chars, qs, (0.1, 0.2), seq, [100])
    assert "n = 0" in str(err.value)


def test_composed_degree_law():
    system = SkewShiftSystem(3, GOLDEN)
    from oscillab.polyphase import compose_time_polynomial

    tower = build_tower(system, CharacterObservable((0, 0, 1)))
    q_phase = tower_phase_polynomial(tower, (0.1, 0.2, 0.3))
    for power in (1, 2):
        q = TimePolynomial.from_power(power)
        composed = compose_time_polynomial(q_phase, q)
        assert composed.degree == tower.order * q.degree


def test_boundedness_by_cesaro_with_unit_observables():
    system = SkewShiftSystem(2, GOLDEN)
    chars = [CharacterObservable((1, 1))]
    qs = [TimePolynomial.from_power(2)]
    rng = np.random.default_rng(17)
    values = rng.normal(size=2000)
    seq = ComplexSequence(values, "gaussian")
    series = multiple_ergodic_average(system, chars, qs, (0.4, 0.9), seq, [500, 2000])
    for checkpoint, avg in zip(series.checkpoints, series.averages):
        bound = np.abs(values[:checkpoint]).sum() / checkpoint
        assert abs(avg) <= bound + 1e-12
