import itertools

import numpy as np
import pytest

from freesym.cumulants import (
    CumulantTable,
    MomentTable,
    classical_cumulants_to_moments,
    eval_partitioned_classical,
    eval_partitioned_free,
    free_cumulants_to_moments,
    joint_moment_tensor,
    joint_moments_free_family,
    moments_to_classical_cumulants,
    moments_to_free_cumulants,
    multivariate_cumulants_from_joint_moments,
    random_cumulant_table,
)
from freesym.errors import (
    CrossingPartitionError,
    IncompleteTableError,
    OrderBoundError,
    SizeLimitError,
    UnsupportedAlgebraError,
)
from freesym.partitions import Partition, StarPattern, enumerate_noncrossing


def selfadjoint_moments(values, order):
    # a self-adjoint variable has pattern-independent moments
    t = MomentTable(order=order)
    for k in range(1, order + 1):
        for d in StarPattern.all_patterns(k):
            t.set(d, values[k - 1])
    return t


def selfadjoint_cumulants(values, order):
    t = CumulantTable(order=order)
    for k in range(1, order + 1):
        if values[k - 1] == 0:
            continue
        for d in StarPattern.all_patterns(k):
            t.set(d, values[k - 1])
    return t


def test_free_fourth_cumulant_formula():
    m1, m2, m3, m4 = 0.3, 0.7, 0.2, 1.1
    table = selfadjoint_moments([m1, m2, m3, m4], 4)
    kappa = moments_to_free_cumulants(table, 4)
    expected = m4 - 4 * m3 * m1 - 2 * m2 ** 2 + 10 * m2 * m1 ** 2 - 5 * m1 ** 4
    assert abs(kappa.get("1111") - expected) < 1e-12
    assert abs(kappa.get("1*1*") - expected) < 1e-12


def test_classical_fourth_cumulant_formula():
    m1, m2, m3, m4 = 0.3, 0.7, 0.2, 1.1
    table = selfadjoint_moments([m1, m2, m3, m4], 4)
    kappa = moments_to_classical_cumulants(table, 4)
    expected = m4 - 4 * m3 * m1 - 3 * m2 ** 2 + 12 * m2 * m1 ** 2 - 6 * m1 ** 4
    assert abs(kappa.get("1111") - expected) < 1e-12


def test_semicircular_moments():
    kappa = selfadjoint_cumulants([0, 1, 0, 0, 0, 0], 6)
    m = free_cumulants_to_moments(kappa, 6)
    for k, want in [(1, 0), (2, 1), (3, 0), (4, 2), (5, 0), (6, 5)]:
        assert abs(m.get("1" * k) - want) < 1e-12
    back = moments_to_free_cumulants(m, 6)
    assert abs(back.get("11") - 1) < 1e-12
    for k in (3, 4, 5, 6):
        assert abs(back.get("1" * k)) < 1e-12


def test_circular_trace_powers():
    kappa = CumulantTable(order=6)
    kappa.set("1*", 1)
    kappa.set("*1", 1)
    m = free_cumulants_to_moments(kappa, 6)
    for k, want in [(1, 1), (2, 2), (3, 5)]:
        assert abs(m.get("1*" * k) - want) < 1e-12
    # the only length-2 moments are the alternating ones
    assert abs(m.get("11")) < 1e-12
    assert abs(m.get("1111")) < 1e-12


def test_gaussian_moments_classical():
    kappa = selfadjoint_cumulants([0, 1, 0, 0, 0, 0], 6)
    m = classical_cumulants_to_moments(kappa, 6)
    for k, want in [(2, 1), (4, 3), (6, 15)]:
        assert abs(m.get("1" * k) - want) < 1e-12
    assert abs(m.get("111")) < 1e-12


def test_pure_shift_gives_powers():
    c = 0.5 + 0.25j
    kappa = CumulantTable(order=5)
    kappa.set("1", c)
    m_free = free_cumulants_to_moments(kappa, 5)
    m_cl = classical_cumulants_to_moments(kappa, 5)
    for k in range(1, 6):
        assert abs(m_free.get("1" * k) - c ** k) < 1e-12
        assert abs(m_cl.get("1" * k) - c ** k) < 1e-12


def haar_unitary_moments(order):
    # a normal unitary with vanishing nonzero powers: the word collapses to
    # the net exponent, so the moment is 1 exactly when counts balance
    t = MomentTable(order=order)
    for k in range(1, order + 1):
        for d in StarPattern.all_patterns(k):
            t.set(d, 1.0 if d.imbalance == 0 else 0.0)
    return t


def test_haar_unitary_cumulants():
    kappa = moments_to_free_cumulants(haar_unitary_moments(6), 6)
    assert abs(kappa.get("1*") - 1) < 1e-12
    assert abs(kappa.get("*1") - 1) < 1e-12
    assert abs(kappa.get("1*1*") - (-1)) < 1e-12
    assert abs(kappa.get("*1*1") - (-1)) < 1e-12
    assert abs(kappa.get("1*1*1*") - 2) < 1e-12
    # non-alternating balanced patterns vanish
    assert abs(kappa.get("11**")) < 1e-12


def test_scalar_round_trips():
    for seed in range(5):
        kappa = random_cumulant_table(6, seed=seed)
        m = free_cumulants_to_moments(kappa, 6)
        back = moments_to_free_cumulants(m, 6)
        assert kappa.max_abs_difference(back) < 1e-9
        m2 = classical_cumulants_to_moments(kappa, 6)
        back2 = moments_to_classical_cumulants(m2, 6)
        assert kappa.max_abs_difference(back2) < 1e-9


def test_matrix_round_trip():
    for seed in range(3):
        kappa = random_cumulant_table(5, dim=2, seed=seed)
        m = free_cumulants_to_moments(kappa, 5)
        back = moments_to_free_cumulants(m, 5)
        assert kappa.max_abs_difference(back) < 1e-9


def test_low_order_free_classical_agreement():
    table = selfadjoint_moments([0.4, 1.2, 0.9], 3)
    free = moments_to_free_cumulants(table, 3)
    cl = moments_to_classical_cumulants(table, 3)
    assert free.max_abs_difference(cl) < 1e-12


def test_conversion_guards():
    kappa = random_cumulant_table(4, seed=1)
    with pytest.raises(OrderBoundError):
        free_cumulants_to_moments(random_cumulant_table(8, seed=0) , 9)
    with pytest.raises(IncompleteTableError):
        free_cumulants_to_moments(kappa, 5)
    mk = random_cumulant_table(5, dim=2, seed=2)
    with pytest.raises(UnsupportedAlgebraError):
        classical_cumulants_to_moments(mk, 4)
    with pytest.raises(OrderBoundError):
        free_cumulants_to_moments(random_cumulant_table(6, dim=2, seed=0), 7)
    with pytest.raises(SizeLimitError):
        CumulantTable(order=2, dim=4)


def test_eval_free_rejects_crossing():
    kappa = random_cumulant_table(4, seed=3)
    crossing = Partition.of([[1, 3], [2, 4]])
    with pytest.raises(CrossingPartitionError):
        eval_partitioned_free(kappa, crossing, "1111")
    # the classical evaluation accepts it
    val = eval_partitioned_classical(kappa, crossing, "1111")
    expected = kappa.get("11") ** 2
    assert abs(val - expected) < 1e-12


def test_nested_scalar_example():
    kappa = CumulantTable(order=2)
    kappa.set("1", 0.5)
    kappa.set("11", 2.0)
    part = Partition.of([[1, 3], [2]])
    a = [1.5, 3.0, 0.5 + 1j]
    # peel the singleton {2}: its value multiplies the first argument
    want = 2.0 * (1.5 * (0.5 * 3.0)) * (0.5 + 1j)
    got = eval_partitioned_free(kappa, part, "111", a)
    assert abs(got - want) < 1e-12
    # for scalars the classical product agrees
    got_cl = eval_partitioned_classical(kappa, part, "111", a)
    assert abs(got_cl - want) < 1e-12


def test_nested_matrix_differs_from_classical():
    rng = np.random.default_rng(7)
    kappa = random_cumulant_table(3, dim=2, seed=11)
    part = Partition.of([[1, 3], [2]])
    coeffs = [rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
              for _ in range(3)]
    nested = eval_partitioned_free(kappa, part, "111", coeffs)
    flat = eval_partitioned_classical(kappa, part, "111", coeffs)
    assert not np.allclose(nested, flat, atol=1e-9)


def test_peel_order_independence():
    kappa = random_cumulant_table(5, dim=2, seed=5)
    rng = np.random.default_rng(17)
    for k in range(1, 6):
        coeffs = [rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
                  for _ in range(k)]
        for part in enumerate_noncrossing(k):
            left = eval_partitioned_free(kappa, part, "1*" * (k // 2) + "1" * (k % 2),
                                         coeffs, rightmost=False)
            right = eval_partitioned_free(kappa, part, "1*" * (k // 2) + "1" * (k % 2),
                                          coeffs, rightmost=True)
            assert np.allclose(left, right, atol=1e-12)


def test_multilinearity_in_each_slot():
    kappa = random_cumulant_table(4, dim=2, seed=9)
    rng = np.random.default_rng(23)
    part = Partition.of([[1, 4], [2, 3]])
    coeffs = [rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
              for _ in range(4)]
    base = eval_partitioned_free(kappa, part, "1*1*", coeffs)
    for lam in (2.0, 1j):
        for j in range(4):
            scaled = list(coeffs)
            scaled[j] = lam * scaled[j]
            got = eval_partitioned_free(kappa, part, "1*1*", scaled)
            assert np.allclose(got, lam * base, atol=1e-12)
    # scalar slots too
    ks = random_cumulant_table(4, seed=10)
    cs = [0.5, 2.0, 1.5, 1.0]
    base_s = eval_partitioned_free(ks, part, "1*1*", cs)
    cs2 = list(cs)
    cs2[1] = 1j * cs2[1]
    assert abs(eval_partitioned_free(ks, part, "1*1*", cs2) - 1j * base_s) < 1e-12


def semicircular_spec(order=6):
    return selfadjoint_cumulants([0, 1, 0, 0, 0, 0], order)


def test_free_family_joint_moments():
    spec = semicircular_spec()
    assert abs(joint_moments_free_family(spec, 2, (1, 2, 1, 2), "1111")) < 1e-12
    assert abs(joint_moments_free_family(spec, 2, (1, 1, 2, 2), "1111") - 1) < 1e-12
    assert abs(joint_moments_free_family(spec, 2, (1, 1), "11") - 1) < 1e-12
    assert abs(joint_moments_free_family(spec, 2, (1, 2), "11")) < 1e-12


def test_joint_moment_tensor_matches_pointwise():
    spec = random_cumulant_table(4, seed=21, scale=0.6)
    n = 2
    for k in (1, 2, 3, 4):
        d = StarPattern(("1*" * k)[:k])
        tensor = joint_moment_tensor(spec, n, k, d)
        for word in itertools.product(range(1, n + 1), repeat=k):
            idx = tuple(i - 1 for i in word)
            want = joint_moments_free_family(spec, n, word, d)
            assert abs(tensor[idx] - want) < 1e-12


def test_joint_moment_tensor_with_matrix_coefficients():
    spec = random_cumulant_table(3, dim=2, seed=31)
    rng = np.random.default_rng(41)
    coeffs = [rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
              for _ in range(4)]
    tensor = joint_moment_tensor(spec, 2, 3, "1*1", coeffs)
    for word in itertools.product((1, 2), repeat=3):
        idx = tuple(i - 1 for i in word)
        want = joint_moments_free_family(spec, 2, word, "1*1", coeffs)
        assert np.allclose(tensor[idx], want, atol=1e-12)


class _FreeFamilyOracle:
    def __init__(self, table, n):
        self.table = table
        self.n = n
        self.dim = table.dim

    def moment(self, word, pattern):
        return joint_moments_free_family(self.table, self.n, word, pattern)


class _IndependentGaussians:
    """Classically independent commuting standard Gaussians."""

    n = 2
    dim = 1

    def moment(self, word, pattern):
        from freesym.partitions import kernel

        out = 1.0
        for block in kernel(tuple(word)).blocks:
            m = len(block)
            if m % 2:
                return 0.0
            out *= float(np.prod(np.arange(1, m, 2)))  # (m-1)!!
        return out


def test_multivariate_free_family_has_vanishing_mixed_cumulants():
    spec = random_cumulant_table(4, seed=51, scale=0.5)
    oracle = _FreeFamilyOracle(spec, 2)
    multi = multivariate_cumulants_from_joint_moments(oracle, 4)
    word, pattern, worst = multi.largest_mixed()
    assert worst < 1e-9, (word, pattern, worst)


def test_multivariate_single_variable_reduction():
    spec = random_cumulant_table(4, seed=52, scale=0.5)
    oracle = _FreeFamilyOracle(spec, 1)
    multi = multivariate_cumulants_from_joint_moments(oracle, 4)
    for k in range(1, 5):
        for d in StarPattern.all_patterns(k):
            got = multi.get((1,) * k, d)
            want = spec.get(d)
            if want is None:
                want = 0j
            assert abs(got - want) < 1e-9


def test_independent_is_not_free():
    multi = multivariate_cumulants_from_joint_moments(_IndependentGaussians(), 4)
    val = multi.get((1, 2, 1, 2), "1111")
    assert abs(val - 1) < 1e-9


def test_multivariate_guards():
    spec = random_cumulant_table(2, seed=1)
    with pytest.raises(OrderBoundError):
        multivariate_cumulants_from_joint_moments(_FreeFamilyOracle(spec, 4), 2)
    with pytest.raises(OrderBoundError):
        multivariate_cumulants_from_joint_moments(_FreeFamilyOracle(spec, 2), 7)
