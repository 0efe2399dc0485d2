import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrupt_recover.fourier import (
    PartialFourierOperator,
    dft,
    dft_direct,
    idft,
    sample_random_subset,
)

RNG = np.random.default_rng


def random_complex(rng, size):
    return rng.standard_normal(size) + 1j * rng.standard_normal(size)


def test_dft_of_constant_vector():
    out = dft(np.ones(4))
    np.testing.assert_allclose(out, [2.0, 0.0, 0.0, 0.0], atol=1e-15)


def test_dft_unitary_roundtrip():
    rng = RNG(0)
    z = random_complex(rng, 33)
    np.testing.assert_allclose(idft(dft(z)), z, atol=1e-12)
    assert math.isclose(np.linalg.norm(dft(z)), np.linalg.norm(z), rel_tol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 8, 17, 64])
def test_fft_matches_direct_transform(n):
    rng = RNG(n)
    z = random_complex(rng, n)
    np.testing.assert_allclose(dft(z), dft_direct(z), atol=1e-10)


def test_apply_on_all_ones_rows_0_and_2():
    # oracle: dense row extraction of the scaled transform, built by hand.
    # sqrt(4/2) * rows {0,2} of the unitary DFT applied to (1,1,1,1)
    # gives (sqrt(2)*2, 0).
    op = PartialFourierOperator(4, (0, 2))
    out = op.apply(np.ones(4))
    np.testing.assert_allclose(out, [2.0 * math.sqrt(2.0), 0.0], atol=1e-14)


def test_apply_on_first_basis_vector():
    op = PartialFourierOperator(4, (0, 2))
    e0 = np.zeros(4)
    e0[0] = 1.0
    np.testing.assert_allclose(op.apply(e0), [1 / math.sqrt(2), 1 / math.sqrt(2)], atol=1e-14)


def test_adjoint_of_first_measurement_vector():
    op = PartialFourierOperator(4, (0, 2))
    y = np.zeros(2, dtype=complex)
    y[0] = 1.0
    np.testing.assert_allclose(op.apply_adjoint(y), np.full(4, 1 / math.sqrt(2)), atol=1e-14)


def test_dense_submatrix_single_entry_values():
    # row index 1 of Lambda={0,2} is global row 2; at columns 1 and 3 the
    # unscaled entries are exp(-2*pi*i*2*1/4) = -1 and exp(-2*pi*i*2*3/4) = -1.
    op = PartialFourierOperator(4, (0, 2))
    sub = op.dense_submatrix(np.array([1]), np.array([1, 3]))
    np.testing.assert_allclose(sub, [[-1 / math.sqrt(2), -1 / math.sqrt(2)]], atol=1e-14)


@pytest.mark.parametrize("n,rows", [(5, (0, 3)), (16, (1, 2, 9)), (64, tuple(range(0, 64, 3)))])
def test_dense_matches_apply_on_basis_vectors(n, rows):
    op = PartialFourierOperator(n, rows)
    dense = op.dense()
    for j in range(n):
        e = np.zeros(n, dtype=complex)
        e[j] = 1.0
        np.testing.assert_allclose(op.apply(e), dense[:, j], atol=1e-12)


@pytest.mark.parametrize("conjugated", [False, True])
def test_adjoint_identity_and_column_norms(conjugated):
    rng = RNG(7)
    for n in (5, 16, 64, 251):
        m = max(1, n // 3)
        op = PartialFourierOperator.random(n, m, seed=n, conjugated=conjugated)
        x = random_complex(rng, n)
        y = random_complex(rng, m)
        lhs = np.vdot(y, op.apply(x))
        rhs = np.vdot(op.apply_adjoint(y), x)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))
        dense = op.dense()
        np.testing.assert_allclose(np.linalg.norm(dense, axis=0), np.ones(n), atol=1e-12)
        # every entry has modulus 1/sqrt(m)
        np.testing.assert_allclose(np.abs(dense), np.full((m, n), 1 / math.sqrt(m)), atol=1e-12)


def test_row_gram_is_scaled_identity():
    op = PartialFourierOperator.random(40, 12, seed=3)
    dense = op.dense()
    gram = dense @ dense.conj().T
    np.testing.assert_allclose(gram, (40 / 12) * np.eye(12), atol=1e-12)


def test_conjugated_variant_is_entrywise_conjugate():
    op = PartialFourierOperator(12, (0, 2, 7), conjugated=False)
    opc = PartialFourierOperator(12, (0, 2, 7), conjugated=True)
    np.testing.assert_allclose(opc.dense(), op.dense().conj(), atol=1e-14)


@given(st.integers(min_value=2, max_value=48), st.randoms(use_true_random=False))
@settings(max_examples=40)
def test_adjoint_identity_property(n, pyrandom):
    m = pyrandom.randint(1, n)
    seed = pyrandom.randint(0, 2**32)
    op = PartialFourierOperator.random(n, m, seed=seed)
    rng = RNG(seed)
    x = random_complex(rng, n)
    y = random_complex(rng, m)
    lhs = np.vdot(y, op.apply(x))
    rhs = np.vdot(op.apply_adjoint(y), x)
    assert abs(lhs - rhs) <= 1e-11 * max(1.0, np.linalg.norm(x) * np.linalg.norm(y))


def test_subset_sampler_is_sorted_distinct_in_range():
    rows = sample_random_subset(100, 37, seed=11)
    assert rows.dtype == np.int64 or rows.dtype == np.intp
    assert len(rows) == 37
    assert (np.diff(rows) > 0).all()
    assert rows[0] >= 0 and rows[-1] < 100


def test_subset_sampler_frozen_draws():
    assert sample_random_subset(10, 4, seed=0).tolist() == [1, 4, 6, 8]
    assert sample_random_subset(10, 4, seed=1).tolist() == [4, 5, 8, 9]


def test_subset_sampler_uniform_counts():
    # frozen chi-square style check: counts of the picked index for
    # n=4, m=1 over seeds 0..9999.  expected 2500 each; the band is
    # roughly +-4 standard deviations (sigma ~ 43.3).
    counts = [0, 0, 0, 0]
    for seed in range(10000):
        counts[sample_random_subset(4, 1, seed)[0]] += 1
    assert counts == [2413, 2556, 2507, 2524]
    assert all(2327 <= c <= 2673 for c in counts)


def test_subset_sampler_rejects_bad_sizes():
    with pytest.raises(ValueError):
        sample_random_subset(5, 0, seed=0)
    with pytest.raises(ValueError):
        sample_random_subset(5, 6, seed=0)


def test_operator_validates_rows():
    with pytest.raises(ValueError):
        PartialFourierOperator(8, (3, 3))
    with pytest.raises(ValueError):
        PartialFourierOperator(8, (5, 2))
    with pytest.raises(ValueError):
        PartialFourierOperator(8, (0, 8))
    with pytest.raises(ValueError):
        PartialFourierOperator(8, ())


def test_apply_rejects_wrong_shape():
    op = PartialFourierOperator(8, (0, 1))
    with pytest.raises(ValueError):
        op.apply(np.ones(7))
    with pytest.raises(ValueError):
        op.apply_adjoint(np.ones(3))
