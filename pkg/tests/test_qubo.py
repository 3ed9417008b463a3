"""Tests for QUBO representation, energy evaluation, and clamping."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dqaoa.errors import DataError
from dqaoa.qubo import (
    QuboMatrix,
    SubProblem,
    all_energies,
    bits_from_index,
    energy,
    energy_delta_flip,
    extract_sub_qubo,
    flip,
    gen_gaussian_qubo,
    index_from_bits,
    load_qubo,
    merge_assignment,
    save_qubo,
)


def energy_loop(q, x):
    """Independent double-loop implementation of x^T Q x."""
    total = 0.0
    n = len(x)
    for i in range(n):
        for j in range(n):
            total += x[i] * q[i][j] * x[j]
    return total


class TestQuboMatrix:
    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            QuboMatrix(np.zeros((2, 3)))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            QuboMatrix(np.zeros((0, 0)))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            QuboMatrix(np.array([[np.nan]]))

    def test_immutable_copy(self):
        arr = np.ones((2, 2))
        Q = QuboMatrix(arr)
        arr[0, 0] = 5.0
        assert Q.q[0, 0] == 1.0
        with pytest.raises(ValueError):
            Q.q[0, 0] = 2.0


class TestEnergy:
    def test_zero_matrix(self):
        Q = QuboMatrix(np.zeros((3, 3)))
        assert energy(Q, [1, 1, 1]) == 0.0

    def test_small_by_hand(self):
        # 1*1*1 + 1*2*1 + 1*0*1 + 1*3*1
        Q = QuboMatrix(np.array([[1.0, 2.0], [0.0, 3.0]]))
        assert energy(Q, [1, 1]) == 6.0
        assert energy(Q, [1, 0]) == 1.0
        assert energy(Q, [0, 1]) == 3.0

    def test_matches_independent_loop(self):
        Q = gen_gaussian_qubo(6, seed=7)
        x = [0, 1, 0, 1, 1, 0]
        assert energy(Q, x) == pytest.approx(energy_loop(Q.q, x), rel=1e-12)

    def test_dimension_mismatch(self):
        Q = QuboMatrix(np.zeros((3, 3)))
        with pytest.raises(ValueError):
            energy(Q, [1, 0])

    def test_non_binary_rejected(self):
        Q = QuboMatrix(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            energy(Q, [2, 0])


class TestEnergyDeltaFlip:
    def test_zero_matrix(self):
        Q = QuboMatrix(np.zeros((4, 4)))
        assert energy_delta_flip(Q, [0, 1, 0, 1], 2) == 0.0

    def test_small_by_hand(self):
        Q = QuboMatrix(np.array([[1.0, 2.0], [0.0, 3.0]]))
        # flipping bit 0 of [1,1] gives [0,1]: energy 6 -> 3
        assert energy_delta_flip(Q, [1, 1], 0) == pytest.approx(-3.0)

    def test_matches_full_reevaluation(self):
        rng = np.random.default_rng(11)
        Q = QuboMatrix(rng.normal(size=(10, 10)))
        for _ in range(100):
            x = rng.integers(0, 2, size=10)
            i = int(rng.integers(0, 10))
            expected = energy(Q, flip(x, i)) - energy(Q, x)
            assert energy_delta_flip(Q, x, i) == pytest.approx(expected, rel=1e-12, abs=1e-12)

    @settings(deadline=None, max_examples=50)
    @given(st.integers(0, 2**32 - 1), st.data())
    def test_property_delta_equals_reevaluation(self, seed, data):
        rng = np.random.default_rng(seed)
        n = data.draw(st.integers(1, 8))
        Q = QuboMatrix(rng.normal(size=(n, n)))
        x = rng.integers(0, 2, size=n)
        i = data.draw(st.integers(0, n - 1))
        expected = energy(Q, flip(x, i)) - energy(Q, x)
        assert energy_delta_flip(Q, x, i) == pytest.approx(expected, rel=1e-12, abs=1e-12)

    def test_index_out_of_range(self):
        Q = QuboMatrix(np.zeros((3, 3)))
        with pytest.raises(ValueError):
            energy_delta_flip(Q, [0, 0, 0], 3)


class TestGenGaussianQubo:
    def test_statistics(self):
        Q = gen_gaussian_qubo(1000, seed=123)
        assert abs(Q.q.mean()) < 0.005
        assert abs(Q.q.std() - 0.15) < 0.01

    def test_deterministic(self):
        a = gen_gaussian_qubo(5, seed=42)
        b = gen_gaussian_qubo(5, seed=42)
        assert np.array_equal(a.q, b.q)

    def test_seed_changes_matrix(self):
        a = gen_gaussian_qubo(5, seed=42)
        b = gen_gaussian_qubo(5, seed=43)
        assert not np.array_equal(a.q, b.q)

    def test_dense(self):
        Q = gen_gaussian_qubo(50, seed=0)
        assert np.all(Q.q != 0.0)

    def test_rejects_zero_size(self):
        with pytest.raises(ValueError):
            gen_gaussian_qubo(0, seed=1)


class TestExtractSubQubo:
    def test_k5_shape(self):
        # fixing 3 of 8 leaves 5 self-terms and 10 unordered pairs
        Q = gen_gaussian_qubo(8, seed=2)
        x = np.zeros(8, dtype=int)
        sub = extract_sub_qubo(Q, [0, 2, 3, 5, 7], x)
        assert sub.subq.n == 5
        off_diag = sub.subq.q.size - 5
        assert off_diag == 20  # 10 unordered pairs stored in both triangles

    def test_full_index_set_is_identity(self):
        Q = gen_gaussian_qubo(5, seed=3)
        sub = extract_sub_qubo(Q, range(5), np.ones(5, dtype=int))
        assert np.array_equal(sub.subq.q, Q.q)
        assert sub.offset == 0.0

    def test_clamping_identity_exhaustive(self):
        rng = np.random.default_rng(4)
        Q = QuboMatrix(rng.normal(size=(6, 6)))
        x_global = rng.integers(0, 2, size=6)
        indices = [1, 3, 4]
        sub = extract_sub_qubo(Q, indices, x_global)
        for b in range(8):
            y = bits_from_index(b, 3)
            merged = merge_assignment(x_global, indices, y)
            direct = energy(Q, merged)
            via_sub = energy(sub.subq, y) + sub.offset
            assert direct == pytest.approx(via_sub, rel=1e-12, abs=1e-12)

    @settings(deadline=None, max_examples=40)
    @given(st.integers(0, 2**32 - 1), st.data())
    def test_property_clamping_identity(self, seed, data):
        rng = np.random.default_rng(seed)
        n = data.draw(st.integers(2, 8))
        k = data.draw(st.integers(1, n))
        Q = QuboMatrix(rng.normal(size=(n, n)))
        x_global = rng.integers(0, 2, size=n)
        indices = sorted(rng.choice(n, size=k, replace=False).tolist())
        sub = extract_sub_qubo(Q, indices, x_global)
        for b in range(1 << k):
            y = bits_from_index(b, k)
            merged = merge_assignment(x_global, indices, y)
            assert energy(Q, merged) == pytest.approx(
                energy(sub.subq, y) + sub.offset, rel=1e-12, abs=1e-12
            )

    def test_duplicate_indices_rejected(self):
        Q = gen_gaussian_qubo(5, seed=1)
        with pytest.raises(ValueError):
            extract_sub_qubo(Q, [1, 1, 2], np.zeros(5, dtype=int))

    def test_out_of_range_rejected(self):
        Q = gen_gaussian_qubo(5, seed=1)
        with pytest.raises(ValueError):
            extract_sub_qubo(Q, [3, 5], np.zeros(5, dtype=int))

    def test_subproblem_validation(self):
        with pytest.raises(ValueError):
            SubProblem(indices=[2, 1], subq=QuboMatrix(np.zeros((2, 2))), offset=0.0)


class TestBitsHelpers:
    def test_roundtrip(self):
        for b in range(16):
            assert index_from_bits(bits_from_index(b, 4)) == b

    def test_little_endian(self):
        assert list(bits_from_index(1, 3)) == [1, 0, 0]
        assert list(bits_from_index(4, 3)) == [0, 0, 1]

    def test_all_energies_matches_scalar(self):
        Q = gen_gaussian_qubo(5, seed=8)
        vals = all_energies(Q)
        for b in range(32):
            assert vals[b] == pytest.approx(energy(Q, bits_from_index(b, 5)), rel=1e-12)


class TestQuboFiles:
    def test_json_roundtrip(self, tmp_path):
        Q = gen_gaussian_qubo(7, seed=5)
        path = tmp_path / "q.json"
        save_qubo(Q, path)
        loaded = load_qubo(path)
        assert np.array_equal(loaded.q, Q.q)

    def test_csv_import(self, tmp_path):
        path = tmp_path / "q.csv"
        path.write_text("2\n1.0,2.0\n0.0,3.0\n")
        Q = load_qubo(path)
        assert energy(Q, [1, 1]) == 6.0

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_qubo(tmp_path / "nope.json")

    def test_csv_bad_row_reports_line(self, tmp_path):
        path = tmp_path / "q.csv"
        path.write_text("2\n1.0,2.0\n0.0\n")
        with pytest.raises(DataError, match="line 3"):
            load_qubo(path)

    def test_json_wrong_length(self, tmp_path):
        path = tmp_path / "q.json"
        path.write_text('{"n": 2, "q": [1.0, 2.0, 3.0]}')
        with pytest.raises(DataError):
            load_qubo(path)
