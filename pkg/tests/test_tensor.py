import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tnwp.errors import ShapeMismatchError, ValidationError
from tnwp.tensor import (
    Tensor,
    colmajor_to_rowmajor,
    conv1d,
    dense,
    rowmajor_to_colmajor,
)


def naive_conv1d(x, w, b):
    """Independent triple-loop oracle: fixed i-then-k accumulation."""
    c_out, c_in, k = w.shape
    length = x.shape[1]
    pad = (k - 1) // 2
    out = np.zeros((c_out, length))
    for c in range(c_out):
        for l in range(length):
            acc = b[c]
            for i in range(c_in):
                for tap in range(k):
                    src = l + tap - pad
                    if 0 <= src < length:
                        acc += w[c, i, tap] * x[i, src]
            out[c, l] = acc
    return out


def naive_dense(x, w, b):
    """Independent double-loop oracle."""
    m, n = w.shape
    out = np.zeros(m)
    for i in range(m):
        acc = b[i]
        for j in range(n):
            acc += w[i, j] * x[j]
        out[i] = acc
    return out


class TestLayoutConversion:
    def test_colmajor_2x3_example(self):
        t = colmajor_to_rowmajor(np.array([1.0, 4.0, 2.0, 5.0, 3.0, 6.0]), (2, 3))
        assert t.shape == (2, 3)
        assert t.data.tolist() == [1, 2, 3, 4, 5, 6]

    def test_1d_is_layout_invariant(self):
        buf = np.array([3.0, 1.0, 4.0, 1.0, 5.0])
        t = colmajor_to_rowmajor(buf, (5,))
        assert np.array_equal(t.data, buf)

    def test_column_profile_shape_is_permutation(self):
        buf = np.arange(979, dtype=np.float64)
        t = colmajor_to_rowmajor(buf, (11, 89))
        assert t.shape == (11, 89)
        assert sorted(t.data.tolist()) == sorted(buf.tolist())

    def test_rowmajor_2x3_example(self):
        t = Tensor((2, 3), np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]))
        assert rowmajor_to_colmajor(t).tolist() == [1, 4, 2, 5, 3, 6]

    def test_output_shape_length(self):
        t = Tensor((5, 89), np.arange(445, dtype=np.float64))
        assert rowmajor_to_colmajor(t).size == 445

    def test_length_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            colmajor_to_rowmajor(np.zeros(5), (2, 3))

    def test_float32_ingest_widens(self):
        t = colmajor_to_rowmajor(np.zeros(6, dtype=np.float32), (2, 3))
        assert t.data.dtype == np.float64

    @given(
        shape=st.lists(st.integers(1, 5), min_size=1, max_size=4).map(tuple),
        data=st.data(),
    )
    @settings(max_examples=100, deadline=None)
    def test_roundtrip_identity_up_to_rank4(self, shape, data):
        n = int(np.prod(shape))
        values = data.draw(
            st.lists(
                st.floats(allow_nan=False, allow_infinity=False, width=64),
                min_size=n,
                max_size=n,
            )
        )
        buf = np.array(values, dtype=np.float64)
        back = rowmajor_to_colmajor(colmajor_to_rowmajor(buf, shape))
        assert np.array_equal(back, buf)  # bitwise round trip


class TestConv1d:
    def test_identity_kernel(self):
        out = conv1d(
            Tensor.from_array([[3.0, 5.0, 7.0]]),
            Tensor.from_array([[[1.0]]]),
            Tensor.from_array([0.0]),
        )
        assert out.data.tolist() == [3, 5, 7]

    def test_center_tap_plus_bias(self):
        out = conv1d(
            Tensor.from_array([[1.0, 2.0, 3.0]]),
            Tensor.from_array([[[0.0, 1.0, 0.0]]]),
            Tensor.from_array([1.0]),
        )
        assert out.data.tolist() == [2, 3, 4]

    def test_against_naive_oracle(self):
        rng = np.random.default_rng(11)
        x = rng.standard_normal((11, 89))
        w = rng.standard_normal((16, 11, 3))
        b = rng.standard_normal(16)
        out = conv1d(Tensor.from_array(x), Tensor.from_array(w), Tensor.from_array(b))
        assert out.shape == (16, 89)
        ref = naive_conv1d(x, w, b)
        assert np.max(np.abs(out.as_array() - ref)) <= 1e-14 * np.max(np.abs(ref))

    def test_linearity_with_zero_bias(self):
        rng = np.random.default_rng(3)
        w = Tensor.from_array(rng.standard_normal((4, 3, 3)))
        b = Tensor.from_array(np.zeros(4))
        x1 = rng.standard_normal((3, 10))
        x2 = rng.standard_normal((3, 10))
        a, c = 0.7, -1.3
        lhs = conv1d(Tensor.from_array(a * x1 + c * x2), w, b).as_array()
        rhs = a * conv1d(Tensor.from_array(x1), w, b).as_array() + c * conv1d(
            Tensor.from_array(x2), w, b
        ).as_array()
        assert np.max(np.abs(lhs - rhs)) <= 1e-14 * max(1.0, np.max(np.abs(rhs)))

    def test_kernel1_equals_channel_mixing_dense(self):
        rng = np.random.default_rng(5)
        w = rng.standard_normal((4, 3, 1))
        b = rng.standard_normal(4)
        x = rng.standard_normal((3, 7))
        out = conv1d(Tensor.from_array(x), Tensor.from_array(w), Tensor.from_array(b))
        for pos in range(7):
            col = dense(
                Tensor.from_array(x[:, pos]),
                Tensor.from_array(w[:, :, 0]),
                Tensor.from_array(b),
            )
            # bias is accumulated in a different order, so exact equality
            # is not expected; agreement is to rounding
            assert np.allclose(out.as_array()[:, pos], col.data, rtol=1e-12, atol=1e-15)

    def test_even_kernel_rejected(self):
        with pytest.raises(ValidationError):
            conv1d(
                Tensor.from_array([[1.0, 2.0]]),
                Tensor.from_array(np.zeros((1, 1, 2))),
                Tensor.from_array([0.0]),
            )

    def test_channel_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            conv1d(
                Tensor.from_array(np.zeros((2, 5))),
                Tensor.from_array(np.zeros((3, 4, 3))),
                Tensor.from_array(np.zeros(3)),
            )


class TestDense:
    def test_identity(self):
        out = dense(
            Tensor.from_array([4.0, -2.0]),
            Tensor.from_array(np.eye(2)),
            Tensor.from_array(np.zeros(2)),
        )
        assert out.data.tolist() == [4, -2]

    def test_hand_affine(self):
        out = dense(
            Tensor.from_array([1.0, 1.0]),
            Tensor.from_array([[2.0, 0.0], [0.0, 3.0]]),
            Tensor.from_array([1.0, -1.0]),
        )
        assert out.data.tolist() == [3, 2]

    def test_against_naive_oracle(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal(32)
        w = rng.standard_normal((64, 32))
        b = rng.standard_normal(64)
        out = dense(Tensor.from_array(x), Tensor.from_array(w), Tensor.from_array(b))
        ref = naive_dense(x, w, b)
        assert np.max(np.abs(out.data - ref)) <= 1e-15 * np.max(np.abs(ref))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            dense(
                Tensor.from_array(np.zeros(5)),
                Tensor.from_array(np.zeros((3, 4))),
                Tensor.from_array(np.zeros(3)),
            )


class TestTensorInvariants:
    def test_size_invariant(self):
        with pytest.raises(ShapeMismatchError):
            Tensor((2, 3), np.zeros(5))

    def test_positive_extents(self):
        with pytest.raises(ValidationError):
            Tensor((0,), np.zeros(0))
