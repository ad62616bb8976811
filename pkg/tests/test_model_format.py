import hashlib
from pathlib import Path

import numpy as np
import pytest

from tnwp.errors import FormatError, ShapeMismatchError, ValidationError
from tnwp.fixtures import make_dense_model, make_identity_model, make_tanh_model
from tnwp.graph import (
    ModelGraph,
    build_reference_gwd_model,
    check_shapes,
    parameter_count,
    validate_graph,
)
from tnwp.layers import LayerKind, dense_layer, input_normalize_layer
from tnwp.serialize import load_model, save_model
from tnwp.tensor import Tensor

DATA_DIR = Path(__file__).parent / "data"

# Computed by hand from the layer algebra: input stats 2*11*89, stem conv
# 16*11*1+16, four residual convs (16*16*3+16 each), reduction conv
# 5*16*3+5, vector head 267*445+267, scalar head 2*445+2, output stats 2*5.
REFERENCE_PARAM_COUNT = 125_515


def graphs_equal(a: ModelGraph, b: ModelGraph) -> bool:
    if (a.name, a.input_shape, a.output_shape) != (b.name, b.input_shape, b.output_shape):
        return False
    if len(a.layers) != len(b.layers):
        return False
    for la, lb in zip(a.layers, b.layers):
        if la.kind != lb.kind or la.meta != lb.meta:
            return False
        if list(la.params) != list(lb.params):
            return False
        for name in la.params:
            ta, tb = la.params[name], lb.params[name]
            if ta.shape != tb.shape or not np.array_equal(ta.data, tb.data):
                return False
    return True


class TestSerializationRoundTrip:
    @pytest.mark.parametrize("build", [make_identity_model, lambda: make_dense_model(0),
                                       lambda: make_tanh_model(0),
                                       lambda: build_reference_gwd_model(0)])
    def test_load_save_bit_identical(self, tmp_path, build):
        graph = build()
        path = tmp_path / "m.tnwp"
        save_model(graph, path)
        again = load_model(path)
        assert graphs_equal(graph, again)

    def test_save_load_save_byte_identical(self, tmp_path):
        graph = make_tanh_model(3)
        p1, p2 = tmp_path / "a.tnwp", tmp_path / "b.tnwp"
        save_model(graph, p1)
        save_model(load_model(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_identity_model_forwards_x_to_x(self, tmp_path):
        from tnwp.engine import forward

        path = tmp_path / "id.tnwp"
        save_model(make_identity_model(), path)
        graph = load_model(path)
        x = Tensor.from_array([1.0, -2.0, 3.0, 4.5])
        y, _ = forward(graph, x)
        assert np.array_equal(y.data, x.data)

    def test_reference_roundtrip_preserves_structure(self, tmp_path):
        graph = build_reference_gwd_model(1)
        path = tmp_path / "ref.tnwp"
        save_model(graph, path)
        again = load_model(path)
        assert parameter_count(again) == parameter_count(graph)
        assert check_shapes(again) == check_shapes(graph)


class TestFormatErrors:
    def _saved(self, tmp_path) -> Path:
        path = tmp_path / "m.tnwp"
        save_model(make_dense_model(0), path)
        return path

    def test_corrupted_magic(self, tmp_path):
        path = self._saved(tmp_path)
        raw = bytearray(path.read_bytes())
        raw[:4] = b"XXXX"
        path.write_bytes(bytes(raw))
        with pytest.raises(FormatError, match="magic"):
            load_model(path)

    def test_unsupported_version(self, tmp_path):
        path = self._saved(tmp_path)
        raw = bytearray(path.read_bytes())
        raw[4] = 99
        path.write_bytes(bytes(raw))
        with pytest.raises(FormatError, match="version"):
            load_model(path)

    def test_truncated_blob_names_byte_counts(self, tmp_path):
        path = self._saved(tmp_path)
        raw = path.read_bytes()
        path.write_bytes(raw[:-16])
        with pytest.raises(FormatError, match=r"expected \d+ bytes, got \d+"):
            load_model(path)

    def test_truncated_header(self, tmp_path):
        path = self._saved(tmp_path)
        path.write_bytes(path.read_bytes()[:20])
        with pytest.raises(FormatError, match="header"):
            load_model(path)

    def test_missing_file_is_oserror(self, tmp_path):
        with pytest.raises(OSError):
            load_model(tmp_path / "nope.tnwp")

    def test_zero_std_writes_nothing(self, tmp_path):
        stats_shape = (2, 3)
        mean = Tensor.from_array(np.zeros(stats_shape))
        std = Tensor.from_array(np.zeros(stats_shape))  # invalid: must be > 0
        graph = ModelGraph(
            name="bad",
            input_shape=stats_shape,
            output_shape=stats_shape,
            layers=[input_normalize_layer(mean, std)],
        )
        path = tmp_path / "bad.tnwp"
        with pytest.raises(ValidationError, match="layer 0"):
            save_model(graph, path)
        assert not path.exists()


class TestGoldenFixture:
    """A container checked into the repo: structure and blob digest frozen
    at fixture-creation time."""

    GOLDEN = DATA_DIR / "golden_tanh2.tnwp"
    BLOB_SHA256 = "c05cde2971f6148bef706e8e57545c757989b7c77f1b746110128fb620348562"
    FILE_SHA256 = "b2336fd515db363b0cbb6597fff14f438737637ae50924f96834e95d234565ca"

    def test_digest_and_layer_list(self):
        raw = self.GOLDEN.read_bytes()
        assert hashlib.sha256(raw).hexdigest() == self.FILE_SHA256
        graph = load_model(self.GOLDEN)
        assert [l.kind for l in graph.layers] == [
            LayerKind.DENSE, LayerKind.TANH, LayerKind.DENSE, LayerKind.TANH,
        ]
        blob = b"".join(
            t.data.astype("<f8").tobytes() for l in graph.layers for t in l.params.values()
        )
        assert hashlib.sha256(blob).hexdigest() == self.BLOB_SHA256


class TestNormalizationInverse:
    def test_input_normalize_then_synthetic_inverse_is_identity(self):
        # the inverse of (x - m)/s is another per-level standardization
        # with mean -m/s and std 1/s
        from tnwp.engine import forward

        rng = np.random.default_rng(20)
        mean = rng.standard_normal((3, 5))
        std = rng.uniform(0.5, 2.0, (3, 5))
        graph = ModelGraph(
            name="norm-roundtrip", input_shape=(3, 5), output_shape=(3, 5),
            layers=[
                input_normalize_layer(Tensor.from_array(mean), Tensor.from_array(std)),
                input_normalize_layer(
                    Tensor.from_array(-mean / std), Tensor.from_array(1.0 / std)
                ),
            ],
        )
        x = rng.standard_normal((3, 5))
        y, _ = forward(graph, Tensor.from_array(x))
        assert np.max(np.abs(y.as_array() - x)) <= 1e-14 * np.max(np.abs(x))


class TestContainerSizeFormula:
    def test_reference_file_size_is_header_plus_blob(self, tmp_path):
        import struct

        graph = build_reference_gwd_model(0)
        path = tmp_path / "ref.tnwp"
        save_model(graph, path)
        raw = path.read_bytes()
        _, _, header_len = struct.unpack_from("<4sIQ", raw, 0)
        assert len(raw) == 16 + header_len + 8 * REFERENCE_PARAM_COUNT
        assert header_len % 8 == 0  # blob stays 8-byte aligned


class TestReferenceBuilder:
    def test_deterministic(self):
        assert graphs_equal(build_reference_gwd_model(0), build_reference_gwd_model(0))

    def test_different_seeds_differ(self):
        assert not graphs_equal(build_reference_gwd_model(0), build_reference_gwd_model(1))

    def test_parameter_count_golden(self):
        assert parameter_count(build_reference_gwd_model(0)) == REFERENCE_PARAM_COUNT

    def test_shape_trace(self):
        trace = check_shapes(build_reference_gwd_model(2))
        assert trace[0] == (11, 89)
        assert trace[-1] == (5, 89)

    @pytest.mark.parametrize("seed", [0, 1, 17])
    def test_passes_validation_for_every_seed(self, seed):
        validate_graph(build_reference_gwd_model(seed))


class TestCheckShapes:
    def test_error_names_layer(self):
        graph = ModelGraph(
            name="bad",
            input_shape=(5,),
            output_shape=(3,),
            layers=[dense_layer(Tensor.from_array(np.zeros((3, 4))),
                                Tensor.from_array(np.zeros(3)))],
        )
        with pytest.raises(ShapeMismatchError, match="layer 0"):
            check_shapes(graph)

    def test_empty_chain_identity_only(self):
        ok = ModelGraph(name="empty", input_shape=(4,), output_shape=(4,), layers=[])
        assert check_shapes(ok) == [(4,)]
        bad = ModelGraph(name="empty", input_shape=(4,), output_shape=(5,), layers=[])
        with pytest.raises(ShapeMismatchError):
            check_shapes(bad)

    def test_terminal_shape_enforced(self):
        graph = ModelGraph(
            name="bad-end",
            input_shape=(4,),
            output_shape=(9,),
            layers=[dense_layer(Tensor.from_array(np.zeros((3, 4))),
                                Tensor.from_array(np.zeros(3)))],
        )
        with pytest.raises(ShapeMismatchError, match="terminates"):
            check_shapes(graph)
