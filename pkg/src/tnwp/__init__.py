"""tnwp: neural-network surrogate coupling layer.

Loads serialized feed-forward models, runs forward inference, and exposes
tangent-linear (J dx) and adjoint (J^T z) evaluations behind a handle-based
boundary that accepts column-major host buffers, plus a verification CLI.
"""

from .engine import (
    ForwardTrace,
    JacobianMatrix,
    adjoint,
    forward,
    jacobian,
    scalar_loss_adjoint,
    tangent,
)
from .errors import (
    FormatError,
    ShapeMismatchError,
    TnwpError,
    UsageError,
    ValidationError,
)
from .graph import (
    ModelGraph,
    NormalizationSpec,
    build_reference_gwd_model,
    check_shapes,
    parameter_count,
    validate_graph,
)
from .layers import LayerKind, LayerSpec
from .serialize import load_model, save_model
from .tensor import Layout, Tensor, colmajor_to_rowmajor, conv1d, dense, rowmajor_to_colmajor

__version__ = "0.1.0"

__all__ = [
    "ForwardTrace",
    "JacobianMatrix",
    "adjoint",
    "forward",
    "jacobian",
    "scalar_loss_adjoint",
    "tangent",
    "FormatError",
    "ShapeMismatchError",
    "TnwpError",
    "UsageError",
    "ValidationError",
    "ModelGraph",
    "NormalizationSpec",
    "build_reference_gwd_model",
    "check_shapes",
    "parameter_count",
    "validate_graph",
    "LayerKind",
    "LayerSpec",
    "load_model",
    "save_model",
    "Layout",
    "Tensor",
    "colmajor_to_rowmajor",
    "conv1d",
    "dense",
    "rowmajor_to_colmajor",
    "__version__",
]
