"""Spectral analysis and robustness statistics for model evaluation.

Submodules:

- ``spectral``: 2D DFT, amplitude/phase decomposition, radial masks, PSDs
- ``paths``: Fourier amplitude/phase and pixel interpolation paths
- ``corruptions``: synthetic corruption families
- ``shift_psd``: distribution-shift PSDs, radial profiles, band fractions
- ``path_metrics``: high frequency fraction, consistent distance, summaries
- ``jacobian``: random-projection Jacobian norm estimation, built-in predictors
- ``regression``: Clopper-Pearson, probit, grouped probit-domain regression
- ``tensorio`` / ``tables`` / ``render``: file formats and plot emission
- ``cli``: the ``specrob`` command surface
"""

from .errors import (
    DegenerateFitError,
    InvalidInputError,
    TensorFormatError,
    TraceParseError,
    UndefinedMetricError,
)
from .spectral import (
    FourierDecomposition,
    PsdMap,
    RadialMask,
    decompose,
    dft2,
    idft2_real,
    normalized_radius,
    psd,
    radial_mask,
    recompose,
)
from .paths import (
    InterpolationPath,
    PathSpec,
    amplitude_path,
    build_path,
    phase_path,
    pixel_path,
    sample_path_specs,
    wrap_angle,
)
from .corruptions import CorruptionSpec, apply_corruption, corrupt_batch
from .shift_psd import (
    BandFractions,
    band_fractions,
    class_averaged_shift_psd,
    paired_shift_psd,
    radial_profile,
)
from .path_metrics import (
    MetricSummary,
    PathMetrics,
    PredictionTrace,
    compute_path_metrics,
    consistent_distance,
    hff,
    summarize_gaussian,
)
from .jacobian import (
    CallablePredictor,
    JacobianConfig,
    JacobianEstimate,
    LinearPredictor,
    MlpPredictor,
    Predictor,
    estimate_jacobian_norm,
    fd_directional_derivative,
    fit_mlp,
    train_blob_mlp,
    vjp_linear_softmax,
)
from .regression import (
    AccuracyRecord,
    GroupFit,
    MetricRecord,
    ProbitRegression,
    clopper_pearson,
    effective_robustness,
    fit_line,
    grouped_regression,
    probit,
)
from .synthetic import make_blobs, powerlaw_images

__version__ = "0.1.0"
