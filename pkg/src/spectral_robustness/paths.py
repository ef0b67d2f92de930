"""Interpolation paths between image pairs: Fourier amplitude, Fourier phase, pixel.

A path holds T images for evenly spaced lambda in [0, 1]. Amplitude paths blend
the low-frequency amplitudes of the two endpoints while keeping the source
phases everywhere; phase paths blend low-frequency phases along the shortest
angular arc while keeping the source amplitudes; pixel paths lerp in pixel
space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .spectral import FourierDecomposition, decompose, dft2, radial_mask, recompose

PATH_MODES = ("amplitude", "phase", "pixel")
CLASS_RELATIONS = ("within", "between", "unconstrained")

# Paper-procedure defaults: 100 lambda steps per path; low-frequency cutoff 0.4
# for CIFAR-scale amplitude and phase, 0.2 for large-image phase, 1.0 (all
# frequencies) for large-image amplitude.
DEFAULT_STEPS = 100
DEFAULT_CUTOFF = 0.4
LARGE_IMAGE_PHASE_CUTOFF = 0.2
LARGE_IMAGE_AMPLITUDE_CUTOFF = 1.0


@dataclass
class PathSpec:
    """Recipe for one interpolation path between two dataset items."""

    mode: str
    source_index: int
    target_index: int
    class_relation: str
    cutoff: float
    steps: int
    seed: int

    def __post_init__(self):
        if self.mode not in PATH_MODES:
            raise InvalidInputError(f"unknown path mode {self.mode!r}")
        if self.class_relation not in CLASS_RELATIONS:
            raise InvalidInputError(f"unknown class relation {self.class_relation!r}")
        if self.source_index == self.target_index:
            raise InvalidInputError("source and target must differ")
        if self.steps < 2:
            raise InvalidInputError(f"steps must be >= 2, got {self.steps}")
        if not 0.0 <= self.cutoff <= 1.0:
            raise InvalidInputError(f"cutoff must be in [0, 1], got {self.cutoff}")


@dataclass
class InterpolationPath:
    """T path images (T, C, H, W) with their lambda grid t/(T-1)."""

    images: np.ndarray
    lambdas: np.ndarray


def _check_pair(x0, x1, t: int) -> tuple[np.ndarray, np.ndarray]:
    x0 = np.asarray(x0, dtype=np.float64)
    x1 = np.asarray(x1, dtype=np.float64)
    if x0.shape != x1.shape:
        raise InvalidInputError(f"image shape mismatch: {x0.shape} vs {x1.shape}")
    if t < 2:
        raise InvalidInputError(f"T must be >= 2, got {t}")
    return x0, x1


def _lambda_grid(t: int) -> np.ndarray:
    return np.arange(t, dtype=np.float64) / (t - 1)


def wrap_angle(theta) -> np.ndarray:
    """Wrap angles into (-pi, pi]; exact antipodes resolve to +pi."""
    return np.pi - np.mod(np.pi - np.asarray(theta, dtype=np.float64), 2.0 * np.pi)


def _self_conjugate_bins(h: int, w: int) -> np.ndarray:
    """Bins that are their own conjugate mirror: (0 or H/2, 0 or W/2)."""
    mask = np.zeros((h, w), dtype=bool)
    for u in [0] + ([h // 2] if h % 2 == 0 else []):
        for v in [0] + ([w // 2] if w % 2 == 0 else []):
            mask[u, v] = True
    return mask


def amplitude_path(x0, x1, rho: float, t: int = DEFAULT_STEPS) -> InterpolationPath:
    """Blend low-frequency amplitude from x0 toward x1, keeping x0's phase.

    On bins inside the radial mask the amplitude is (1-lambda)*a0 + lambda*a1;
    outside it stays a0. The phase is p0 everywhere, and each spectrum is
    inverted back to a real image.
    """
    x0, x1 = _check_pair(x0, x1, t)
    d0 = decompose(dft2(x0))
    d1 = decompose(dft2(x1))
    mask = radial_mask(x0.shape[1], x0.shape[2], rho).included
    lambdas = _lambda_grid(t)

    lam = lambdas[:, None, None, None]
    blended = (1.0 - lam) * d0.amplitude[None] + lam * d1.amplitude[None]
    amp = np.where(mask[None, None, :, :], blended, d0.amplitude[None])
    phase = np.broadcast_to(d0.phase[None], amp.shape)
    spectra = recompose(FourierDecomposition(amplitude=amp, phase=np.array(phase)))
    images = np.fft.ifft2(spectra, axes=(-2, -1)).real
    return InterpolationPath(images=images, lambdas=lambdas)


def phase_path(x0, x1, rho: float, t: int = DEFAULT_STEPS) -> InterpolationPath:
    """Rotate low-frequency phase from p0 toward p1, keeping x0's amplitude.

    The per-bin increment is the shortest angular arc wrap(p1 - p0); the
    interpolated angle is re-wrapped into (-pi, pi]. Self-conjugate bins (DC
    and the Nyquist intersections) keep p0 outright: their phases are confined
    to {0, pi} for real images, so a continuous rotation there would corrupt
    the amplitude through the real-part projection instead of moving the
    phase.
    """
    x0, x1 = _check_pair(x0, x1, t)
    d0 = decompose(dft2(x0))
    d1 = decompose(dft2(x1))
    mask = radial_mask(x0.shape[1], x0.shape[2], rho).included
    lambdas = _lambda_grid(t)

    delta = wrap_angle(d1.phase - d0.phase)
    delta[:, _self_conjugate_bins(x0.shape[1], x0.shape[2])] = 0.0
    lam = lambdas[:, None, None, None]
    rotated = wrap_angle(d0.phase[None] + lam * delta[None])
    phase = np.where(mask[None, None, :, :], rotated, d0.phase[None])
    amp = np.broadcast_to(d0.amplitude[None], phase.shape)
    spectra = recompose(FourierDecomposition(amplitude=np.array(amp), phase=phase))
    images = np.fft.ifft2(spectra, axes=(-2, -1)).real
    return InterpolationPath(images=images, lambdas=lambdas)


def pixel_path(x0, x1, t: int = DEFAULT_STEPS) -> InterpolationPath:
    """Linear interpolation in pixel space: (1-lambda)*x0 + lambda*x1."""
    x0, x1 = _check_pair(x0, x1, t)
    lambdas = _lambda_grid(t)
    lam = lambdas[:, None, None, None]
    images = (1.0 - lam) * x0[None] + lam * x1[None]
    return InterpolationPath(images=images, lambdas=lambdas)


def build_path(x0, x1, spec: PathSpec) -> InterpolationPath:
    """Construct the path described by a PathSpec for the given endpoint images."""
    if spec.mode == "amplitude":
        return amplitude_path(x0, x1, spec.cutoff, spec.steps)
    if spec.mode == "phase":
        return phase_path(x0, x1, spec.cutoff, spec.steps)
    return pixel_path(x0, x1, spec.steps)


def sample_path_specs(
    labels,
    n_paths: int,
    mode: str,
    class_relation: str = "unconstrained",
    rho: float = DEFAULT_CUTOFF,
    t: int = DEFAULT_STEPS,
    seed: int = 0,
) -> list[PathSpec]:
    """Draw n_paths endpoint pairs uniformly at random subject to class_relation.

    Pair i is drawn from an RNG stream derived from (seed, i), so individual
    paths are reproducible independently of how many are requested.
    """
    labels = np.asarray(labels)
    n = labels.shape[0]
    if n_paths < 1:
        raise InvalidInputError(f"n_paths must be >= 1, got {n_paths}")
    if n < 2:
        raise InvalidInputError("dataset must contain at least 2 items")
    if mode not in PATH_MODES:
        raise InvalidInputError(f"unknown path mode {mode!r}")
    if class_relation not in CLASS_RELATIONS:
        raise InvalidInputError(f"unknown class relation {class_relation!r}")

    if class_relation == "within":
        _, counts = np.unique(labels, return_counts=True)
        if not np.any(counts >= 2):
            raise InvalidInputError("within-class pairs need a class with >= 2 items")
    elif class_relation == "between":
        if np.unique(labels).size < 2:
            raise InvalidInputError("between-class pairs need >= 2 distinct classes")

    specs = []
    for i in range(n_paths):
        rng = np.random.default_rng([seed, i])
        while True:
            src, dst = rng.choice(n, size=2, replace=False)
            if class_relation == "within" and labels[src] != labels[dst]:
                continue
            if class_relation == "between" and labels[src] == labels[dst]:
                continue
            break
        specs.append(
            PathSpec(
                mode=mode,
                source_index=int(src),
                target_index=int(dst),
                class_relation=class_relation,
                cutoff=float(rho),
                steps=int(t),
                seed=int(seed),
            )
        )
    return specs
