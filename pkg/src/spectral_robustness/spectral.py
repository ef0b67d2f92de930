"""2D DFT machinery: transforms, amplitude/phase decomposition, radial masks, PSDs.

Images are real arrays of shape (C, H, W) in normalized-pixel units (values may
be negative after mean/std normalization). Spectra are complex arrays of the
same shape using the standard unnormalized DFT convention, so Parseval reads
``sum |X|^2 = H*W * sum |x|^2`` per channel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError


@dataclass
class FourierDecomposition:
    """Per-channel amplitude (modulus) and phase (principal argument) of a spectrum.

    Phases lie in (-pi, pi]; bins with zero amplitude carry phase 0.
    """

    amplitude: np.ndarray
    phase: np.ndarray


@dataclass
class RadialMask:
    """Boolean (H, W) frequency mask: bins with normalized radius <= rho.

    The layout matches unshifted DFT indexing (DC at [0, 0]).
    """

    included: np.ndarray
    rho: float


@dataclass
class PsdMap:
    """Channel- and image-averaged power per frequency bin, shape (H, W).

    ``power`` is signed only for shift maps (differences of PSDs); a PSD of a
    single dataset is elementwise nonnegative. ``source_count`` records how
    many items were averaged.
    """

    power: np.ndarray
    source_count: int


def _as_image(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise InvalidInputError(f"image must have shape (C, H, W), got {x.shape}")
    c, h, w = x.shape
    if c < 1 or h < 2 or w < 2:
        raise InvalidInputError(f"image too small: shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("image contains non-finite values")
    return x


def _as_spectrum(s) -> np.ndarray:
    s = np.asarray(s, dtype=np.complex128)
    if s.ndim != 3:
        raise InvalidInputError(f"spectrum must have shape (C, H, W), got {s.shape}")
    if not np.all(np.isfinite(s)):
        raise InvalidInputError("spectrum contains non-finite values")
    return s


def dft2(image) -> np.ndarray:
    """Forward unnormalized 2D DFT applied per channel."""
    return np.fft.fft2(_as_image(image), axes=(-2, -1))


def idft2_real(spectrum) -> np.ndarray:
    """Inverse 2D DFT per channel, keeping the real component.

    Any imaginary residue from a non-Hermitian spectrum is discarded, not
    symmetrized away.
    """
    return np.fft.ifft2(_as_spectrum(spectrum), axes=(-2, -1)).real


def decompose(spectrum) -> FourierDecomposition:
    """Split a spectrum into modulus and principal argument in (-pi, pi]."""
    s = _as_spectrum(spectrum)
    amplitude = np.abs(s)
    phase = np.angle(s)
    # np.angle can land on -pi for bins with a negative-zero imaginary part;
    # fold onto +pi so phases stay in (-pi, pi].
    phase[phase <= -np.pi] = np.pi
    phase[amplitude == 0.0] = 0.0
    return FourierDecomposition(amplitude=amplitude, phase=phase)


def recompose(decomp: FourierDecomposition) -> np.ndarray:
    """Rebuild a complex spectrum from amplitude and phase."""
    amplitude = np.asarray(decomp.amplitude, dtype=np.float64)
    phase = np.asarray(decomp.phase, dtype=np.float64)
    if amplitude.shape != phase.shape:
        raise InvalidInputError(
            f"amplitude/phase shape mismatch: {amplitude.shape} vs {phase.shape}"
        )
    if np.any(amplitude < 0):
        raise InvalidInputError("amplitude must be nonnegative")
    if not (np.all(np.isfinite(amplitude)) and np.all(np.isfinite(phase))):
        raise InvalidInputError("non-finite amplitude or phase")
    return amplitude * np.exp(1j * phase)


def normalized_radius(h: int, w: int) -> np.ndarray:
    """Normalized frequency radius r(u, v) in [0, 1] on the unshifted DFT grid.

    With signed frequency indices u, v, r = sqrt((2u/h)^2 + (2v/w)^2) / sqrt(2),
    so r = 0 at DC and r = 1 at the corner (Nyquist, Nyquist) bin.
    """
    if h < 2 or w < 2:
        raise InvalidInputError(f"grid must be at least 2x2, got {h}x{w}")
    fu = 2.0 * np.fft.fftfreq(h)  # == 2u/h for signed index u
    fv = 2.0 * np.fft.fftfreq(w)
    return np.sqrt(fu[:, None] ** 2 + fv[None, :] ** 2) / np.sqrt(2.0)


def radial_mask(h: int, w: int, rho: float) -> RadialMask:
    """Low-frequency mask: include every bin with normalized radius <= rho.

    rho = 0 keeps only DC; rho = 1 keeps all h*w bins.
    """
    if not 0.0 <= rho <= 1.0:
        raise InvalidInputError(f"rho must be in [0, 1], got {rho}")
    return RadialMask(included=normalized_radius(h, w) <= rho, rho=float(rho))


def psd(images: Sequence) -> PsdMap:
    """Mean power spectral density |X|^2 / (H*W) over images and channels.

    The normalization makes unit-variance white noise flat at expected power 1.
    """
    if isinstance(images, np.ndarray) and images.ndim == 4:
        stack = images
    else:
        items = list(images)
        if not items:
            raise InvalidInputError("psd requires at least one image")
        shapes = {np.asarray(im).shape for im in items}
        if len(shapes) != 1:
            raise InvalidInputError(f"psd requires identical image shapes, got {sorted(shapes)}")
        stack = np.stack([np.asarray(im) for im in items])
    if stack.ndim != 4 or stack.shape[0] < 1:
        raise InvalidInputError(f"psd requires a nonempty (N, C, H, W) stack, got {stack.shape}")
    stack = np.asarray(stack, dtype=np.float64)
    if not np.all(np.isfinite(stack)):
        raise InvalidInputError("psd input contains non-finite values")
    n, _, h, w = stack.shape
    spectra = np.fft.fft2(stack, axes=(-2, -1))
    # Channel mean first, then image mean, so repeated identical images
    # average bit-identically.
    per_image = np.mean(np.abs(spectra) ** 2, axis=1) / (h * w)
    return PsdMap(power=np.mean(per_image, axis=0), source_count=n)
