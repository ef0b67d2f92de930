"""Synthetic image datasets for desk-scale experiments.

Blob images give a trivially learnable classification task for the built-in
predictors; power-law images mimic natural-image spectral statistics (Fourier
amplitude falling off as 1/r^slope) for shift-PSD experiments.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError
from .spectral import normalized_radius


def make_blobs(
    image_shape: tuple[int, int, int] = (1, 8, 8),
    n_classes: int = 2,
    n_per_class: int = 100,
    noise: float = 0.25,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian-bump class templates plus pixel noise, normalized to zero mean.

    Returns (images, labels) with images of shape (n_classes*n_per_class, C, H, W).
    """
    c, h, w = image_shape
    if n_classes < 2 or n_per_class < 1:
        raise InvalidInputError("need n_classes >= 2 and n_per_class >= 1")
    rng = np.random.default_rng([seed, 7])
    ys, xs = np.mgrid[0:h, 0:w]
    templates = []
    for k in range(n_classes):
        cy = rng.uniform(0.25 * h, 0.75 * h)
        cx = rng.uniform(0.25 * w, 0.75 * w)
        width = rng.uniform(0.12, 0.25) * min(h, w)
        bump = np.exp(-(((ys - cy) ** 2 + (xs - cx) ** 2) / (2.0 * width**2)))
        sign = 1.0 if k % 2 == 0 else -1.0
        templates.append(sign * np.tile(bump, (c, 1, 1)))

    images = np.empty((n_classes * n_per_class, c, h, w))
    labels = np.empty(n_classes * n_per_class, dtype=np.int64)
    for k in range(n_classes):
        lo = k * n_per_class
        scale = rng.uniform(0.8, 1.2, size=(n_per_class, 1, 1, 1))
        images[lo : lo + n_per_class] = templates[k][None] * scale + rng.normal(
            0.0, noise, size=(n_per_class, c, h, w)
        )
        labels[lo : lo + n_per_class] = k

    images -= images.mean()
    std = images.std()
    if std > 0:
        images /= std
    return images, labels


def powerlaw_images(
    image_shape: tuple[int, int, int] = (1, 32, 32),
    n: int = 100,
    slope: float = 1.0,
    seed: int = 0,
) -> np.ndarray:
    """Random-phase images whose Fourier amplitude falls off as 1/r^slope."""
    c, h, w = image_shape
    if n < 1:
        raise InvalidInputError("need n >= 1")
    rng = np.random.default_rng([seed, 11])
    r = normalized_radius(h, w)
    amp = np.zeros_like(r)
    nonzero = r > 0
    amp[nonzero] = r[nonzero] ** (-slope)
    phases = rng.uniform(-np.pi, np.pi, size=(n, c, h, w))
    spectra = amp[None, None] * np.exp(1j * phases)
    images = np.fft.ifft2(spectra, axes=(-2, -1)).real
    images /= images.std()
    return images
