"""Synthetic corruption families for desk-scale distribution-shift experiments.

These are simplified stand-ins for the common-corruptions benchmark families:
two low-frequency kinds (brightness, contrast), two mid (gaussian_blur,
pixelate), and two high (gaussian_noise, impulse_noise). Outputs are not
clamped; images are assumed to be mean/std normalized real values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import InvalidInputError

CORRUPTION_KINDS = (
    "brightness",
    "contrast",
    "gaussian_noise",
    "impulse_noise",
    "gaussian_blur",
    "pixelate",
)
STOCHASTIC_KINDS = ("gaussian_noise", "impulse_noise")


@dataclass
class CorruptionSpec:
    """One corruption: kind, its scalar parameter, and a seed for stochastic kinds.

    param meaning by kind: brightness offset, contrast scale, noise std,
    impulse flip probability, blur kernel sigma, pixelation block factor.
    """

    kind: str
    param: float
    seed: int = 0

    def __post_init__(self):
        if self.kind not in CORRUPTION_KINDS:
            raise InvalidInputError(f"unknown corruption kind {self.kind!r}")
        if not np.isfinite(self.param):
            raise InvalidInputError("corruption param must be finite")
        if self.kind == "gaussian_noise" and self.param < 0:
            raise InvalidInputError("noise std must be >= 0")
        if self.kind == "impulse_noise" and not 0.0 <= self.param <= 1.0:
            raise InvalidInputError("flip probability must be in [0, 1]")
        if self.kind == "gaussian_blur" and self.param <= 0:
            raise InvalidInputError("blur sigma must be > 0")
        if self.kind == "pixelate":
            if self.param < 1 or self.param != int(self.param):
                raise InvalidInputError("block factor must be an integer >= 1")


def apply_corruption(image, spec: CorruptionSpec) -> np.ndarray:
    """Apply one corruption to a (C, H, W) image, bit-reproducible given the seed."""
    x = np.asarray(image, dtype=np.float64)
    if x.ndim != 3:
        raise InvalidInputError(f"image must have shape (C, H, W), got {x.shape}")
    kind, param = spec.kind, spec.param

    if kind == "brightness":
        return x + param

    if kind == "contrast":
        mean_c = x.mean(axis=(1, 2), keepdims=True)
        return mean_c + param * (x - mean_c)

    if kind == "gaussian_noise":
        rng = np.random.default_rng([spec.seed, 0])
        return x + rng.normal(0.0, param, size=x.shape)

    if kind == "impulse_noise":
        rng = np.random.default_rng([spec.seed, 1])
        lo, hi = x.min(), x.max()
        flip = rng.random(x.shape) < param
        salt = rng.random(x.shape) < 0.5
        return np.where(flip, np.where(salt, hi, lo), x)

    if kind == "gaussian_blur":
        radius = math.ceil(3.0 * param)
        out = np.empty_like(x)
        for c in range(x.shape[0]):
            # scipy 'reflect' is symmetric edge padding, which keeps the image
            # mean exactly for a normalized kernel.
            out[c] = ndimage.gaussian_filter(
                x[c], sigma=param, mode="reflect", radius=radius
            )
        return out

    # pixelate
    factor = int(param)
    _, h, w = x.shape
    if h % factor or w % factor:
        raise InvalidInputError(f"block factor {factor} must divide H={h} and W={w}")
    blocks = x.reshape(x.shape[0], h // factor, factor, w // factor, factor)
    means = blocks.mean(axis=(2, 4))
    return means.repeat(factor, axis=1).repeat(factor, axis=2)


def corrupt_batch(images, spec: CorruptionSpec) -> np.ndarray:
    """Apply a corruption to an (N, C, H, W) stack, seeding image i from (seed, i)."""
    stack = np.asarray(images, dtype=np.float64)
    if stack.ndim != 4:
        raise InvalidInputError(f"expected an (N, C, H, W) stack, got {stack.shape}")
    out = np.empty_like(stack)
    for i in range(stack.shape[0]):
        per_image = CorruptionSpec(kind=spec.kind, param=spec.param, seed=_derive_seed(spec.seed, i))
        out[i] = apply_corruption(stack[i], per_image)
    return out


def _derive_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])
