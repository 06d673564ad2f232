"""Color images as pure quaternion matrices, masks, and PSNR."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .qmatrix import QMatrix
from .solver import ObservationMask

__all__ = [
    "ColorImage",
    "ImageFormatError",
    "encode",
    "decode",
    "real_plane_leakage",
    "make_mask",
    "psnr",
    "read_png",
    "write_png",
    "read_mask_png",
]


class ImageFormatError(ValueError):
    """The file is not an image this tool accepts."""


@dataclass(frozen=True)
class ColorImage:
    """RGB samples in ``[0, 1]``, array of shape ``(height, width, 3)``."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.array(self.pixels, dtype=np.float64)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected (height, width, 3) samples, got {px.shape}")
        if px.size and (px.min() < 0.0 or px.max() > 1.0):
            raise ValueError("samples must lie in [0, 1]")
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @classmethod
    def from_uint8(cls, arr):
        return cls(np.asarray(arr, dtype=np.float64) / 255.0)

    def to_uint8(self) -> np.ndarray:
        return np.rint(self.pixels * 255.0).astype(np.uint8)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def encode(img: ColorImage) -> QMatrix:
    """``R i + G j + B k`` with rows indexed by image height."""
    px = img.pixels
    return QMatrix(np.stack((np.zeros(px.shape[:2]), px[..., 0], px[..., 1], px[..., 2])))


def decode(q: QMatrix) -> ColorImage:
    """Imaginary planes to RGB, clamped to ``[0, 1]``; the real plane is dropped."""
    rgb = np.moveaxis(q.planes[1:], 0, -1)
    return ColorImage(np.clip(rgb, 0.0, 1.0))


def real_plane_leakage(q: QMatrix, region=None, atol: float = 1e-12):
    """Count and Frobenius mass of nonzero real-plane entries.

    ``region`` optionally restricts the count to a boolean subset.
    """
    real = q.planes[0]
    if region is not None:
        real = np.where(region, real, 0.0)
    count = int(np.count_nonzero(np.abs(real) > atol))
    return count, float(np.linalg.norm(real))


def make_mask(shape, ratio=None, seed=None, path=None) -> ObservationMask:
    """Pixel observation mask from a missing ratio or from a grayscale PNG.

    In file mode a zero-valued pixel is missing. Exactly one of ``ratio``
    and ``path`` must be given.
    """
    if (ratio is None) == (path is None):
        raise ValueError("give exactly one of a missing ratio or a mask file")
    m, n = shape
    if path is not None:
        mask = read_mask_png(path)
        if mask.shape != (m, n):
            raise ValueError(f"mask is {mask.shape[1]}x{mask.shape[0]}, image is {n}x{m}")
        return ObservationMask(mask)
    return ObservationMask.random(m, n, ratio, seed)


def psnr(reference: ColorImage, candidate: ColorImage) -> float:
    """Peak signal-to-noise ratio in dB for unit peak; ``inf`` when identical."""
    if reference.pixels.shape != candidate.pixels.shape:
        raise ValueError(f"image sizes differ: {reference.pixels.shape} vs {candidate.pixels.shape}")
    mse = float(np.mean((reference.pixels - candidate.pixels) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def read_png(path, max_size: int | None = None) -> ColorImage:
    """Read an 8-bit RGB image; alpha or other modes raise :class:`ImageFormatError`."""
    with Image.open(path) as im:
        im.load()
        if im.mode != "RGB":
            raise ImageFormatError(f"{path}: expected 8-bit RGB, got mode {im.mode}")
        if max_size is not None and (im.width > max_size or im.height > max_size):
            raise ImageFormatError(
                f"{path}: {im.width}x{im.height} exceeds the {max_size}x{max_size} cap")
        return ColorImage.from_uint8(np.asarray(im))


def read_mask_png(path) -> np.ndarray:
    """Boolean observed-array from an 8-bit grayscale PNG (zero = missing)."""
    with Image.open(path) as im:
        im.load()
        if im.mode == "1":
            im = im.convert("L")
        if im.mode != "L":
            raise ImageFormatError(f"{path}: mask must be 8-bit grayscale, got mode {im.mode}")
        return np.asarray(im) != 0


def write_png(path, img: ColorImage | np.ndarray):
    arr = img.to_uint8() if isinstance(img, ColorImage) else np.asarray(img, dtype=np.uint8)
    Image.fromarray(arr).save(path, format="PNG")
