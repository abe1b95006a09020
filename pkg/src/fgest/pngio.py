"""PNG import/export for images and alpha mattes (8 and 16 bit)."""

import numpy as np
import png


def read_png(path):
    """Read a PNG as a float64 ``(h, w, planes)`` array in [0, 1].

    Palette images are expanded; integer values ``v`` map to ``v / (2**bitdepth - 1)``.
    """
    reader = png.Reader(filename=str(path))
    width, height, rows, info = reader.asDirect()
    planes = info["planes"]
    maxval = (1 << info["bitdepth"]) - 1
    data = np.vstack([np.asarray(row, dtype=np.uint32) for row in rows])
    data = data.reshape(height, width, planes)
    return data.astype(np.float64) / maxval


def read_image(path):
    """Read a PNG and return an RGB ``(h, w, 3)`` image (alpha dropped, gray expanded)."""
    data = read_png(path)
    planes = data.shape[2]
    if planes in (1, 2):
        return np.repeat(data[:, :, :1], 3, axis=2)
    return data[:, :, :3].copy()


def read_alpha(path, source="gray-png"):
    """Read an alpha matte.

    ``source="gray-png"`` takes the first (luminance) plane, ``"alpha-channel"``
    takes the alpha plane of an RGBA or gray+alpha PNG.
    """
    data = read_png(path)
    planes = data.shape[2]
    if source == "gray-png":
        if planes not in (1, 2):
            raise ValueError(f"{path}: expected a grayscale PNG, found {planes} planes")
        return data[:, :, 0].copy()
    if source == "alpha-channel":
        if planes not in (2, 4):
            raise ValueError(f"{path}: PNG has no alpha channel")
        return data[:, :, -1].copy()
    raise ValueError(f"unknown alpha source {source!r}")


def quantize(data, bitdepth):
    """Round ``data`` to the integer grid used by a PNG of the given bit depth."""
    maxval = (1 << bitdepth) - 1
    return np.round(np.clip(data, 0.0, 1.0) * maxval).astype(np.uint16 if bitdepth > 8 else np.uint8)


def write_png(path, data, bitdepth=16):
    """Write a gray ``(h, w)`` / ``(h, w, 1)`` or RGB ``(h, w, 3)`` array to PNG."""
    if bitdepth not in (8, 16):
        raise ValueError("bitdepth must be 8 or 16")
    data = np.asarray(data, dtype=np.float64)
    if data.ndim == 2:
        data = data[:, :, None]
    height, width, planes = data.shape
    if planes not in (1, 3):
        raise ValueError(f"can only write 1 or 3 channel images, got {planes}")
    q = quantize(data, bitdepth).reshape(height, width * planes)
    writer = png.Writer(
        width, height, greyscale=(planes == 1), bitdepth=bitdepth
    )
    with open(path, "wb") as f:
        writer.write(f, q.tolist())
