"""Image containers, bilinear resizing and alpha compositing.

Images are float64 numpy arrays in [0, 1]: shape ``(h, w, c)`` for color
images and ``(h, w)`` for alpha mattes.
"""

import numpy as np


def as_image(data, name="image"):
    """Validate and convert ``data`` to a float64 ``(h, w, c)`` array."""
    img = np.asarray(data, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    if img.ndim != 3 or img.shape[2] not in (1, 3):
        raise ValueError(f"{name} must have shape (h, w, 1|3), got {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"{name} must be at least 1x1, got {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError(f"{name} contains non-finite values")
    return img


def as_alpha(data, name="alpha"):
    """Validate and convert ``data`` to a float64 ``(h, w)`` matte."""
    alpha = np.asarray(data, dtype=np.float64)
    if alpha.ndim == 3 and alpha.shape[2] == 1:
        alpha = alpha[:, :, 0]
    if alpha.ndim != 2:
        raise ValueError(f"{name} must have shape (h, w), got {alpha.shape}")
    if alpha.shape[0] < 1 or alpha.shape[1] < 1:
        raise ValueError(f"{name} must be at least 1x1, got {alpha.shape}")
    if not np.all(np.isfinite(alpha)):
        raise ValueError(f"{name} contains non-finite values")
    return alpha


def check_same_size(**arrays):
    """Raise ``ValueError`` unless all arrays share height and width."""
    items = list(arrays.items())
    ref_name, ref = items[0]
    for name, arr in items[1:]:
        if arr.shape[:2] != ref.shape[:2]:
            raise ValueError(
                f"size mismatch: {name} is {arr.shape[1]}x{arr.shape[0]} "
                f"but {ref_name} is {ref.shape[1]}x{ref.shape[0]}"
            )


def compose(fg, bg, alpha):
    """Blend ``fg`` over ``bg`` with the compositing equation.

    Each output channel is ``alpha * fg + (1 - alpha) * bg``, clamped to [0, 1].
    """
    fg = as_image(fg, "fg")
    bg = as_image(bg, "bg")
    alpha = as_alpha(alpha)
    check_same_size(alpha=alpha, fg=fg, bg=bg)
    if fg.shape[2] != bg.shape[2]:
        raise ValueError(
            f"channel mismatch: fg has {fg.shape[2]} channels, bg has {bg.shape[2]}"
        )
    a = alpha[:, :, None]
    return np.clip(a * fg + (1.0 - a) * bg, 0.0, 1.0)


def compose_naive(image, bg, alpha):
    """Composite the observed image itself onto a new background.

    This is what you get when no foreground is estimated; the old
    background leaks through wherever alpha is fractional.
    """
    return compose(image, bg, alpha)


def _axis_samples(src_len, dst_len):
    # pixel centers aligned: x_src = (x_dst + 0.5) * src/dst - 0.5, clamped to the edge
    pos = (np.arange(dst_len, dtype=np.float64) + 0.5) * (src_len / dst_len) - 0.5
    pos = np.clip(pos, 0.0, src_len - 1)
    i0 = np.floor(pos).astype(np.intp)
    i1 = np.minimum(i0 + 1, src_len - 1)
    t = pos - i0
    return i0, i1, t


def resize(src, new_width, new_height):
    """Bilinear resize with edge clamping.

    Works on both ``(h, w)`` mattes and ``(h, w, c)`` images; the output has
    the same kind as the input. Resizing to the current size returns a copy.
    """
    new_width = int(new_width)
    new_height = int(new_height)
    if new_width < 1 or new_height < 1:
        raise ValueError(f"target size must be at least 1x1, got {new_width}x{new_height}")
    src = np.asarray(src, dtype=np.float64)
    h, w = src.shape[:2]
    if (w, h) == (new_width, new_height):
        return src.copy()

    y0, y1, ty = _axis_samples(h, new_height)
    x0, x1, tx = _axis_samples(w, new_width)
    extra = (None,) * (src.ndim - 2)
    tx = tx[(None, slice(None)) + extra]
    ty = ty[(slice(None), None) + extra]

    top = src[y0]
    bottom = src[y1]
    top = (1.0 - tx) * top[:, x0] + tx * top[:, x1]
    bottom = (1.0 - tx) * bottom[:, x0] + tx * bottom[:, x1]
    out = (1.0 - ty) * top + ty * bottom
    return np.clip(out, 0.0, 1.0)


def solid_color(width, height, color):
    """Constant ``(height, width, len(color))`` image."""
    color = np.asarray(color, dtype=np.float64)
    return np.broadcast_to(color, (height, width, color.size)).copy()
