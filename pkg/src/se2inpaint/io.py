"""Grayscale image files: binary PGM (8 or 16 bit) and PNG.

In memory the package uses the ink convention (0 = white, 1 = black).
Ordinary image files store brightness, so with ``convention="paper"``
(the default) values are inverted on the way in and on the way out;
``convention="standard"`` keeps them as stored.
"""

import os
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ConfigurationError, ImageIOError
from .lift import project_max

CONVENTIONS = ("paper", "standard")
SUFFIXES = {".pgm": "PPM", ".png": "PNG"}


def _check_convention(convention):
    if convention not in CONVENTIONS:
        raise ConfigurationError(
            f"intensity convention must be one of {CONVENTIONS}, got {convention!r}"
        )


def convert_convention(image, convention):
    """Switch between stored brightness and in-memory values (an involution)."""
    _check_convention(convention)
    image = np.asarray(image, dtype=float)
    return 1.0 - image if convention == "paper" else image.copy()


def _format_for(path):
    fmt = SUFFIXES.get(Path(path).suffix.lower())
    if fmt is None:
        raise ImageIOError(
            f"{path}: unsupported extension {Path(path).suffix!r}; use .pgm or .png"
        )
    return fmt


def read_image(path, convention="paper"):
    """Load a grayscale image as floats in ``[0, 1]``.

    8-bit data is divided by 255 and 16-bit data by 65535 (Pillow has
    already stretched other PGM maxvals to these ranges). Colour PNGs are
    reduced to luma.
    """
    _check_convention(convention)
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("I", "I;16", "I;16B", "I;16L"):
                data = np.asarray(im, dtype=float) / 65535.0
            elif mode == "L":
                data = np.asarray(im, dtype=float) / 255.0
            elif mode in ("1", "P", "LA", "RGB", "RGBA"):
                data = np.asarray(im.convert("L"), dtype=float) / 255.0
            else:
                raise ImageIOError(f"{path}: unsupported pixel mode {mode!r}")
    except FileNotFoundError as exc:
        raise ImageIOError(f"{path}: no such file") from exc
    except UnidentifiedImageError as exc:
        raise ImageIOError(f"{path}: not a PGM or PNG image") from exc
    except OSError as exc:
        if isinstance(exc, ImageIOError):
            raise
        raise ImageIOError(f"{path}: cannot read image ({exc})") from exc
    if data.ndim != 2:
        raise ImageIOError(f"{path}: expected a single-channel image, got shape {data.shape}")
    return np.clip(convert_convention(data, convention), 0.0, 1.0)


def to_uint8(image, convention="paper"):
    stored = np.clip(convert_convention(image, convention), 0.0, 1.0)
    return np.rint(stored * 255.0).astype(np.uint8)


def write_image(image, path, convention="paper"):
    """Save an image as 8-bit binary PGM or 8-bit grayscale PNG (by extension)."""
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise ConfigurationError(f"expected a 2-D image, got shape {image.shape}")
    if not np.all(np.isfinite(image)):
        raise ConfigurationError("refusing to write an image with non-finite values")
    fmt = _format_for(path)
    try:
        Image.fromarray(to_uint8(image, convention), mode="L").save(path, format=fmt)
    except OSError as exc:
        raise ImageIOError(f"{path}: cannot write image ({exc})") from exc


def write_stack_slices(stack, directory, convention="paper", suffix=".png"):
    """Write ``theta_000`` ... one file per orientation, plus ``max_projection``.

    Returns the list of written paths, slices first.
    """
    stack = np.asarray(stack, dtype=float)
    if stack.ndim != 3:
        raise ConfigurationError(f"expected a 3-D stack, got shape {stack.shape}")
    _format_for("x" + suffix)
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as exc:
        raise ImageIOError(f"{directory}: cannot create directory ({exc})") from exc
    width = max(3, len(str(stack.shape[2] - 1)))
    paths = []
    for k in range(stack.shape[2]):
        path = os.path.join(directory, f"theta_{k:0{width}d}{suffix}")
        write_image(np.clip(stack[:, :, k], 0.0, 1.0), path, convention)
        paths.append(path)
    path = os.path.join(directory, f"max_projection{suffix}")
    write_image(project_max(stack), path, convention)
    paths.append(path)
    return paths


def read_mask(path):
    """Load a corruption mask: any pixel brighter than mid-gray is corrupted."""
    return read_image(path, convention="standard") > 0.5


def write_mask(mask, path):
    write_image(np.asarray(mask, dtype=float), path, convention="standard")
