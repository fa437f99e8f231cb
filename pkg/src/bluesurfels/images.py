"""PNG/PPM output helpers."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image


def to_uint8(image: np.ndarray) -> np.ndarray:
    arr = np.asarray(image)
    if arr.dtype == np.uint8:
        return arr
    return np.clip(np.round(arr * 255.0), 0, 255).astype(np.uint8)


def save_image(path, image: np.ndarray) -> None:
    path = Path(path)
    arr = to_uint8(image)
    if arr.ndim == 3 and arr.shape[2] == 4 and path.suffix.lower() == ".ppm":
        arr = arr[..., :3]
    if path.suffix.lower() == ".ppm":
        h, w = arr.shape[:2]
        if arr.ndim == 2:
            arr = np.repeat(arr[..., None], 3, axis=2)
        with open(path, "wb") as fh:
            fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
            fh.write(arr[..., :3].tobytes())
    else:
        Image.fromarray(arr).save(path)


def load_image(path) -> np.ndarray:
    """Image as float RGB in [0, 1]."""
    img = Image.open(path).convert("RGB")
    return np.asarray(img, dtype=np.float64) / 255.0
