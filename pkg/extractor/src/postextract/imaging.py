"""Image decoding and the two working resolutions.

Inputs arrive at whatever size the crawl produced; every image is decoded
to RGB and resized to the selected working resolution before any encoder
sees it. 150 maps to the square 150x150 pipeline, 320 to the larger
320x240 variant used by the resolution consistency study.
"""

from __future__ import annotations

import logging
import os

import numpy as np
from PIL import Image, UnidentifiedImageError

log = logging.getLogger(__name__)

SIZE_MAP = {150: (150, 150), 320: (320, 240)}


def load_rgb(path: str, image_size: int) -> np.ndarray | None:
    """Decode to a HxWx3 uint8 array at the working size, None if undecodable.

    A missing or corrupt file is reported by the caller as a skipped post,
    not a fatal error, so one bad download cannot sink a batch.
    """
    target = SIZE_MAP[image_size]
    if not os.path.isfile(path):
        return None
    try:
        with Image.open(path) as img:
            rgb = img.convert("RGB").resize(target, Image.Resampling.BILINEAR)
            return np.asarray(rgb, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, ValueError):
        return None
