"""Face detection feeding the 3-vector (count, confidence, area ratio).

Backends return rectangles and per-face scores; `face_vector` turns them
into the record fields. The laws live here, not in the backends: zero
faces means confidence and area are exactly 0.0, confidence is the mean
detector score, and the area ratio is the summed box area over the image
area, clipped to [0, 1] (boxes can overlap or overshoot the frame).

`SkinRegionDetector` is the no-weights default: classical skin-tone
segmentation in YCrCb space followed by connected-component filtering on
size, aspect ratio, and fill. It is deterministic and needs nothing on
disk, at the cost of classical-CV accuracy: it finds face-like skin
blobs, not identities. `YuNetDetector` plugs in OpenCV's YuNet ONNX
model for real deployments and fails fast, naming the model, when the
file is absent.
"""

from __future__ import annotations

import os

import cv2
import numpy as np


class SkinRegionDetector:
    """Skin-tone connected components with face-plausible geometry."""

    # Cr/Cb skin band; grey pixels (Cr=Cb=128) fall outside on Cr.
    CR_RANGE = (135.0, 180.0)
    CB_RANGE = (85.0, 135.0)
    MIN_LUMA = 40.0
    MIN_AREA_FRAC = 0.02  # components smaller than 2% of the frame are noise
    ASPECT_RANGE = (0.4, 2.5)  # width/height of the bounding box
    MIN_FILL = 0.45  # component pixels over box pixels

    def boxes(self, img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        h, w = img.shape[:2]
        ycrcb = cv2.cvtColor(img, cv2.COLOR_RGB2YCrCb).astype(np.float64)
        luma, cr, cb = ycrcb[..., 0], ycrcb[..., 1], ycrcb[..., 2]
        mask = (
            (luma >= self.MIN_LUMA)
            & (cr >= self.CR_RANGE[0]) & (cr <= self.CR_RANGE[1])
            & (cb >= self.CB_RANGE[0]) & (cb <= self.CB_RANGE[1])
        ).astype(np.uint8)
        n, _, stats, _ = cv2.connectedComponentsWithStats(mask, connectivity=8)
        rects: list[tuple[int, int, int, int]] = []
        scores: list[float] = []
        min_area = self.MIN_AREA_FRAC * h * w
        for i in range(1, n):  # label 0 is background
            x, y, bw, bh, area = (int(stats[i, k]) for k in range(5))
            if area < min_area or bw == 0 or bh == 0:
                continue
            aspect = bw / bh
            if not (self.ASPECT_RANGE[0] <= aspect <= self.ASPECT_RANGE[1]):
                continue
            fill = area / (bw * bh)
            if fill < self.MIN_FILL:
                continue
            # geometry score squashed to (0, 1): fuller, squarer blobs rank higher
            raw = 6.0 * fill + 2.0 * min(aspect, 1.0 / aspect) - 4.5
            rects.append((x, y, bw, bh))
            scores.append(float(1.0 / (1.0 + np.exp(-raw))))
        return np.asarray(rects, dtype=np.int64).reshape(-1, 4), np.asarray(scores)


class YuNetDetector:
    """OpenCV FaceDetectorYN wrapper for a user-supplied ONNX model."""

    MODEL_NAME = "yunet"

    def __init__(self, model_path: str, score_threshold: float = 0.6):
        if not os.path.isfile(model_path):
            raise FileNotFoundError(
                f"face model {self.MODEL_NAME}: missing weights file {model_path}"
            )
        self._det = cv2.FaceDetectorYN_create(
            model_path, "", (0, 0), score_threshold=score_threshold
        )

    def boxes(self, img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        h, w = img.shape[:2]
        self._det.setInputSize((w, h))
        _, faces = self._det.detect(cv2.cvtColor(img, cv2.COLOR_RGB2BGR))
        if faces is None or len(faces) == 0:
            return np.zeros((0, 4), dtype=np.int64), np.zeros(0)
        rects = faces[:, :4].astype(np.int64)
        scores = faces[:, 14].astype(np.float64)
        return rects, scores


def face_vector(detector, img: np.ndarray) -> tuple[int, float, float]:
    """(count, mean confidence, clipped summed-box area ratio) for one image."""
    rects, scores = detector.boxes(img)
    count = int(rects.shape[0])
    if count == 0:
        return 0, 0.0, 0.0
    h, w = img.shape[:2]
    area = float(np.clip((rects[:, 2] * rects[:, 3]).sum() / (h * w), 0.0, 1.0))
    return count, float(scores.mean()), area
