"""Session fixtures built from the deterministic fixture data."""

from __future__ import annotations

import pytest

from fixture_data import fixture_images, train_artifacts, write_raw_file


@pytest.fixture(scope="session")
def fixture_batch(tmp_path_factory) -> dict:
    root = tmp_path_factory.mktemp("batch")
    images = root / "images"
    images.mkdir()
    for name, img in fixture_images().items():
        img.save(images / name)
    raw = root / "raw.ndjson"
    write_raw_file(str(raw))
    models = root / "models"
    models.mkdir()
    vote, stack = train_artifacts(str(models))
    return {
        "root": str(root),
        "images": str(images),
        "raw": str(raw),
        "vote": vote,
        "stack": stack,
    }
