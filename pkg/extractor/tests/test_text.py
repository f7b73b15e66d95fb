"""Text encoder contract: absence on empty, shapes, heads, determinism."""

from __future__ import annotations

import numpy as np
import pytest

from postextract.language import detect_language
from postextract.text import PretrainedTextEncoder, SeededTextEncoder, extract_text


def test_empty_sentence_list_yields_absent_fields():
    assert extract_text(SeededTextEncoder(), (), detect_language) is None


def test_shapes_and_simplex_laws():
    enc = SeededTextEncoder()
    sentences = (("The canal was calm this morning.", "en"),)
    result = extract_text(enc, sentences, detect_language)
    assert result.hidden.shape == (768,)
    for head in (result.hv_a, result.hv_b):
        assert head.shape == (11,)
        assert np.all(head >= 0.0) and abs(head.sum() - 1.0) <= 1e-12
    assert not np.array_equal(result.hv_a, result.hv_b)  # two distinct annotators
    assert result.langs == ("en",)


def test_language_codes_pass_through_or_get_detected():
    enc = SeededTextEncoder()
    sentences = (
        ("Die alte Kirche ist sehr schön und wir haben den Turm bestiegen.", None),
        ("The organ concert was lovely.", "en"),
    )
    result = extract_text(enc, sentences, detect_language)
    assert result.langs == ("de", "en")


def test_deterministic_across_instances():
    sentences = (("We hebben veel foto's gemaakt bij de gracht.", "nl"),)
    first = extract_text(SeededTextEncoder(), sentences, detect_language)
    second = extract_text(SeededTextEncoder(), sentences, detect_language)
    assert first.hidden.tobytes() == second.hidden.tobytes()
    assert first.hv_a.tobytes() == second.hv_a.tobytes()
    assert first.hv_b.tobytes() == second.hv_b.tobytes()


def test_paragraph_embedding_joins_sentences():
    enc = SeededTextEncoder()
    single = extract_text(enc, (("one lone sentence here", None),), detect_language)
    joined = enc.embed("one lone sentence here")
    assert np.array_equal(single.hidden, joined)
    multi = extract_text(
        enc,
        (("the first thought", None), ("an entirely different second one", None)),
        detect_language,
    )
    assert not np.array_equal(multi.hidden, enc.embed("the first thought"))


def test_embedding_is_normalized_and_content_sensitive():
    enc = SeededTextEncoder()
    a = enc.embed("water light bridge")
    b = enc.embed("tower church square")
    assert abs(np.linalg.norm(a) - 1.0) <= 1e-12
    assert not np.array_equal(a, b)
    assert np.array_equal(enc.embed(""), np.zeros(768))  # wordless text stays zero


def test_missing_pretrained_model_dir_is_fatal_with_model_name(tmp_path):
    missing = tmp_path / "no-model"
    with pytest.raises(FileNotFoundError) as err:
        PretrainedTextEncoder(str(missing))
    assert "sentence-bert" in str(err.value)
    assert str(missing) in str(err.value)
