"""Offline language identification.

No network service and no machine translation: raw sentences keep their
text, and posts only gain three presence flags (English, local language,
anything else). Codes supplied by the crawl are trusted as-is; missing
codes are filled by a small deterministic detector that first checks the
script of the text and then scores function-word hits per language.

The detector is intentionally modest. It covers the languages that
dominate European photo-sharing captions plus the major non-Latin scripts;
everything it cannot place is tagged "und", which downstream counts as
"other". Callers with better metadata can pass codes through and bypass
it entirely.
"""

from __future__ import annotations

import re

_WORD_RE = re.compile(r"[^\W\d_]+", re.UNICODE)

# Unicode block probes for non-Latin scripts. First match wins; kana must
# precede the shared CJK ideograph block or Japanese text reads as Chinese.
_SCRIPTS = (
    ("ja", re.compile(r"[぀-ヿ]")),
    ("zh", re.compile(r"[一-鿿]")),
    ("ko", re.compile(r"[가-힯]")),
    ("ru", re.compile(r"[Ѐ-ӿ]")),
    ("el", re.compile(r"[Ͱ-Ͽ]")),
    ("ar", re.compile(r"[؀-ۿ]")),
    ("he", re.compile(r"[֐-׿]")),
)

# Function-word profiles. Highly ambiguous words ("de", "en") are assigned
# to the single language where they are most load-bearing.
_PROFILES: tuple[tuple[str, frozenset[str]], ...] = (
    ("en", frozenset(
        "the and is are was were of to in with this that for on it as at by "
        "from have has not but they we you our his her".split())),
    ("nl", frozenset(
        "de het een en van ik je niet dat op aan met voor naar zijn maar ook "
        "er bij dit wij hebben geen heel deze".split())),
    ("de", frozenset(
        "der die das und ist ein eine nicht mit von zu auf ich sie wir aber "
        "auch dem den im aus bei nach sehr haben wird".split())),
    ("fr", frozenset(
        "le la les des une et est dans pour que qui avec pas sur au ce il "
        "elle nous vous mais être son ses aux".split())),
    ("es", frozenset(
        "el la los las un una y es que por para con del se su muy pero como "
        "esta este lo al".split())),
    ("it", frozenset(
        "il lo la gli le un una e di che per con del della si molto ma come "
        "questo questa sono non".split())),
    ("pt", frozenset(
        "o os as um uma do da dos das não mais muito mas em ele ela são foi "
        "você também já".split())),
)


def detect_language(text: str) -> str:
    """Best-effort language code for one sentence, "und" when unplaceable."""
    for code, probe in _SCRIPTS:
        if probe.search(text):
            return code
    tokens = [t.lower() for t in _WORD_RE.findall(text)]
    if not tokens:
        return "und"
    best_code, best_hits = "und", 0
    for code, profile in _PROFILES:
        hits = sum(1 for t in tokens if t in profile)
        if hits > best_hits:
            best_code, best_hits = code, hits
    return best_code


def language_flag_vector(
    sentence_langs: list[str], local_lang: str
) -> tuple[int, int, int]:
    """(English present, local language present, any other present)."""
    en = int(any(code == "en" for code in sentence_langs))
    local = int(any(code == local_lang for code in sentence_langs))
    other = int(any(code not in ("en", local_lang) for code in sentence_langs))
    return en, local, other
