"""Text normalization: lowercase, numerals to words, punctuation stripping,
abbreviation expansion.

Applied identically to ground-truth texts and ASR transcriptions so that
formatting differences ("1" vs "one", "Mr" vs "Mister") never count as
transcription errors.
"""
from __future__ import annotations

import re
from pathlib import Path

__all__ = [
    "UnsupportedMagnitudeError",
    "DEFAULT_ABBREVIATIONS",
    "load_abbreviation_table",
    "number_to_words",
    "expand_abbreviations",
    "normalize_text",
    "is_valid_token",
]


class UnsupportedMagnitudeError(ValueError):
    """Numeral too large to spell out (>= 10^12)."""


# Unicode apostrophe variants folded to ASCII before tokenization.
_APOSTROPHE_VARIANTS = str.maketrans({
    "‘": "'", "’": "'", "ʼ": "'", "′": "'",
})

_DIGIT_RUN_RE = re.compile(r"[0-9]+")
# Anything that is not a lowercase ASCII letter, apostrophe or whitespace is
# punctuation and becomes a space (so hyphens split words). Runs after digit
# conversion, which leaves no digits behind.
_PUNCT_RE = re.compile(r"[^a-z'\s]+")
_TOKEN_RE = re.compile(r"[a-z']+")

DEFAULT_ABBREVIATIONS: dict[str, tuple[str, ...]] = {
    "mr": ("mister",),
    "mrs": ("missus",),
    "dr": ("doctor",),
    "st": ("saint",),
    "etc": ("et", "cetera"),
}

_ONES = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen",
]
_TENS = [
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy",
    "eighty", "ninety",
]
_SCALES = [(10 ** 9, "billion"), (10 ** 6, "million"), (10 ** 3, "thousand")]

_MAX_NUMERAL = 10 ** 12


def number_to_words(numeral: str) -> list[str]:
    """Spell a decimal digit string as lowercase English cardinal words.

    American style: no hyphens, no "and". Leading zeros are read as the
    underlying integer ("007" -> seven).
    """
    if not numeral or not numeral.isascii() or not numeral.isdigit():
        raise ValueError(f"not a digit string: {numeral!r}")
    value = int(numeral)
    if value >= _MAX_NUMERAL:
        raise UnsupportedMagnitudeError(
            f"numeral {numeral} is >= 10^12; cannot spell out"
        )
    return _int_to_words(value)


def _int_to_words(value: int) -> list[str]:
    if value < 20:
        return [_ONES[value]]
    if value < 100:
        tens, ones = divmod(value, 10)
        words = [_TENS[tens]]
        if ones:
            words.append(_ONES[ones])
        return words
    if value < 1000:
        hundreds, rest = divmod(value, 100)
        words = [_ONES[hundreds], "hundred"]
        if rest:
            words.extend(_int_to_words(rest))
        return words
    for scale, name in _SCALES:
        if value >= scale:
            count, rest = divmod(value, scale)
            words = _int_to_words(count) + [name]
            if rest:
                words.extend(_int_to_words(rest))
            return words
    raise AssertionError("unreachable")


def load_abbreviation_table(path: str | Path) -> dict[str, tuple[str, ...]]:
    """Load an abbreviation table from a UTF-8 file.

    One `abbrev<TAB>expansion` pair per line; `#` starts a comment line.
    Keys are case-folded; a single trailing period on the key is dropped.
    """
    table: dict[str, tuple[str, ...]] = {}
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "\t" not in line:
            raise ValueError(f"{path}:{lineno}: expected abbrev<TAB>expansion")
        abbrev, expansion = line.split("\t", 1)
        key = abbrev.strip().casefold().removesuffix(".")
        words = tuple(expansion.strip().casefold().split())
        if not key or not words:
            raise ValueError(f"{path}:{lineno}: empty abbreviation or expansion")
        if key in table:
            raise ValueError(f"{path}:{lineno}: duplicate abbreviation {key!r}")
        if not all(is_valid_token(w) for w in words):
            raise ValueError(
                f"{path}:{lineno}: expansion must be normalized tokens: {words}"
            )
        table[key] = words
    return table


def expand_abbreviations(
    tokens: list[str], table: dict[str, tuple[str, ...]] | None = None
) -> list[str]:
    """Replace every token with an exact table match (ignoring one trailing
    period) by its expansion; non-matching tokens pass through."""
    if table is None:
        table = DEFAULT_ABBREVIATIONS
    out: list[str] = []
    for token in tokens:
        expansion = table.get(token.removesuffix("."))
        if expansion is not None:
            out.extend(expansion)
        else:
            out.append(token)
    return out


def normalize_text(
    raw: str, table: dict[str, tuple[str, ...]] | None = None
) -> list[str]:
    """Normalize arbitrary text into comparable lowercase word tokens.

    Case-folds, spells out every maximal digit run as cardinal words, strips
    all punctuation except apostrophes, splits on whitespace, and expands
    abbreviations. Idempotent: feeding the joined output back in reproduces
    the same token sequence.
    """
    if table is None:
        table = DEFAULT_ABBREVIATIONS
    text = raw.casefold().translate(_APOSTROPHE_VARIANTS)
    text = _DIGIT_RUN_RE.sub(
        lambda m: " " + " ".join(number_to_words(m.group())) + " ", text
    )
    text = _PUNCT_RE.sub(" ", text)
    # Tokens with no letters (stray apostrophe runs) carry no speech content.
    tokens = [t for t in text.split() if any("a" <= c <= "z" for c in t)]
    # Expand to a fixpoint so custom tables whose expansions contain further
    # abbreviations still normalize idempotently.
    for _ in range(10):
        expanded = expand_abbreviations(tokens, table)
        if expanded == tokens:
            break
        tokens = expanded
    return tokens


def is_valid_token(token: str) -> bool:
    """True iff the token is in the normalized output alphabet."""
    return bool(_TOKEN_RE.fullmatch(token)) and any("a" <= c <= "z" for c in token)
