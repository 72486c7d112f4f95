"""Canonical encodings for group elements and space points.

Every element and point handled by this package is a *canonical value*:
an int, a Fraction in lowest terms, a short alphabetic tag (e.g. "inf"),
or a tuple of canonical values.  Two elements are equal iff their
canonical encodings are identical, and the encoding induces the total
order used for all deterministic iteration and tie-breaking.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Iterator

Canon = Any  # int | Fraction | str | tuple[Canon, ...]

_RANK_NUMBER = 0
_RANK_TAG = 1
_RANK_TUPLE = 2


def sort_key(value: Canon):
    """Total-order key; numbers < tags < tuples, tuples lexicographic."""
    if isinstance(value, bool):
        raise TypeError("bool is not a canonical value")
    if isinstance(value, int) or isinstance(value, Fraction):
        return (_RANK_NUMBER, value, _den(value))
    if isinstance(value, str):
        return (_RANK_TAG, value)
    if isinstance(value, tuple):
        return (_RANK_TUPLE, tuple(sort_key(v) for v in value))
    raise TypeError(f"not a canonical value: {value!r}")


def _den(value) -> int:
    return value.denominator if isinstance(value, Fraction) else 1


def canon_str(value: Canon) -> str:
    """Canonical string form: ints, "num/den" rationals, tags, "(a,b)" tuples.

    Integral rationals encode as plain integers: values that compare
    equal must have byte-identical encodings.
    """
    if isinstance(value, bool):
        raise TypeError("bool is not a canonical value")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, str):
        if not value.isalpha():
            raise ValueError(f"tag must be alphabetic: {value!r}")
        return value
    if isinstance(value, tuple):
        return "(" + ",".join(canon_str(v) for v in value) + ")"
    raise TypeError(f"not a canonical value: {value!r}")


def encoding(value: Canon) -> bytes:
    """Canonical byte encoding (UTF-8 of the canonical string)."""
    return canon_str(value).encode()


def parse_canon(text: str) -> Canon:
    """Inverse of :func:`canon_str`."""
    value, rest = _parse(text, 0)
    if rest != len(text):
        raise ValueError(f"trailing input at {rest}: {text!r}")
    return value


def _parse(text: str, i: int) -> tuple[Canon, int]:
    if i >= len(text):
        raise ValueError("unexpected end of input")
    ch = text[i]
    if ch == "(":
        items = []
        i += 1
        if i < len(text) and text[i] == ")":
            return (), i + 1
        while True:
            item, i = _parse(text, i)
            items.append(item)
            if i >= len(text):
                raise ValueError("unterminated tuple")
            if text[i] == ",":
                i += 1
                continue
            if text[i] == ")":
                return tuple(items), i + 1
            raise ValueError(f"bad tuple separator at {i}: {text!r}")
    if ch.isalpha():
        j = i
        while j < len(text) and text[j].isalpha():
            j += 1
        return text[i:j], j
    j = i
    if ch == "-":
        j += 1
    while j < len(text) and text[j].isdigit():
        j += 1
    if j == i or (text[i] == "-" and j == i + 1):
        raise ValueError(f"bad token at {i}: {text!r}")
    num = int(text[i:j])
    if j < len(text) and text[j] == "/":
        k = j + 1
        while k < len(text) and text[k].isdigit():
            k += 1
        if k == j + 1:
            raise ValueError(f"bad denominator at {j}: {text!r}")
        return Fraction(num, int(text[j + 1 : k])), k
    return num, j


def parse_fraction(text: str) -> Fraction:
    """Parse "num/den" or a plain integer string into an exact Fraction."""
    if not isinstance(text, str):
        return Fraction(text)
    return Fraction(text) if "/" in text else Fraction(int(text))


def fraction_str(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def sorted_canon(values) -> list:
    return sorted(values, key=sort_key)


def iter_sorted(values) -> Iterator:
    return iter(sorted_canon(values))
