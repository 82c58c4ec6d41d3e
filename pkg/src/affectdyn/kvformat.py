"""Flat key-value text format shared by scenario and manifest files.

Lines are ``key = value``; ``#`` starts a comment; blank lines are skipped.
Keys may carry 1-based bracket indices, e.g. ``f[2][1]``.
"""

from __future__ import annotations

import re

_LINE = re.compile(r"^\s*([^=\s][^=]*?)\s*=\s*(.*?)\s*$")
_KEY = re.compile(r"^([A-Za-z_][A-Za-z0-9_.]*)((?:\[\d+\])*)$")


class FormatError(ValueError):
    """Malformed key-value file; carries the 1-based line number."""

    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def parse_kv_text(text):
    """Parse key-value lines into [(lineno, key, indices, value)].

    ``key`` is the dotted name without brackets, ``indices`` the tuple of
    1-based integers found in brackets (possibly empty).
    """
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _LINE.match(line)
        if m is None:
            raise FormatError(lineno, f"expected 'key = value', got {raw!r}")
        keypart, value = m.group(1), m.group(2)
        km = _KEY.match(keypart)
        if km is None:
            raise FormatError(lineno, f"bad key syntax {keypart!r}")
        name = km.group(1)
        idx = tuple(int(s) for s in re.findall(r"\[(\d+)\]", km.group(2)))
        out.append((lineno, name, idx, value))
    return out


def parse_float(lineno, key, value):
    try:
        return float(value)
    except ValueError:
        raise FormatError(lineno, f"{key}: expected a number, got {value!r}") from None


def parse_int(lineno, key, value):
    try:
        return int(value)
    except ValueError:
        raise FormatError(lineno, f"{key}: expected an integer, got {value!r}") from None
