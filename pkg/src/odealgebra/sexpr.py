"""Minimal S-expression reader and writer.

Atoms are returned as ``int`` when they parse as integers and as ``str``
otherwise.  Lists become Python lists.  ``;`` starts a comment that runs to
the end of the line.
"""

from __future__ import annotations

import re
from typing import Any, Iterator

from .errors import ParseError

_TOKEN = re.compile(r"\s*(?:(;[^\n]*)|(\()|(\))|([^\s();]+))")


def _tokens(text: str) -> Iterator[tuple[str, int]]:
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            if text[pos:].strip() == "":
                return
            raise ParseError(f"unexpected character at offset {pos}: {text[pos]!r}")
        pos = m.end()
        if m.group(1):
            continue
        tok = m.group(2) or m.group(3) or m.group(4)
        if tok:
            yield tok, m.start(m.lastindex)


def _atom(tok: str) -> Any:
    try:
        return int(tok)
    except ValueError:
        return tok


def read_all(text: str) -> list[Any]:
    """Parse every top-level form in ``text``."""
    stack: list[list[Any]] = [[]]
    opened: list[int] = []
    for tok, off in _tokens(text):
        if tok == "(":
            stack.append([])
            opened.append(off)
        elif tok == ")":
            if len(stack) == 1:
                raise ParseError(f"unbalanced ')' at offset {off}")
            done = stack.pop()
            opened.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(_atom(tok))
    if len(stack) != 1:
        raise ParseError(f"unclosed '(' at offset {opened[-1]}")
    return stack[0]


def read_one(text: str) -> Any:
    forms = read_all(text)
    if len(forms) != 1:
        raise ParseError(f"expected exactly one form, found {len(forms)}")
    return forms[0]


def dumps(form: Any) -> str:
    if isinstance(form, list):
        return "(" + " ".join(dumps(f) for f in form) + ")"
    return str(form)
