"""The eight parametrized families of two-star decompositions of a quartet.

Everything is written for the reference labelling: the tree has split
``(12|34)``, internal weight ``g`` and pendant weights ``e1..e4``; the free
parameters are ``u`` and ``w``.  Families ``1.x`` exist iff ``e1, e2 > g`` and
families ``2.x`` iff ``e3, e4 > g``.

For the ``1.x`` families leaves 3 and 4 follow the same pattern, so they are
stored once for a generic far-side leaf with pendant ``ej``; that row is reused
for every leaf of the larger side of an n-taxon double star.

Domains are lists of affine constraints ``expr > 0`` (strict) or ``expr >= 0``.
``"ej"`` inside a domain constraint means "one copy per far-side leaf".
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

_TERM = re.compile(r"([+-]?)\s*(\d+(?:/\d+)?)?\s*\*?\s*([a-z]\w*)?(?:\s*/\s*(\d+))?")


@dataclass(frozen=True)
class Affine:
    """An affine form: symbol -> coefficient, with ``""`` for the constant."""

    terms: tuple[tuple[str, Fraction], ...]

    @classmethod
    def parse(cls, text: str) -> "Affine":
        acc: dict[str, Fraction] = {}
        s = text.replace(" ", "")
        pos = 0
        while pos < len(s):
            m = _TERM.match(s, pos)
            if not m or m.end() == pos:
                raise ValueError(f"cannot parse {text!r} at {s[pos:]!r}")
            sign, num, sym, div = m.groups()
            if num is None and sym is None:
                raise ValueError(f"cannot parse {text!r} at {s[pos:]!r}")
            c = Fraction(num) if num else Fraction(1)
            if div:
                c /= int(div)
            if sign == "-":
                c = -c
            key = sym or ""
            acc[key] = acc.get(key, Fraction(0)) + c
            pos = m.end()
        return cls(tuple(sorted((k, v) for k, v in acc.items() if v != 0)))

    def coeff(self, sym: str) -> Fraction:
        return dict(self.terms).get(sym, Fraction(0))

    def substitute(self, env: Mapping[str, Fraction]) -> "Affine":
        """Replace every symbol found in ``env`` by its value."""
        acc: dict[str, Fraction] = {}
        for sym, c in self.terms:
            if sym in env:
                acc[""] = acc.get("", Fraction(0)) + c * env[sym]
            else:
                acc[sym] = acc.get(sym, Fraction(0)) + c
        return Affine(tuple(sorted((k, v) for k, v in acc.items() if v != 0)))

    def value(self, env: Mapping[str, Fraction]) -> Fraction:
        rest = self.substitute(env)
        if any(sym for sym, _ in rest.terms):
            raise KeyError(f"unbound symbols in {self}")
        return rest.coeff("")

    def rename(self, old: str, new: str) -> "Affine":
        return Affine(tuple(sorted((new if k == old else k, v) for k, v in self.terms)))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        order = sorted(self.terms, key=lambda kv: (kv[0] == "", kv[0]))
        for sym, c in order:
            mag = abs(c)
            if sym == "":
                body = str(mag)
            elif mag == 1:
                body = sym
            elif mag.denominator != 1 and mag.numerator == 1:
                body = f"{sym}/{mag.denominator}"
            else:
                body = f"{mag}*{sym}"
            parts.append(("-" if c < 0 else "+") + body)
        out = "".join(parts)
        return out[1:] if out.startswith("+") else out


@dataclass(frozen=True)
class CaseTable:
    case_id: str
    side: int  # 1: needs e1,e2 > g;  2: needs e3,e4 > g
    outer: str  # grid variable whose range does not depend on the other
    first: Mapping[str, str]  # leaf role -> weight of the first star
    second: Mapping[str, str]  # leaf role -> weight of the second star
    domain: tuple[tuple[str, bool], ...]  # (expr, strict) meaning expr > 0 / expr >= 0


def _t(case_id, side, outer, first, second, domain):
    return CaseTable(case_id, side, outer, first, second, tuple(domain))


# Leaf roles: "1", "2" for the near side; "j" for a generic far-side leaf (1.x),
# or "3", "4" individually (2.x, four taxa only).
TABLES: dict[str, CaseTable] = {
    t.case_id: t
    for t in [
        _t(
            "1.1", 1, "u",
            {"1": "e1-g-u", "2": "e2+g", "j": "ej"},
            {"1": "e1+g-w/2", "2": "e2-g+w/2", "j": "ej+w/2"},
            [("e1-g-u", True), ("u", False), ("-w", True),
             ("w+2e2-2g", True), ("w+2ej", True)],
        ),
        _t(
            "1.2", 1, "u",
            {"1": "e1-g-w/2", "2": "e2+g+w/2", "j": "ej-w/2"},
            {"1": "e1+g", "2": "e2-g+u", "j": "ej"},
            [("-u", True), ("u-g+e2", True), ("w", False),
             ("2ej-w", True), ("2e1-2g-w", True)],
        ),
        _t(
            "1.3", 1, "w",
            {"1": "e1-g-u-w/2", "2": "e2+g+w/2", "j": "ej-w/2"},
            {"1": "e1+g", "2": "e2-g", "j": "ej"},
            [("e1-g-w/2-u", True), ("u", False), ("w", False),
             ("2ej-w", True), ("2e1-2g-w", True)],
        ),
        _t(
            "1.4", 1, "w",
            {"1": "e1-g", "2": "e2+g", "j": "ej"},
            {"1": "e1+g-w/2", "2": "e2-g+u+w/2", "j": "ej+w/2"},
            [("-u", True), ("u-g+e2+w/2", True), ("-w", True),
             ("w+2ej", True), ("w+2e2-2g", True)],
        ),
        _t(
            "2.1", 2, "u",
            {"1": "e1-u/2", "2": "e2-u/2", "3": "e3-g-u/2", "4": "e4+g+u/2"},
            {"1": "e1", "2": "e2", "3": "e3+g", "4": "e4-g+w"},
            [("2e1-u", True), ("2e2-u", True), ("2e3-2g-u", True), ("u", False),
             ("-w", True), ("w-g+e4", True)],
        ),
        _t(
            "2.2", 2, "u",
            {"1": "e1", "2": "e2", "3": "e3-g-w", "4": "e4+g"},
            {"1": "e1+u/2", "2": "e2+u/2", "3": "e3+g-u/2", "4": "e4-g+u/2"},
            [("-u", True), ("u+2e4-2g", True), ("u+2e1", True), ("u+2e2", True),
             ("e3-g-w", True), ("w", False)],
        ),
        _t(
            "2.3", 2, "u",
            {"1": "e1-u/2", "2": "e2-u/2", "3": "e3-g-u/2-w", "4": "e4+g+u/2"},
            {"1": "e1", "2": "e2", "3": "e3+g", "4": "e4-g"},
            [("2e2-u", True), ("2e1-u", True), ("2e3-2g-u", True), ("u", False),
             ("e3-g-u/2-w", True), ("w", False)],
        ),
        _t(
            "2.4", 2, "u",
            {"1": "e1", "2": "e2", "3": "e3-g", "4": "e4+g"},
            {"1": "e1+u/2", "2": "e2+u/2", "3": "e3+g-u/2", "4": "e4-g+u/2+w"},
            [("-u", True), ("u+2e1", True), ("u+2e2", True), ("u+2e4-2g", True),
             ("-w", True), ("w-g+e4+u/2", True)],
        ),
    ]
}

# Relabelling leaves (1,2) <-> (3,4) and exchanging u <-> w carries each
# 1.x family onto its 2.x partner.
PARTNER = {"1.1": "2.2", "1.2": "2.1", "1.3": "2.3", "1.4": "2.4"}
