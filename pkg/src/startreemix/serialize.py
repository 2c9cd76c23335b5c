"""JSON and text encodings for maps, trees, case families and oracle results.

Every rational is written as an exact string (``"3/2"``).  Top-level reports
carry ``"version": SCHEMA_VERSION``.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .metric import DissimilarityMap, from_matrix, make_dissimilarity, num_pairs, to_rational
from .mixture import CaseFamily, MixtureDecision, Offsets
from .oracle import Feasibility, RankSearch
from .trees import DoubleStar, StarTree, TopologyClass, WeightedTree

SCHEMA_VERSION = 1


def q(x: Fraction) -> str:
    return str(x)


def decimal(x: Fraction, digits: int) -> str:
    """Round half away from zero to ``digits`` places, computed exactly."""
    scale = 10**digits
    scaled = abs(x) * scale
    whole = int(scaled)
    if scaled - whole >= Fraction(1, 2):
        whole += 1
    sign = "-" if x < 0 and whole else ""
    text = str(whole).rjust(digits + 1, "0")
    if digits == 0:
        return sign + text
    return f"{sign}{text[:-digits]}.{text[-digits:]}"


# metric ---------------------------------------------------------------------

def metric_to_json(D: DissimilarityMap) -> dict:
    return {"n": D.n, "entries": [q(v) for v in D.entries]}


def metric_from_json(obj: dict) -> DissimilarityMap:
    return make_dissimilarity(int(obj["n"]), obj["entries"])


def parse_metric(text: str) -> DissimilarityMap:
    """Read either the JSON object form or a whitespace-separated square matrix."""
    stripped = text.strip()
    if stripped.startswith("{"):
        return metric_from_json(json.loads(stripped))
    rows = [line.split() for line in stripped.splitlines() if line.strip()]
    if len(rows) == 1 and rows[0]:
        # a single line is taken as the upper-triangular vector
        values = rows[0]
        n = 3
        while num_pairs(n) < len(values):
            n += 1
        return make_dissimilarity(n, values)
    return from_matrix(rows)


# trees ----------------------------------------------------------------------

def star_to_json(S: StarTree) -> dict:
    return {"weights": [q(w) for w in S.weights], "regime": S.regime}


def star_from_json(obj: dict) -> StarTree:
    return StarTree(tuple(to_rational(w) for w in obj["weights"]), obj.get("regime", "strict"))


def double_star_to_json(DS: DoubleStar) -> dict:
    return {
        "I": list(DS.I),
        "J": list(DS.J),
        "g": q(DS.g),
        "pendant": [q(w) for w in DS.pendant],
        "regime": DS.regime,
    }


def double_star_from_json(obj: dict) -> DoubleStar:
    pendant = tuple(to_rational(w) for w in obj["pendant"])
    I = tuple(obj["I"])
    J = tuple(obj.get("J") or [t for t in range(1, len(pendant) + 1) if t not in I])
    return DoubleStar(I, J, to_rational(obj["g"]), pendant, obj.get("regime", "strict"))


def tree_to_json(T: WeightedTree) -> dict:
    return {"n": T.n, "nodes": T.n + T.internal, "edges": [[u, v, q(w)] for u, v, w in T.edges]}


def tree_from_json(obj: dict) -> WeightedTree:
    n = int(obj["n"])
    return WeightedTree(n, int(obj["nodes"]) - n, tuple((u, v, to_rational(w)) for u, v, w in obj["edges"]))


def quartet_to_json(p) -> dict:
    return {
        "taxa": list(p.taxa),
        "sums": {"ij_kl": q(p.sum_ij_kl), "ik_jl": q(p.sum_ik_jl), "il_jk": q(p.sum_il_jk)},
        "attaining": sorted(p.attaining),
    }


def topology_to_json(tc: TopologyClass) -> dict:
    out: dict[str, Any] = {"kind": tc.kind, "degenerate": tc.degenerate}
    if tc.star is not None:
        out["star"] = star_to_json(tc.star)
    if tc.double_star is not None:
        out["double_star"] = double_star_to_json(tc.double_star)
    if tc.tree is not None:
        out["tree"] = tree_to_json(tc.tree)
    if tc.violation is not None:
        out["violation"] = quartet_to_json(tc.violation)
    return out


# decisions and families -------------------------------------------------------

def offsets_to_json(o: Offsets) -> dict:
    return {k: q(getattr(o, k)) for k in ("s", "t", "x", "y", "u", "w")}


def family_to_json(f: CaseFamily) -> dict:
    return f.describe()


def decision_to_json(d: MixtureDecision) -> dict:
    return {
        "verdict": d.verdict,
        "basis": d.basis,
        "regime": d.regime,
        "families": list(d.families),
        "provenance": d.provenance,
        "theorem_verdict": d.theorem_verdict,
        "oracle_verdict": d.oracle_verdict,
        "witness": None if d.witness is None else [star_to_json(s) for s in d.witness],
        "oracle": None if d.oracle is None else feasibility_to_json(d.oracle),
        "note": d.note,
    }


def feasibility_to_json(f: Feasibility) -> dict:
    return {
        "status": f.status,
        "k": f.k,
        "sign_mode": f.sign_mode,
        "witness": None if f.witness is None else [[q(w) for w in s.weights] for s in f.witness],
        "pattern": None if f.pattern is None else {f"{i},{j}": m for (i, j), m in f.pattern.items()},
        "patterns_checked": f.patterns_checked,
        "patterns_total": f.patterns_total,
    }


def rank_to_json(r: RankSearch) -> dict:
    return {
        "rank": r.rank,
        "above_k_max": r.above_k_max,
        "k_max": r.k_max,
        "sign_mode": r.sign_mode,
        "budget_exceeded_at": r.budget_exceeded_at,
        "results": {str(k): feasibility_to_json(v) for k, v in sorted(r.results.items())},
    }


_NOT_NUMERIC = {"formula", "instantiated", "case", "id", "command"}


def with_decimals(obj, digits: int | None):
    """Add a ``"~"``-suffixed decimal companion next to every rational string field."""
    if digits is None:
        return obj
    if isinstance(obj, dict):
        out = {}
        for k, v in obj.items():
            out[k] = with_decimals(v, digits)
            if isinstance(v, str) and _is_rational(v) and k not in _NOT_NUMERIC:
                out[k + "~"] = decimal(Fraction(v), digits)
            elif isinstance(v, list) and v and all(isinstance(x, str) and _is_rational(x) for x in v):
                out[k + "~"] = [decimal(Fraction(x), digits) for x in v]
        return out
    if isinstance(obj, list):
        return [with_decimals(x, digits) for x in obj]
    return obj


def _is_rational(s: str) -> bool:
    try:
        Fraction(s)
    except (ValueError, ZeroDivisionError):
        return False
    return True


def dumps(obj: dict) -> str:
    return json.dumps({"version": SCHEMA_VERSION, **obj}, indent=2, sort_keys=False)
