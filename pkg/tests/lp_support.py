"""Test-side LP text parsing and external MILP solving via scipy's HiGHS.

Kept independent of the package so the exported model is exercised the way a
third-party solver would see it.
"""
from __future__ import annotations

import re

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

_TERM_RE = re.compile(r"([+-]?)\s*(\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)?\s*([A-Za-z_][\w]*)")


def _parse_terms(text: str) -> list[tuple[float, str]]:
    terms = []
    for sign, coef, name in _TERM_RE.findall(text):
        value = float(coef) if coef else 1.0
        if sign == "-":
            value = -value
        terms.append((value, name))
    return terms


def parse_lp(text: str) -> dict:
    """Parse the subset of LP format produced by the package's writer."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("\\")]
    section = None
    objective: list[tuple[float, str]] = []
    obj_buffer: list[str] = []
    rows: list[tuple[str, list[tuple[float, str]], str, float]] = []
    bounds: dict[str, tuple[float, float]] = {}
    binaries: set[str] = set()
    generals: set[str] = set()
    for ln in lines:
        stripped = ln.strip()
        lowered = stripped.lower()
        if lowered in ("minimize", "maximize"):
            section = "objective"
            continue
        if lowered == "subject to":
            section = "rows"
            continue
        if lowered == "bounds":
            section = "bounds"
            continue
        if lowered == "binaries":
            section = "binaries"
            continue
        if lowered == "generals":
            section = "generals"
            continue
        if lowered == "end":
            break
        if section == "objective":
            obj_buffer.append(stripped)
        elif section == "rows":
            name, _, body = stripped.partition(":")
            for sense in ("<=", ">=", "="):
                if sense in body:
                    lhs, _, rhs = body.partition(sense)
                    rows.append((name.strip(), _parse_terms(lhs), sense, float(rhs)))
                    break
        elif section == "bounds":
            lo, var, hi = re.match(
                r"\s*(-?[\d.]+)\s*<=\s*(\w+)\s*<=\s*(-?[\d.]+)", stripped
            ).groups()
            bounds[var] = (float(lo), float(hi))
        elif section == "binaries":
            binaries.update(stripped.split())
        elif section == "generals":
            generals.update(stripped.split())
    obj_text = " ".join(obj_buffer)
    obj_text = obj_text.partition(":")[2] if ":" in obj_text else obj_text
    objective = _parse_terms(obj_text)
    return {
        "objective": objective,
        "rows": rows,
        "bounds": bounds,
        "binaries": binaries,
        "generals": generals,
    }


def solve_lp_milp(text: str) -> float:
    """Solve a parsed LP exactly with HiGHS; returns the optimal objective."""
    model = parse_lp(text)
    names: list[str] = []
    index: dict[str, int] = {}

    def var_id(name: str) -> int:
        if name not in index:
            index[name] = len(names)
            names.append(name)
        return index[name]

    for _, terms, _, _ in model["rows"]:
        for _, name in terms:
            var_id(name)
    for _, name in model["objective"]:
        var_id(name)
    for name in model["binaries"] | model["generals"] | set(model["bounds"]):
        var_id(name)

    n = len(names)
    c = np.zeros(n)
    for coef, name in model["objective"]:
        c[index[name]] += coef

    data, rix, cix, lo, hi = [], [], [], [], []
    for rnum, (_, terms, sense, rhs) in enumerate(model["rows"]):
        for coef, name in terms:
            data.append(coef)
            rix.append(rnum)
            cix.append(index[name])
        if sense == "<=":
            lo.append(-np.inf)
            hi.append(rhs)
        elif sense == ">=":
            lo.append(rhs)
            hi.append(np.inf)
        else:
            lo.append(rhs)
            hi.append(rhs)
    a = sparse.csr_matrix((data, (rix, cix)), shape=(len(model["rows"]), n))

    lb = np.zeros(n)
    ub = np.ones(n)
    integrality = np.zeros(n)
    for name in model["binaries"]:
        integrality[index[name]] = 1
    for name in model["generals"]:
        integrality[index[name]] = 1
        lb[index[name]], ub[index[name]] = 0, np.inf
    for name, (vlo, vhi) in model["bounds"].items():
        lb[index[name]], ub[index[name]] = vlo, vhi

    res = milp(
        c,
        constraints=LinearConstraint(a, np.array(lo), np.array(hi)),
        integrality=integrality,
        bounds=Bounds(lb, ub),
    )
    if not res.success:
        raise RuntimeError(f"external MILP solve failed: {res.message}")
    return float(res.fun)
