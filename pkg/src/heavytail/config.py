"""JSON scenario configs.

Example::

    {
      "margins": {"kind": "iid", "alpha": 1, "kappa": [1, 1, 1]},
      "matrix_law": {"kind": "explicit",
                     "atoms": [{"matrix": [[1, 1, 0], [0, 1, 1], [1, 0, 1]], "prob": "1"}]},
      "risk_set": {"kind": "rect", "dim": 3, "k": 3,
                   "clauses": [{"coords": [0, 1, 2], "thresholds": [1, 1, 1]}]},
      "t_grid": [10, 20, 50], "samples": 1000000, "seed": 7
    }

Coordinates are 0-based. Probabilities may be "p/q" strings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from . import matrixlaw, network, risksets
from .errors import ValidationError
from .margins import MarginalModel


@dataclass
class Config:
    margins: MarginalModel | None
    law: object | None
    risk_set: risksets.RiskSet | None
    t_grid: list
    samples: int | None
    seed: int | None


def _num(v, where):
    try:
        if isinstance(v, str):
            return float(Fraction(v))
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise TypeError
        return float(v)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ValidationError(f"{where}: expected a number or 'p/q' string, got {v!r}") from None


def _prob(v, where):
    try:
        return matrixlaw.as_number(v)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ValidationError(f"{where}: expected a probability, got {v!r}") from None


def _matrix(v, where):
    if not isinstance(v, list) or not v or not all(isinstance(r, list) and r for r in v):
        raise ValidationError(f"{where}: expected a non-empty list of rows")
    if len({len(r) for r in v}) != 1:
        raise ValidationError(f"{where}: rows have different lengths")
    return [[_num(x, f"{where}[{r}][{c}]") for c, x in enumerate(row)] for r, row in enumerate(v)]


def _get(obj, key, where, default=...):
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected an object")
    if key not in obj:
        if default is ...:
            raise ValidationError(f"{where}.{key}: missing")
        return default
    return obj[key]


def parse_margins(m, where="margins") -> MarginalModel:
    kind = _get(m, "kind", where)
    alpha = _num(_get(m, "alpha", where), f"{where}.alpha")
    kappa = _get(m, "kappa", where)
    if not isinstance(kappa, list):
        raise ValidationError(f"{where}.kappa: expected a list")
    kappa = tuple(_num(k, f"{where}.kappa[{j}]") for j, k in enumerate(kappa))
    try:
        if kind == "iid":
            return MarginalModel("iid", alpha, kappa)
        if kind == "dependent":
            return MarginalModel("dependent", alpha, kappa,
                                 _num(_get(m, "rho", where, 1), f"{where}.rho"),
                                 _num(_get(m, "theta", where, 1), f"{where}.theta"))
    except ValidationError as e:
        raise ValidationError(f"{where}: {e}") from None
    raise ValidationError(f"{where}.kind: unknown kind {kind!r}")


def parse_law(spec, where="matrix_law"):
    kind = _get(spec, "kind", where)
    if kind == "explicit":
        atoms = _get(spec, "atoms", where)
        if not isinstance(atoms, list) or not atoms:
            raise ValidationError(f"{where}.atoms: expected a non-empty list")
        pairs = [(_matrix(_get(a, "matrix", f"{where}.atoms[{n}]"), f"{where}.atoms[{n}].matrix"),
                  _prob(_get(a, "prob", f"{where}.atoms[{n}]"), f"{where}.atoms[{n}].prob"))
                 for n, a in enumerate(atoms)]
        law = matrixlaw.explicit(pairs)
    elif kind == "onehot":
        q, d = int(_get(spec, "q", where)), int(_get(spec, "d", where))
        rule = _get(spec, "exclusion", where, None)
        weights = _get(spec, "weights", where, None)
        if rule is None:
            allowed = None
        elif rule == "own-index":
            allowed = network.own_index_allowed(q, d)
        elif isinstance(rule, dict) and "window" in rule:
            allowed = network.window_allowed(d, int(rule["window"]))
        else:
            raise ValidationError(f"{where}.exclusion: expected null, 'own-index' or {{'window': m}}")
        law = matrixlaw.onehot(q, d, allowed, None if weights is None else _matrix(weights, f"{where}.weights"))
    elif kind == "bernoulli":
        p = _get(spec, "p", where)
        if not isinstance(p, list):
            raise ValidationError(f"{where}.p: expected a matrix")
        P = [[_prob(x, f"{where}.p[{r}][{c}]") for c, x in enumerate(row)] for r, row in enumerate(p)]
        weights = _get(spec, "weights", where, None)
        law = matrixlaw.bernoulli(P, None if weights is None else _matrix(weights, f"{where}.weights"))
    else:
        raise ValidationError(f"{where}.kind: unknown kind {kind!r}")
    rep = matrixlaw.validate(law)
    if not rep.ok:
        raise ValidationError(f"{where}: " + "; ".join(rep.failures))
    return law


def parse_set(spec, where="risk_set") -> risksets.RiskSet:
    kind = _get(spec, "kind", where)
    try:
        if kind == "dk":
            return network.dk_set(int(_get(spec, "q", where)), int(_get(spec, "k", where)),
                                  _num(_get(spec, "threshold", where, 1), f"{where}.threshold"))
        dim, k = int(_get(spec, "dim", where)), int(_get(spec, "k", where))
        clauses = _get(spec, "clauses", where)
        if not isinstance(clauses, list):
            raise ValidationError(f"{where}.clauses: expected a list")
        if kind == "rect":
            out = []
            for n, c in enumerate(clauses):
                coords = _get(c, "coords", f"{where}.clauses[{n}]")
                gam = _get(c, "thresholds", f"{where}.clauses[{n}]")
                if len(coords) != len(gam):
                    raise ValidationError(f"{where}.clauses[{n}]: coords and thresholds differ in length")
                out.append({int(j): _num(g, f"{where}.clauses[{n}].thresholds") for j, g in zip(coords, gam)})
            return risksets.rect_union(dim, k, out)
        if kind == "halfspace":
            out = [(_matrix(_get(c, "a", f"{where}.clauses[{n}]"), f"{where}.clauses[{n}].a"),
                    [_num(b, f"{where}.clauses[{n}].b") for b in _get(c, "b", f"{where}.clauses[{n}]")])
                   for n, c in enumerate(clauses)]
            return risksets.halfspace_union(dim, k, out, _num(_get(spec, "delta", where), f"{where}.delta"))
    except ValidationError as e:
        msg = str(e)
        raise ValidationError(msg if msg.startswith(where) else f"{where}: {msg}") from None
    raise ValidationError(f"{where}.kind: unknown kind {kind!r}")


def load(path) -> Config:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as e:
        raise ValidationError(f"cannot read config {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ValidationError(f"config {path} is not valid JSON: {e.msg} (line {e.lineno})") from None
    return parse(raw)


def parse(raw) -> Config:
    if not isinstance(raw, dict):
        raise ValidationError("config: expected a JSON object")
    margins = parse_margins(raw["margins"]) if "margins" in raw else None
    if "matrix_law" in raw:
        law = parse_law(raw["matrix_law"])
    elif "matrix" in raw:
        law = matrixlaw.point_mass(_matrix(raw["matrix"], "matrix"))
    else:
        law = None
    rset = parse_set(raw["risk_set"]) if "risk_set" in raw else None
    grid = raw.get("t_grid", [])
    if not isinstance(grid, list):
        raise ValidationError("t_grid: expected a list")
    grid = [_num(t, f"t_grid[{n}]") for n, t in enumerate(grid)]
    if any(not t > 0 for t in grid):
        raise ValidationError("t_grid: values must be positive")
    samples = raw.get("samples")
    seed = raw.get("seed")
    if samples is not None and (not isinstance(samples, int) or samples < 1):
        raise ValidationError("samples: expected a positive integer")
    if seed is not None and (not isinstance(seed, int) or not 0 <= seed < 2 ** 64):
        raise ValidationError("seed: expected an unsigned 64-bit integer")
    if margins is not None and law is not None and law.d != margins.d:
        raise ValidationError(f"matrix_law: {law.d} columns but margins have d={margins.d}")
    if rset is not None and law is not None and rset.dim != law.q:
        raise ValidationError(f"risk_set.dim: {rset.dim} but the law has {law.q} rows")
    return Config(margins, law, rset, grid, samples, seed)
