"""JSON documents for algebras, maps, families and models.

Scalars are ``[re_num, re_den, im_num, im_den]`` quadruples.  Tensors are
flat row-major lists of quadruples, entry ``T[i, k_1, ..., k_(n-1)]`` at
position ``i*d^(n-1) + k_1*d^(n-2) + ...``.  Every parse error carries a
JSON-pointer style location.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from ._rational import CRational
from .algebra import Automorphism, LinearMap, TraceFunctional
from .circular import (CircularModel, induced_cumulant_family, make_dt_discretized,
                       make_nofreepolar, make_scalar_circular)
from .cumulants import MapFamily, cumulants_from_moments, cumulants_to_moments
from .rdiag import RDiagModel

__all__ = [
    "SchemaError",
    "load_json",
    "parse_scalar",
    "parse_linear_map",
    "parse_trace",
    "parse_automorphism",
    "parse_family",
    "Model",
    "parse_model",
    "resolve_model",
    "scalar_to_json",
    "linear_map_to_json",
    "family_to_json",
]


class SchemaError(ValueError):
    """Malformed or schema-violating document; ``location`` says where."""

    def __init__(self, message: str, location: str = "$"):
        super().__init__(f"{location}: {message}")
        self.location = location


def load_json(source) -> Any:
    """Parse a path or a JSON string, turning syntax errors into SchemaError."""
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith(("{", "["))):
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise SchemaError(f"cannot read file: {exc.strerror}", str(source)) from None
        where = str(source)
    else:
        text, where = source, "<string>"
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", f"{where}:line {exc.lineno} column {exc.colno}") from None


def _req(doc: dict, key: str, loc: str):
    if not isinstance(doc, dict):
        raise SchemaError("expected an object", loc)
    if key not in doc:
        raise SchemaError(f"missing key {key!r}", loc)
    return doc[key]


def parse_scalar(x, loc: str = "$") -> CRational:
    if (not isinstance(x, list) or len(x) != 4
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in x)):
        raise SchemaError("expected [re_num, re_den, im_num, im_den] integers", loc)
    if x[1] == 0 or x[3] == 0:
        raise SchemaError("zero denominator", loc)
    return CRational.from_quad(x)


def _parse_dimension(doc, loc: str) -> int:
    d = _req(doc, "dimension", loc)
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise SchemaError("dimension must be a positive integer", f"{loc}/dimension")
    return d


def parse_linear_map(rows, d: int, loc: str = "$") -> LinearMap:
    if not isinstance(rows, list) or len(rows) != d:
        raise SchemaError(f"expected {d} rows", loc)
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != d:
            raise SchemaError(f"expected {d} entries", f"{loc}/{i}")
        out.append([parse_scalar(v, f"{loc}/{i}/{k}") for k, v in enumerate(row)])
    return LinearMap(out)


def parse_trace(weights, d: int, loc: str = "$") -> TraceFunctional:
    if not isinstance(weights, list) or len(weights) != d:
        raise SchemaError(f"expected {d} weights", loc)
    vals = [parse_scalar(w, f"{loc}/{k}") for k, w in enumerate(weights)]
    try:
        return TraceFunctional(vals)
    except ValueError as exc:
        raise SchemaError(str(exc), loc) from None


def parse_automorphism(perm, d: int, loc: str = "$") -> Automorphism:
    if (not isinstance(perm, list) or sorted(perm) != list(range(d))):
        raise SchemaError(f"expected a permutation of 0..{d - 1}", loc)
    return Automorphism(perm)


def _parse_tensor(t, d: int, n: int, loc: str) -> tuple:
    if not isinstance(t, list) or len(t) != d ** n:
        raise SchemaError(f"expected a flat list of {d ** n} scalars", loc)
    return tuple(parse_scalar(v, f"{loc}/{k}") for k, v in enumerate(t))


def _parse_labels(doc, loc: str) -> tuple:
    labels = _req(doc, "labels", loc)
    if (not isinstance(labels, list) or len(labels) < 1 or len(set(map(str, labels))) != len(labels)
            or not all(isinstance(x, (str, int)) and not isinstance(x, bool) for x in labels)):
        raise SchemaError("labels must be a nonempty list of distinct strings or integers", f"{loc}/labels")
    return tuple(labels)


def _parse_maps(doc: dict, d: int, labels: tuple, loc: str) -> dict:
    maps = _req(doc, "maps", loc)
    if not isinstance(maps, list):
        raise SchemaError("maps must be a list", f"{loc}/maps")
    out = {}
    for k, item in enumerate(maps):
        iloc = f"{loc}/maps/{k}"
        word = _req(item, "word", iloc)
        if not isinstance(word, list) or not word:
            raise SchemaError("word must be a nonempty list", f"{iloc}/word")
        for p, x in enumerate(word):
            if x not in labels:
                raise SchemaError(f"unknown label {x!r}", f"{iloc}/word/{p}")
        w = tuple(word)
        if w in out:
            raise SchemaError("duplicate word", f"{iloc}/word")
        out[w] = _parse_tensor(_req(item, "tensor", iloc), d, len(w), f"{iloc}/tensor")
    return out


def parse_family(doc, loc: str = "$", kind: str | None = None,
                 d: int | None = None, labels: tuple | None = None) -> MapFamily:
    """``{"algebra": {...}, "labels": [...], "kind": ..., "maps": [...]}``.

    Optional keys: ``max_order`` and ``sparse`` (absent words are zero).
    """
    if not isinstance(doc, dict):
        raise SchemaError("expected an object", loc)
    if d is None:
        d = _parse_dimension(_req(doc, "algebra", loc), f"{loc}/algebra")
    if labels is None:
        labels = _parse_labels(doc, loc)
    if kind is None:
        kind = _req(doc, "kind", loc)
        if kind not in MapFamily.KINDS:
            raise SchemaError(f"kind must be one of {MapFamily.KINDS}", f"{loc}/kind")
    maps = _parse_maps(doc, d, labels, loc)
    max_order = doc.get("max_order")
    if max_order is not None and (not isinstance(max_order, int) or max_order < 1):
        raise SchemaError("max_order must be a positive integer", f"{loc}/max_order")
    sparse = doc.get("sparse", False)
    if not isinstance(sparse, bool):
        raise SchemaError("sparse must be a boolean", f"{loc}/sparse")
    try:
        return MapFamily(d, labels, maps, kind=kind, max_order=max_order, sparse=sparse)
    except ValueError as exc:
        raise SchemaError(str(exc), loc) from None


@dataclass(frozen=True)
class Model:
    """A loaded model: exactly one of circular, rdiag, family is set."""

    name: str
    labels: tuple
    circular: CircularModel | None = None
    rdiag: RDiagModel | None = None
    family: MapFamily | None = None

    @property
    def dimension(self) -> int:
        for m in (self.circular, self.rdiag, self.family):
            if m is not None:
                return m.dimension
        raise AssertionError("empty model")

    def cumulant_family(self, N: int) -> MapFamily:
        if self.circular is not None:
            return induced_cumulant_family(self.circular, N, self.labels)
        if self.rdiag is not None:
            return self.rdiag.to_family(N, self.labels)
        if self.family.kind == "cumulants":
            return self.family
        return cumulants_from_moments(self.family, N)

    def moment_family(self, N: int) -> MapFamily:
        if self.family is not None and self.family.kind == "moments":
            return self.family
        return cumulants_to_moments(self.cumulant_family(N), N)

    def rdiag_model(self, K: int) -> RDiagModel:
        if self.rdiag is not None:
            return self.rdiag
        if self.circular is not None:
            return self.circular.to_rdiag(K)
        return RDiagModel.from_family(self.cumulant_family(2 * K), K)


def parse_model(doc, loc: str = "$", name: str = "file") -> Model:
    """Model file: algebra, labels (two of them: a then a*), and one of
    ``circular: {eta1, eta2}``, ``rdiag: {K, betas1, betas2}``,
    ``moments: {maps...}``, ``cumulants: {maps...}``.  A bare family document
    (with ``kind``) is accepted too."""
    if not isinstance(doc, dict):
        raise SchemaError("expected an object", loc)
    d = _parse_dimension(_req(doc, "algebra", loc), f"{loc}/algebra")
    labels = _parse_labels(doc, loc)
    present = [k for k in ("circular", "rdiag", "moments", "cumulants", "kind") if k in doc]
    if len(present) != 1:
        raise SchemaError("need exactly one of circular, rdiag, moments, cumulants, kind", loc)
    key = present[0]
    if key in ("circular", "rdiag") and len(labels) != 2:
        raise SchemaError("circular and rdiag models take two labels (a, a*)", f"{loc}/labels")
    if key == "circular":
        body = doc["circular"]
        e1 = parse_linear_map(_req(body, "eta1", f"{loc}/circular"), d, f"{loc}/circular/eta1")
        e2 = parse_linear_map(_req(body, "eta2", f"{loc}/circular"), d, f"{loc}/circular/eta2")
        return Model(name, labels, circular=CircularModel(e1, e2, name))
    if key == "rdiag":
        body = doc["rdiag"]
        bloc = f"{loc}/rdiag"
        K = _req(body, "K", bloc)
        if not isinstance(K, int) or K < 1:
            raise SchemaError("K must be a positive integer", f"{bloc}/K")
        betas = []
        for which in ("betas1", "betas2"):
            raw = body.get(which, {})
            if not isinstance(raw, dict):
                raise SchemaError("expected an object keyed by half-order", f"{bloc}/{which}")
            conv = {}
            for k, t in raw.items():
                try:
                    kk = int(k)
                except ValueError:
                    raise SchemaError("half-order keys must be integers", f"{bloc}/{which}/{k}") from None
                if not 1 <= kk <= K:
                    raise SchemaError(f"half-order outside 1..{K}", f"{bloc}/{which}/{k}")
                conv[kk] = _parse_tensor(t, d, 2 * kk, f"{bloc}/{which}/{k}")
            betas.append(conv)
        return Model(name, labels, rdiag=RDiagModel(d, betas[0], betas[1], K))
    if key == "kind":
        return Model(name, labels, family=parse_family(doc, loc, d=d, labels=labels))
    return Model(name, labels, family=parse_family(doc[key], f"{loc}/{key}", kind=key, d=d, labels=labels))


def resolve_model(source: str) -> Model:
    """Builtin names (``nofreepolar``, ``dt:<d>``, ``scalar-circular:<c>``,
    optionally prefixed ``builtin:``) or a path to a model file."""
    name = source[len("builtin:"):] if source.startswith("builtin:") else source
    if name == "nofreepolar":
        return Model(name, (1, 2), circular=make_nofreepolar())
    if name.startswith("dt:"):
        try:
            d = int(name[3:])
        except ValueError:
            raise SchemaError("dt:<d> needs a positive integer d", source) from None
        if d < 1:
            raise SchemaError("dt:<d> needs a positive integer d", source)
        return Model(name, (1, 2), circular=make_dt_discretized(d))
    if name.startswith("scalar-circular:"):
        try:
            c = Fraction(name[len("scalar-circular:"):])
        except (ValueError, ZeroDivisionError):
            raise SchemaError("scalar-circular:<c> needs a rational c", source) from None
        if c < 0:
            raise SchemaError("scalar-circular:<c> needs c >= 0", source)
        return Model(name, (1, 2), circular=make_scalar_circular(c))
    if source.startswith("builtin:"):
        raise SchemaError(f"unknown builtin model {name!r}", source)
    return parse_model(load_json(Path(source)), "$", name=Path(source).stem)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def scalar_to_json(x: CRational) -> list[int]:
    return x.to_quad()


def linear_map_to_json(m: LinearMap) -> list:
    return [[scalar_to_json(x) for x in row] for row in m.matrix]


def family_to_json(family: MapFamily, include_zero: bool = False) -> dict:
    maps = []
    for w, t in sorted(family.items(), key=lambda kv: (len(kv[0]), [str(x) for x in kv[0]])):
        if not include_zero and not any(t):
            continue
        maps.append({"word": list(w), "tensor": [scalar_to_json(x) for x in t]})
    return {"algebra": {"dimension": family.dimension}, "labels": list(family.labels),
            "kind": family.kind, "max_order": family.max_order, "sparse": True, "maps": maps}


def tensor_strings(t: Sequence[CRational]) -> list[str]:
    return [str(x) for x in t]
