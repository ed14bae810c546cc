"""JSON documents for problems, witnesses and certificates.

Matrices are written as {"re": rows, "im": rows}; "im" is omitted for real
data.  Floats go through ``repr`` (json's default), which round-trips
every double exactly.

Problem document::

    {"kind": "determinantal", "n": 3,
     "matrices": [M1, M2, ...], "constant": M0 (optional),
     "cone": {"name": "psd", "size": 2},
     "transform": [[...]] (optional, replaces f(z) and K by f(Tz), T^-1 K)}

    {"kind": "quadratic", "n": 3, "A": [[...]], "b": [...], "c": 1.0, "cone": ...}

Cones: {"name": "psd"|"orthant"|"lorentz", "size": m} or
{"name": "custom", "pencil": [M1, ...], "interior": [...]}.
"""
from __future__ import annotations

import json

import numpy as np

from .errors import DimensionError, SchemaError
from .model import (ConeSpec, DetPoly, MatrixPencil, QuadPoly, change_cone_variables,
                    change_of_variables, custom_cone, lorentz_pencil, orthant_pencil,
                    psd_pencil)


# ---- encoding --------------------------------------------------------------

def encode_matrix(a) -> dict:
    a = np.asarray(a)
    doc = {"re": np.real(a).tolist()}
    if np.iscomplexobj(a) and np.any(a.imag):
        doc["im"] = np.imag(a).tolist()
    return doc


def encode_vector(v) -> dict:
    return encode_matrix(np.asarray(v).ravel())


def encode_cone(K: ConeSpec) -> dict:
    if K.kind in ("psd", "orthant", "lorentz"):
        return {"name": K.kind, "size": K.size}
    return {"name": "custom", "pencil": [encode_matrix(m) for m in K.pencil.coeffs],
            "interior": K.interior_direction.tolist()}


def encode_problem(f, K: ConeSpec | None = None) -> dict:
    if isinstance(f, QuadPoly):
        doc = {"kind": "quadratic", "n": f.n, "A": f.A.tolist(), "b": f.b.tolist(), "c": f.c}
    else:
        doc = {"kind": "determinantal", "n": f.n,
               "matrices": [encode_matrix(m) for m in f.pencil.coeffs]}
        if f.pencil.constant is not None:
            doc["constant"] = encode_matrix(f.pencil.constant)
    if K is not None:
        doc["cone"] = encode_cone(K)
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2)


# ---- decoding --------------------------------------------------------------

def _field(doc: dict, key: str, where: str):
    if not isinstance(doc, dict) or key not in doc:
        raise SchemaError(f"{where}: missing field '{key}'")
    return doc[key]


def decode_matrix(doc, where: str, square: bool = True) -> np.ndarray:
    if isinstance(doc, dict):
        re = np.asarray(_field(doc, "re", where), dtype=float)
        im = doc.get("im")
        a = re if im is None else re + 1j * np.asarray(im, dtype=float)
        if im is not None and np.shape(im) != re.shape:
            raise SchemaError(f"{where}: 're' has shape {re.shape}, 'im' {np.shape(im)}")
    else:
        try:
            a = np.asarray(doc, dtype=float)
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"{where}: not a numeric array ({exc})") from None
    if square and (a.ndim != 2 or a.shape[0] != a.shape[1]):
        raise SchemaError(f"{where}: expected a square matrix, got shape {a.shape}")
    return a


def decode_vector(doc, where: str) -> np.ndarray:
    v = decode_matrix(doc, where, square=False)
    if v.ndim != 1:
        raise SchemaError(f"{where}: expected a vector, got shape {v.shape}")
    return v


def decode_cone(doc, where: str = "cone") -> ConeSpec:
    name = _field(doc, "name", where)
    try:
        if name == "custom":
            mats = [decode_matrix(m, f"{where}.pencil[{k}]")
                    for k, m in enumerate(_field(doc, "pencil", where))]
            return custom_cone(np.array(mats), decode_vector(_field(doc, "interior", where),
                                                             f"{where}.interior"))
        size = int(_field(doc, "size", where))
        makers = {"psd": psd_pencil, "orthant": orthant_pencil, "lorentz": lorentz_pencil}
        if name not in makers:
            raise SchemaError(f"{where}.name: unknown cone '{name}'")
        return makers[name](size)
    except DimensionError as exc:
        raise SchemaError(f"{where}: {exc}") from None


def parse_cone_selector(text: str) -> ConeSpec:
    """'psd:2', 'orthant:3', 'lorentz:3' or 'file:PATH' (a cone document)."""
    name, _, arg = text.partition(":")
    if name == "file":
        with open(arg, encoding="utf-8") as fh:
            return decode_cone(loads(fh.read(), arg), arg)
    if not arg:
        raise SchemaError(f"--cone: expected NAME:SIZE, got '{text}'")
    try:
        size = int(arg)
    except ValueError:
        raise SchemaError(f"--cone: size '{arg}' is not an integer") from None
    return decode_cone({"name": name, "size": size}, "--cone")


def loads(text: str, source: str = "<input>") -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise SchemaError(f"{source}: top level must be an object")
    return doc


def decode_problem(doc: dict, where: str = "problem"):
    """Returns (polynomial, cone or None)."""
    kind = _field(doc, "kind", where)
    n = int(_field(doc, "n", where))
    if kind == "determinantal":
        mats = _field(doc, "matrices", where)
        if len(mats) != n:
            raise SchemaError(f"{where}.matrices: expected {n} matrices, got {len(mats)}")
        coeffs = [decode_matrix(m, f"{where}.matrices[{k}]") for k, m in enumerate(mats)]
        if len({c.shape for c in coeffs}) != 1:
            raise SchemaError(f"{where}.matrices: matrices differ in size")
        const = doc.get("constant")
        const = None if const is None else decode_matrix(const, f"{where}.constant")
        try:
            f = DetPoly(MatrixPencil(np.array(coeffs), const))
        except DimensionError as exc:
            raise SchemaError(f"{where}.constant: {exc}") from None
    elif kind == "quadratic":
        A = decode_matrix(_field(doc, "A", where), f"{where}.A")
        if A.shape != (n, n):
            raise SchemaError(f"{where}.A: expected {n}x{n}, got {A.shape}")
        b = decode_vector(doc.get("b", [0.0] * n), f"{where}.b")
        if b.shape != (n,):
            raise SchemaError(f"{where}.b: expected length {n}, got {b.size}")
        f = QuadPoly(A, b, float(doc.get("c", 0.0)))
    else:
        raise SchemaError(f"{where}.kind: expected 'determinantal' or 'quadratic', got '{kind}'")
    K = decode_cone(doc["cone"], f"{where}.cone") if "cone" in doc else None
    if K is not None and K.n != n:
        raise SchemaError(f"{where}.cone: cone has {K.n} variables, polynomial {n}")
    if "transform" in doc:
        T = decode_matrix(doc["transform"], f"{where}.transform")
        if T.shape != (n, n):
            raise SchemaError(f"{where}.transform: expected {n}x{n}, got {T.shape}")
        if isinstance(f, QuadPoly):
            f = QuadPoly(T.T @ f.A @ T, T.T @ f.b, f.c)
        else:
            f = DetPoly(change_of_variables(f.pencil, T))
        if K is not None:
            K = change_cone_variables(K, T)
    return f, K


def decode_witness(doc: dict, where: str = "witness") -> np.ndarray:
    z = decode_vector(_field(doc, "z", where), f"{where}.z")
    return z.astype(complex)


# ---- certificates ----------------------------------------------------------

def encode_certificate(cert, K: ConeSpec, targets, representation=None) -> dict:
    grid = cert.blocks
    doc = {
        "sigma": cert.sigma,
        "nu": cert.nu,
        "scaled": cert.scaled,
        "block_size": cert.block_size,
        "blocks": [[encode_matrix(grid[i, j]) for j in range(grid.shape[1])]
                   for i in range(grid.shape[0])],
        "min_eig": cert.min_eig,
        "residual": cert.residual,
        "verified": bool(cert.verified),
        "cone": encode_cone(K),
        "targets": [encode_matrix(t) for t in np.asarray(targets)],
        "representation": None,
    }
    if representation is not None:
        doc["representation"] = {
            "ell": representation.ell.tolist(),
            "factor": representation.factor,
            "pencil": [encode_matrix(m) for m in representation.pencil.coeffs],
        }
    return doc


def decode_certificate(doc: dict, where: str = "certificate"):
    """Returns (ChoiCertificate, cone, targets); the certificate is unverified."""
    from .certify import ChoiCertificate
    from .linalg import join_blocks

    rows = _field(doc, "blocks", where)
    grid = np.array([[decode_matrix(b, f"{where}.blocks[{i}][{j}]") for j, b in enumerate(row)]
                     for i, row in enumerate(rows)])
    if grid.ndim != 4:
        raise SchemaError(f"{where}.blocks: ragged block grid")
    cert = ChoiCertificate(sigma=int(_field(doc, "sigma", where)), nu=float(_field(doc, "nu", where)),
                           C=join_blocks(grid), block_size=int(_field(doc, "block_size", where)),
                           scaled=bool(doc.get("scaled", False)))
    K = decode_cone(_field(doc, "cone", where), f"{where}.cone")
    targets = np.array([decode_matrix(t, f"{where}.targets[{k}]")
                        for k, t in enumerate(_field(doc, "targets", where))])
    return cert, K, targets
