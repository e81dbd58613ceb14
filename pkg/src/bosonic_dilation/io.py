"""JSON encodings of characteristic functions, channels, dilations and Fock operators.

Matrices are row-major nested lists of floats.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import channels as _ch
from .char_fn import (
    CharFn,
    Cosine,
    DisplacementMixture,
    GaussianKernel,
    One,
    Product,
    PullBack,
)
from .dilation import GaussianDilation, fixed_unitary_data
from .errors import SpecError
from .fock import FockOperator
from .phase_space import SymplecticCompletion


def _mat(x, name: str) -> np.ndarray:
    try:
        arr = np.asarray(x, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"field {name!r} is not a numeric array") from exc
    if not np.all(np.isfinite(arr)):
        raise SpecError(f"field {name!r} contains non-finite values")
    return arr


def _get(data: dict, key: str):
    if not isinstance(data, dict) or key not in data:
        raise SpecError(f"missing field {key!r}")
    return data[key]


def charfn_to_json(f: CharFn) -> dict:
    if isinstance(f, One):
        return {"kind": "one", "dim": f.dim}
    if isinstance(f, GaussianKernel):
        return {"kind": "gaussian_kernel", "M": f.M.tolist(), "b": f.b.tolist()}
    if isinstance(f, Cosine):
        return {"kind": "cosine", "s": f.s.tolist()}
    if isinstance(f, DisplacementMixture):
        return {"kind": "mixture", "weights": f.weights.tolist(), "points": f.points.tolist()}
    if isinstance(f, Product):
        return {"kind": "product", "factors": [charfn_to_json(g) for g in f.factors]}
    if isinstance(f, PullBack):
        return {"kind": "pullback", "inner": charfn_to_json(f.inner), "L": f.L.tolist()}
    raise TypeError(f"cannot encode {type(f).__name__}")


def charfn_from_json(data: dict, dim: int | None = None) -> CharFn:
    """Decode a characteristic function; ``dim`` fills in the arity of ``one`` nodes."""
    kind = _get(data, "kind")
    try:
        if kind == "one":
            d = data.get("dim", dim)
            if d is None:
                raise SpecError("'one' needs a dimension")
            return One(int(d))
        if kind == "gaussian_kernel":
            M = _mat(_get(data, "M"), "M")
            b = _mat(data["b"], "b") if data.get("b") is not None else None
            return GaussianKernel(M, b)
        if kind == "cosine":
            return Cosine(_mat(_get(data, "s"), "s"))
        if kind == "mixture":
            return DisplacementMixture(_mat(_get(data, "weights"), "weights"), _mat(_get(data, "points"), "points"))
        if kind == "product":
            factors = [charfn_from_json(g, dim) for g in _get(data, "factors")]
            return Product(tuple(factors))
        if kind == "pullback":
            L = _mat(_get(data, "L"), "L")
            inner = charfn_from_json(_get(data, "inner"), L.shape[0] if L.ndim == 2 else None)
            return PullBack(inner, L)
    except SpecError:
        raise
    except ValueError as exc:
        raise SpecError(f"invalid {kind!r} node: {exc}") from exc
    raise SpecError(f"unknown characteristic-function kind {kind!r}")


def channel_to_json(ch) -> dict:
    return {"n": ch.n, "X": ch.X.tolist(), "f": charfn_to_json(ch.f), "label": ch.label}


def channel_from_json(data: dict, sampler=None):
    """Build a channel from a full ``{"n","X","f"}`` spec or a preset shorthand.

    Presets: ``binary_displacement`` (``s``), ``amplifier`` (``gain``), ``bk``
    (``sigma``), and also ``attenuator`` (``eta``), ``identity`` and
    ``additive_noise`` (``N``), each with an optional ``n``.
    """
    if not isinstance(data, dict):
        raise SpecError("channel spec must be a JSON object")
    preset = data.get("preset")
    try:
        if preset is not None:
            n = int(data.get("n", 1))
            if preset == "binary_displacement":
                return _ch.binary_displacement(_mat(_get(data, "s"), "s"), sampler)
            if preset == "amplifier":
                return _ch.amplifier(float(_get(data, "gain")), n, sampler)
            if preset == "bk":
                return _ch.bk_noise_channel(float(_get(data, "sigma")), n, sampler)
            if preset == "attenuator":
                return _ch.attenuator(float(_get(data, "eta")), n, sampler)
            if preset == "identity":
                return _ch.identity_channel(n)
            if preset == "additive_noise":
                return _ch.additive_noise_channel(_mat(_get(data, "N"), "N"), sampler)
            raise SpecError(f"unknown channel preset {preset!r}")
        n = int(_get(data, "n"))
        X = _mat(_get(data, "X"), "X")
        f = charfn_from_json(_get(data, "f"), 2 * n)
        if X.shape != (2 * n, 2 * n):
            raise SpecError(f"X must be {2 * n}x{2 * n}")
        return _ch.make_channel(X, f, sampler, label=data.get("label", ""))
    except SpecError:
        raise
    except (TypeError, KeyError) as exc:
        raise SpecError(f"malformed channel spec: {exc}") from exc
    except ValueError as exc:
        # NotCP and friends are not ValueErrors; what remains are input problems
        raise SpecError(f"invalid channel spec: {exc}") from exc


def dilation_to_json(d: GaussianDilation) -> dict:
    return {
        "n": d.n,
        "m": d.m,
        "X": d.X.tolist(),
        "Y": d.Y.tolist(),
        "s": d.s.tolist(),
        "S": None if d.S is None else d.S.tolist(),
        "ancilla": charfn_to_json(d.ancilla),
        "provenance": d.provenance,
    }


def dilation_from_json(data: dict) -> GaussianDilation:
    try:
        n, m = int(_get(data, "n")), int(_get(data, "m"))
        X = _mat(_get(data, "X"), "X")
        Y = _mat(_get(data, "Y"), "Y").reshape(2 * m, 2 * n)
        s = _mat(data.get("s") or np.zeros(2 * n), "s")
        ancilla = charfn_from_json(_get(data, "ancilla"), 2 * m)
        S = data.get("S")
        completion = None if S is None else SymplecticCompletion(_mat(S, "S"), np.vstack([X, Y]))
        prov = dict(data.get("provenance") or {"algorithm": "exact"})
        fixed = fixed_unitary_data(X) if prov.get("algorithm") == "fixed_unitary" else None
        return GaussianDilation(n, m, X, Y, ancilla, completion, s, prov, fixed)
    except SpecError:
        raise
    except (TypeError, KeyError, ValueError) as exc:
        raise SpecError(f"malformed dilation spec: {exc}") from exc


def is_dilation_spec(data) -> bool:
    return isinstance(data, dict) and "ancilla" in data and "Y" in data


def fock_to_json(T: FockOperator) -> dict:
    return T.to_dict()


def fock_from_json(data: dict) -> FockOperator:
    try:
        return FockOperator.from_dict(data)
    except (TypeError, KeyError, ValueError) as exc:
        raise SpecError(f"malformed Fock operator: {exc}") from exc


def read_json(path) -> dict:
    """Read a JSON file, turning I/O and syntax problems into :class:`SpecError`."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path} is not valid JSON: {exc}") from exc


def dumps(obj) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, default=_default) + "\n"


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    raise TypeError(f"cannot serialize {type(o).__name__}")
