"""Versioned JSON file formats: states, ensembles, certificates, base tables.

All complex matrices are stored as flat row-major lists of [re, im] pairs.
Floats go through Python's shortest round-trip repr, so save/load is
bit-exact and content digests survive the round trip.  Formats are
self-describing ("format" + "version" headers) and meant for third-party
audit rather than compactness.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .certificate import Certificate
from .linalg import BipartiteState
from .states import ProductEnsemble

STATE_FORMAT = "sepcert/state"
ENSEMBLE_FORMAT = "sepcert/ensemble"
CERT_FORMAT = "sepcert/certificate"
TABLE_FORMAT = "sepcert/base-table"
VERSION = 1


class FileFormatError(ValueError):
    """Input file is malformed or violates a state invariant."""


def mat_to_pairs(m: np.ndarray) -> list[list[float]]:
    flat = np.asarray(m, dtype=np.complex128).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def pairs_to_mat(pairs, rows: int, cols: int) -> np.ndarray:
    if len(pairs) != rows * cols:
        raise FileFormatError(f"expected {rows * cols} entries, got {len(pairs)}")
    flat = np.array([complex(p[0], p[1]) for p in pairs], dtype=np.complex128)
    return flat.reshape(rows, cols)


def _dump(payload: dict, path) -> None:
    Path(path).write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")


def _load(path, expected_format: str) -> dict:
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict) or payload.get("format") != expected_format:
        raise FileFormatError(f"{path}: expected format {expected_format!r}")
    if payload.get("version") != VERSION:
        raise FileFormatError(f"{path}: unsupported version {payload.get('version')!r}")
    return payload


def save_state(state: BipartiteState, path, metadata: dict | None = None) -> None:
    _dump(
        {
            "format": STATE_FORMAT,
            "version": VERSION,
            "dims": [state.dA, state.dB],
            "matrix": mat_to_pairs(state.mat),
            "metadata": metadata or {},
        },
        path,
    )


def load_state(path) -> BipartiteState:
    payload = _load(path, STATE_FORMAT)
    try:
        dA, dB = (int(x) for x in payload["dims"])
        mat = pairs_to_mat(payload["matrix"], dA * dB, dA * dB)
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
    try:
        return BipartiteState(dA, dB, mat)
    except ValueError as exc:
        raise FileFormatError(f"{path}: invalid state: {exc}") from exc


def _terms_to_json(e: ProductEnsemble) -> list[dict]:
    return [
        {"weight": float(p), "a": mat_to_pairs(a), "b": mat_to_pairs(b)}
        for p, a, b in e.terms
    ]


def _terms_from_json(rows, dA: int, dB: int) -> ProductEnsemble:
    terms = tuple(
        (
            float(row["weight"]),
            pairs_to_mat(row["a"], dA, dA),
            pairs_to_mat(row["b"], dB, dB),
        )
        for row in rows
    )
    try:
        return ProductEnsemble(terms)
    except ValueError as exc:
        raise FileFormatError(f"invalid ensemble: {exc}") from exc


def save_ensemble(e: ProductEnsemble, path, metadata: dict | None = None) -> None:
    dA, dB = e.dims
    _dump(
        {
            "format": ENSEMBLE_FORMAT,
            "version": VERSION,
            "dims": [dA, dB],
            "terms": _terms_to_json(e),
            "metadata": metadata or {},
        },
        path,
    )


def load_ensemble(path) -> ProductEnsemble:
    payload = _load(path, ENSEMBLE_FORMAT)
    try:
        dA, dB = (int(x) for x in payload["dims"])
        return _terms_from_json(payload["terms"], dA, dB)
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"{path}: {exc}") from exc


def save_certificate(cert: Certificate, path) -> None:
    dA, dB = cert.dims
    prov = dict(cert.provenance)
    prov_json: dict = {"mode": prov.pop("mode", None)}
    base = prov.pop("base_ensemble", None)
    if base is not None:
        prov_json["base_terms"] = _terms_to_json(base)
    for key in ("choi_b", "choi_a"):
        mat = prov.pop(key, None)
        if mat is not None:
            prov_json[key] = {"n": int(mat.shape[0]), "matrix": mat_to_pairs(mat)}
    for key, value in prov.items():
        if isinstance(value, (int, float, str, bool)):
            prov_json[key] = value
    _dump(
        {
            "format": CERT_FORMAT,
            "version": VERSION,
            "dims": [dA, dB],
            "target_hash": cert.target_hash,
            "residual": cert.residual,
            "tolerances": cert.tolerances,
            "terms": _terms_to_json(cert.ensemble),
            "provenance": prov_json,
        },
        path,
    )


def load_certificate(path) -> Certificate:
    payload = _load(path, CERT_FORMAT)
    try:
        dA, dB = (int(x) for x in payload["dims"])
        ensemble = _terms_from_json(payload["terms"], dA, dB)
        prov_json = dict(payload.get("provenance", {}))
        prov: dict = {"mode": prov_json.pop("mode", None)}
        base_terms = prov_json.pop("base_terms", None)
        if base_terms is not None:
            bdA = int(np.sqrt(len(base_terms[0]["a"])))
            bdB = int(np.sqrt(len(base_terms[0]["b"])))
            prov["base_ensemble"] = _terms_from_json(base_terms, bdA, bdB)
        for key in ("choi_b", "choi_a"):
            entry = prov_json.pop(key, None)
            if entry is not None:
                n = int(entry["n"])
                prov[key] = pairs_to_mat(entry["matrix"], n, n)
        prov.update(prov_json)
        return Certificate(
            dims=(dA, dB),
            target_hash=str(payload["target_hash"]),
            ensemble=ensemble,
            residual=float(payload["residual"]),
            provenance=prov,
            tolerances=dict(payload.get("tolerances", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: {exc}") from exc


def save_table(entries: list[dict], d: int, path) -> None:
    """Base-state table: entries carry an ensemble plus bookkeeping fields."""
    rows = []
    for entry in entries:
        ens: ProductEnsemble = entry["ensemble"]
        rows.append(
            {
                "label": entry.get("label", ""),
                "seed": entry.get("seed"),
                "sigma_min": entry.get("sigma_min"),
                "digest": entry.get("digest"),
                "status": entry.get("status", "active"),
                "pruned_by": entry.get("pruned_by"),
                "terms": _terms_to_json(ens),
            }
        )
    _dump(
        {"format": TABLE_FORMAT, "version": VERSION, "dim": int(d), "entries": rows},
        path,
    )


def load_table(path) -> tuple[int, list[dict]]:
    payload = _load(path, TABLE_FORMAT)
    try:
        d = int(payload["dim"])
        entries = []
        for row in payload["entries"]:
            entries.append(
                {
                    "label": row.get("label", ""),
                    "seed": row.get("seed"),
                    "sigma_min": row.get("sigma_min"),
                    "digest": row.get("digest"),
                    "status": row.get("status", "active"),
                    "pruned_by": row.get("pruned_by"),
                    "ensemble": _terms_from_json(row["terms"], d, d),
                }
            )
        return d, entries
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
