"""Ensemble interchange files.

A single JSON document describes either kind of ensemble:

    {"kind": "classical", "priors": [...], "dists": [[...], ...]}
    {"kind": "quantum",  "priors": [...], "states": [[[[re, im], ...], ...], ...]}

Complex entries are [re, im] pairs; an optional "labels" list names the
hypotheses.  Priors (and classical weight vectors) must sum to 1 within
1e-9 and are renormalized exactly on load; quantum states must be
Hermitian, PSD and unit-trace within 1e-9 and are cleaned up to exact
validity.
"""

from __future__ import annotations

import json

import numpy as np

from .classical import ClassicalEnsemble, Distribution
from .errors import ValidationError
from .quantum import QuantumEnsemble

_GATE = 1e-9


def _clean_probability(vec, what):
    w = np.asarray(vec, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValidationError(f"{what}: expected a nonempty vector")
    if np.any(w < -_GATE):
        raise ValidationError(f"{what}: negative entry {w.min()!r}")
    w = np.clip(w, 0.0, None)
    total = w.sum()
    if abs(total - 1.0) > _GATE:
        raise ValidationError(f"{what}: entries sum to {total!r}, not 1 within {_GATE}")
    return w / total


def _parse_state(entry, what):
    arr = np.asarray(entry, dtype=float)
    if arr.ndim != 3 or arr.shape[0] != arr.shape[1] or arr.shape[2] != 2:
        raise ValidationError(
            f"{what}: expected a dim x dim array of [re, im] pairs, got shape {arr.shape}")
    M = arr[..., 0] + 1j * arr[..., 1]
    if np.max(np.abs(M - M.conj().T)) > _GATE:
        raise ValidationError(f"{what}: matrix is not Hermitian within {_GATE}")
    M = 0.5 * (M + M.conj().T)
    tr = np.trace(M).real
    if abs(tr - 1.0) > _GATE:
        raise ValidationError(f"{what}: trace is {tr!r}, not 1 within {_GATE}")
    M = M / tr
    w, V = np.linalg.eigh(M)
    if w[0] < -_GATE:
        raise ValidationError(f"{what}: eigenvalue {w[0]!r} below -{_GATE}")
    w = np.clip(w, 0.0, None)
    M = (V * w) @ V.conj().T
    return M / np.trace(M).real


def parse_ensemble(doc, source="<input>"):
    """Build a ClassicalEnsemble or QuantumEnsemble from a parsed JSON
    document."""
    if not isinstance(doc, dict):
        raise ValidationError(f"{source}: top level must be an object")
    kind = doc.get("kind")
    if kind not in ("classical", "quantum"):
        raise ValidationError(f"{source}: kind must be 'classical' or 'quantum', "
                              f"got {kind!r}")
    if "priors" not in doc:
        raise ValidationError(f"{source}: missing 'priors'")
    priors = _clean_probability(doc["priors"], f"{source}: priors")
    labels = doc.get("labels")
    if labels is not None:
        if len(labels) != priors.size:
            raise ValidationError(f"{source}: {len(labels)} labels for "
                                  f"{priors.size} hypotheses")
        labels = [str(x) for x in labels]

    if kind == "classical":
        if "dists" not in doc:
            raise ValidationError(f"{source}: classical ensemble needs 'dists'")
        dists = [Distribution(_clean_probability(d, f"{source}: dists[{i}]"))
                 for i, d in enumerate(doc["dists"])]
        ens = ClassicalEnsemble(priors, dists)
    else:
        if "states" not in doc:
            raise ValidationError(f"{source}: quantum ensemble needs 'states'")
        states = [_parse_state(s, f"{source}: states[{i}]")
                  for i, s in enumerate(doc["states"])]
        ens = QuantumEnsemble(priors, states)
    return ens, labels


def load_ensemble(path):
    """Load an ensemble file; returns (ensemble, labels)."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return parse_ensemble(doc, source=str(path))


def ensemble_to_doc(ensemble, labels=None) -> dict:
    """JSON-ready document for an ensemble (inverse of parse_ensemble)."""
    doc = {"priors": [float(x) for x in ensemble.priors]}
    if isinstance(ensemble, ClassicalEnsemble):
        doc["kind"] = "classical"
        doc["dists"] = [[float(x) for x in d.weights] for d in ensemble.dists]
    elif isinstance(ensemble, QuantumEnsemble):
        doc["kind"] = "quantum"
        doc["states"] = [[[[float(z.real), float(z.imag)] for z in row]
                          for row in rho] for rho in ensemble.states]
    else:
        raise ValidationError(f"cannot serialize {type(ensemble).__name__}")
    if labels is not None:
        doc["labels"] = list(labels)
    return doc


def save_ensemble(path, ensemble, labels=None):
    with open(path, "w") as fh:
        json.dump(ensemble_to_doc(ensemble, labels), fh, indent=2)
        fh.write("\n")
