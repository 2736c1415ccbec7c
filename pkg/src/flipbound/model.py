"""Linear classifier container and its JSON persistence format.

A model predicts sign(h . (x - z) + b), with the shift z defaulting to
the origin and the intercept b to 0.  The on-disk format is versioned
JSON with canonical key order so that save/load round-trips are
byte-identical.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, InvalidParameterError

__all__ = ["LinearModel", "save_model", "load_model", "FORMAT_VERSION"]

FORMAT_VERSION = 1


@dataclass
class LinearModel:
    h: np.ndarray
    z: np.ndarray | None = None
    b: float | None = None
    k: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=np.float64)
        if self.h.ndim != 1 or np.linalg.norm(self.h) == 0.0:
            raise InvalidParameterError("model weight vector h must be a nonzero vector")
        if self.z is not None:
            self.z = np.asarray(self.z, dtype=np.float64)
            if self.z.shape != self.h.shape:
                raise InvalidParameterError("shift z must match the dimension of h")
        if self.b is not None:
            self.b = float(self.b)

    @property
    def d(self) -> int:
        return self.h.shape[0]

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        Xc = X - self.z if self.z is not None else X
        scores = Xc @ self.h
        if self.b is not None:
            scores = scores + self.b
        return scores

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        # ties on the boundary go to the positive class
        return np.where(scores >= 0.0, 1.0, -1.0)

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "d": self.d,
            "h": self.h.tolist(),
            "z": self.z.tolist() if self.z is not None else None,
            "b": self.b,
            "k": self.k,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "LinearModel":
        version = payload.get("format_version")
        if version != FORMAT_VERSION:
            raise DataError(f"unsupported model format_version {version!r}")
        model = cls(
            h=np.asarray(payload["h"], dtype=np.float64),
            z=None if payload.get("z") is None else np.asarray(payload["z"], dtype=np.float64),
            b=payload.get("b"),
            k=payload.get("k"),
            meta=dict(payload.get("meta") or {}),
        )
        if payload.get("d") is not None and payload["d"] != model.d:
            raise DataError(f"declared dimension {payload['d']} != len(h) = {model.d}")
        return model

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def save_model(model: LinearModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model.to_json())
        fh.write("\n")


def load_model(path) -> LinearModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"model file {path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise DataError(f"model file {path} must contain a JSON object")
    return LinearModel.from_dict(payload)
