"""Model serialization.

One JSON document per model, shared by both model kinds through a
``model_kind`` discriminator.  Floats are written with Python's shortest
round-trip representation, so a serialize/deserialize cycle reproduces
every parameter bit for bit.  Deserialization validates structure: cyclic
graphs, mismatched dimensions, and out-of-range correlations are rejected.
"""

import json

from .cbn import CbnModel
from .copula import UniformGaussianCopula
from .dag import Dag
from .errors import CopulaBnError, ParseError, ValidationError
from .gaussian_bn import LinearGaussianBn
from .marginals import KdeMarginal

__all__ = ["serialize", "deserialize", "save_model", "load_model"]

_FORMAT = "copulabn-model"
_VERSION = 1


def serialize(model):
    """Render a fitted model as a JSON text document."""
    if isinstance(model, CbnModel):
        doc = {
            "format": _FORMAT,
            "version": _VERSION,
            "model_kind": "cbn",
            "column_names": list(model.column_names),
            "parents": [list(ps) for ps in model.dag.parents],
            "rho": [None if c is None else c.rho for c in model.copulas],
            "marginals": [
                {"bandwidth": m.bandwidth, "samples": m.samples.tolist()}
                for m in model.marginals
            ],
        }
    elif isinstance(model, LinearGaussianBn):
        doc = {
            "format": _FORMAT,
            "version": _VERSION,
            "model_kind": "lgbn",
            "column_names": list(model.column_names),
            "parents": [list(ps) for ps in model.dag.parents],
            "intercepts": list(model.intercepts),
            "coefficients": [list(cs) for cs in model.coefficients],
            "variances": list(model.variances),
        }
    else:
        raise ValidationError(f"cannot serialize object of type {type(model).__name__}")
    return json.dumps(doc, indent=2) + "\n"


def _require(doc, key):
    if key not in doc:
        raise ValidationError(f"model document is missing field {key!r}")
    return doc[key]


def deserialize(text):
    """Parse a model document back into a model object.

    Raises
    ------
    ParseError
        Not valid JSON, or not a model document.
    ValidationError
        Structurally invalid content (cycles, bad rho, length mismatches).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"not valid JSON: {e}") from None
    if not isinstance(doc, dict) or doc.get("format") != _FORMAT:
        raise ParseError(f"not a {_FORMAT} document")
    if doc.get("version") != _VERSION:
        raise ValidationError(f"unsupported model version {doc.get('version')!r}")
    kind = _require(doc, "model_kind")
    names = tuple(str(c) for c in _require(doc, "column_names"))
    parents = _require(doc, "parents")
    try:
        dag = Dag(len(names), tuple(tuple(ps) for ps in parents))
        if kind == "cbn":
            rho = _require(doc, "rho")
            marg = _require(doc, "marginals")
            if len(rho) != len(names) or len(marg) != len(names):
                raise ValidationError("per-node field lengths do not match column count")
            marginals = tuple(
                KdeMarginal.from_params(m["samples"], m["bandwidth"]) for m in marg
            )
            copulas = tuple(
                None
                if r is None
                else UniformGaussianCopula(n=len(dag.parents[i]) + 1, rho=float(r))
                for i, r in enumerate(rho)
            )
            return CbnModel(dag=dag, marginals=marginals, copulas=copulas, column_names=names)
        if kind == "lgbn":
            return LinearGaussianBn(
                dag=dag,
                intercepts=tuple(_require(doc, "intercepts")),
                coefficients=tuple(tuple(cs) for cs in _require(doc, "coefficients")),
                variances=tuple(_require(doc, "variances")),
                column_names=names,
            )
        raise ValidationError(f"unknown model_kind {kind!r}")
    except (ParseError, ValidationError):
        raise
    except CopulaBnError as e:
        # Construction-level complaints (bad rho, degenerate marginal, ...)
        # all surface as document validation failures here.
        raise ValidationError(str(e)) from None
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"malformed model document: {e}") from None


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(model))


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        return deserialize(fh.read())
