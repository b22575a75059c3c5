"""Document-level naive Bayes and SVM classifiers over sparse features."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from ..corpus import Polarity, ReviewDocument
from ..naive import TIE_TOLERANCE, NaiveSentenceModel
from ..textproc import (ConfigError, FeatureScheme, SparseFeatureVector, Vocabulary,
                        fit_vocabulary, process_text, to_csr, vectorize)
from .svm import Kernel, smo

DEFAULT_HYPER = {"alpha": 1.0, "C": 1.0, "eps": 1e-3, "kernel": "linear", "seed": 0}


class ModelKind(str, Enum):
    NAIVE_BAYES = "NB"
    SVM = "SVM"

    @classmethod
    def parse(cls, value: "str | ModelKind") -> "ModelKind":
        if isinstance(value, ModelKind):
            return value
        key = str(value).strip().lower()
        if key in ("nb", "naivebayes", "naive_bayes", "naive-bayes"):
            return cls.NAIVE_BAYES
        if key == "svm":
            return cls.SVM
        raise ConfigError(f"unknown model kind {value!r}")


class TrainingError(ValueError):
    pass


class SchemeMismatchError(ValueError):
    pass


# Auto-tuned settings reported per domain (unigram features). NB's kernel
# density estimator has no counterpart for a multinomial model and is not kept.
PRESETS: dict[str, dict[str, Any]] = {
    "beauty": {"C": 1.1989425641153333, "kernel": "normalized_poly",
               "exponent": 1.6144079568156302, "lower_order": True, "attribute_filter": "normalize"},
    "books": {"C": 1.2918141993816825, "kernel": "normalized_poly",
              "exponent": 2.78637472738497, "lower_order": False, "attribute_filter": "none"},
    "kitchen": {"C": 1.2929645940353218, "kernel": "puk",
                "sigma": 9.028189222927269, "omega": 0.9952824838773323, "attribute_filter": "none"},
    "software": {"C": 1.1471978195519354, "kernel": "normalized_poly",
                 "exponent": 1.7177045231155679, "lower_order": True, "attribute_filter": "none",
                 "logistic_outputs": True},
}


def resolve_hyper(hyper: Mapping[str, Any] | None) -> dict[str, Any]:
    """Defaults, then a named preset, then explicit keys."""
    hyper = dict(hyper or {})
    out = dict(DEFAULT_HYPER)
    preset = hyper.get("preset")
    if preset:
        if preset not in PRESETS:
            raise ConfigError(f"unknown kernel preset {preset!r}; known: {', '.join(sorted(PRESETS))}")
        out.update(PRESETS[preset])
    out.update({k: v for k, v in hyper.items() if v is not None})
    if float(out["C"]) <= 0:
        raise ConfigError(f"C must be positive, got {out['C']}")
    if float(out["alpha"]) <= 0:
        raise ConfigError(f"alpha must be positive, got {out['alpha']}")
    return out


def kernel_from_hyper(hyper: Mapping[str, Any]) -> Kernel:
    name = hyper.get("kernel", "linear")
    if name == "linear":
        return Kernel()
    if name in ("poly", "normalized_poly"):
        return Kernel("poly", exponent=float(hyper.get("exponent", 1.0)),
                      lower_order=bool(hyper.get("lower_order", False)),
                      normalized=name == "normalized_poly")
    if name == "puk":
        return Kernel("puk", sigma=float(hyper.get("sigma", 1.0)), omega=float(hyper.get("omega", 1.0)))
    raise ConfigError(f"unknown kernel {name!r}")


@dataclass
class TrainedModel:
    kind: ModelKind
    scheme: FeatureScheme
    vocab: Vocabulary
    params: dict[str, Any]
    negation_window: int | None = None
    metadata: dict[str, Any] = field(default_factory=dict)
    # sentence model bundled for correction at prediction time
    naive: NaiveSentenceModel | None = None

    @property
    def name(self) -> str:
        suffix = "-cor" if self.metadata.get("corrected") else ""
        return f"{self.kind.value}-{self.scheme.value}{suffix}"

    def decision(self, vec: SparseFeatureVector) -> float:
        if any(i >= self.vocab.size for i in vec.indices):
            raise SchemeMismatchError("feature index outside the model vocabulary")
        p = self.params
        if self.kind is ModelKind.NAIVE_BAYES:
            return ((p["log_prior"][0] + vec.dot(p["log_cond"][0]))
                    - (p["log_prior"][1] + vec.dot(p["log_cond"][1])))
        if not vec.indices:
            return float(p["bias"])
        if "weights" in p:
            return vec.dot(p["weights"]) + float(p["bias"])
        x = to_csr([vec], self.vocab.size)
        k = p["kernel"].matrix(p["support"], x)[:, 0]
        return float(np.dot(p["dual_coef"], k) + p["bias"])

    def vectorize_doc(self, doc: ReviewDocument) -> SparseFeatureVector:
        return vectorize(document_tokens(doc, self.negation_window), self.scheme, self.vocab)

    # ------------------------------------------------------------------
    # Serialization

    def _params_json(self) -> dict:
        p = self.params
        if self.kind is ModelKind.NAIVE_BAYES:
            return {"alpha": p["alpha"], "doc_counts": p["doc_counts"],
                    "counts": [_sparse_row(p["counts"][0]), _sparse_row(p["counts"][1])]}
        out = {"bias": float(p["bias"]), "C": p["C"], "kernel": p["kernel"].to_dict()}
        if "weights" in p:
            out["weights"] = _sparse_row(p["weights"])
        else:
            sv = p["support"]
            out["dual_coef"] = [float(a) for a in p["dual_coef"]]
            out["support"] = [[[int(j) for j in sv[r].indices], [float(v) for v in sv[r].data]]
                              for r in range(sv.shape[0])]
        return out

    def to_lines(self) -> list[str]:
        domain = str(self.metadata.get("domain") or "-").replace(" ", "_")
        corrected = "true" if self.metadata.get("corrected") else "false"
        lines = [f"model v1 {self.kind.value} {self.scheme.value} {domain} corrected={corrected}",
                 "meta " + json.dumps({"negation_window": self.negation_window, "metadata": self.metadata},
                                      sort_keys=True)]
        lines.extend(self.vocab.to_lines())
        lines.append("params " + json.dumps(self._params_json(), sort_keys=True))
        if self.naive is not None:
            lines.extend(self.naive.to_lines())
        return lines

    def save(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.to_lines()) + "\n", encoding="utf-8")

    @classmethod
    def from_lines(cls, lines: Sequence[str]) -> "TrainedModel":
        head = lines[0].split()
        if len(head) != 6 or head[:2] != ["model", "v1"]:
            raise ValueError(f"not a v1 model header: {lines[0]!r}")
        kind, scheme = ModelKind.parse(head[2]), FeatureScheme.parse(head[3])
        meta = json.loads(lines[1].split(" ", 1)[1])
        size = int(lines[2].split()[3])
        vocab = Vocabulary.from_lines(lines[2:3 + size])
        if vocab.scheme is not scheme:
            raise SchemeMismatchError("model header and vocabulary disagree on the feature scheme")
        raw = json.loads(lines[3 + size].split(" ", 1)[1])
        rest = [l for l in lines[4 + size:] if l.strip()]
        naive = NaiveSentenceModel.from_lines(rest) if rest else None
        if kind is ModelKind.NAIVE_BAYES:
            counts = [_dense_row(raw["counts"][0], vocab.size), _dense_row(raw["counts"][1], vocab.size)]
            params = _nb_params(counts, raw["doc_counts"], raw["alpha"])
        else:
            kernel = Kernel(**raw["kernel"])
            params = {"bias": raw["bias"], "C": raw["C"], "kernel": kernel}
            if "weights" in raw:
                params["weights"] = _dense_row(raw["weights"], vocab.size)
            else:
                params["dual_coef"] = np.array(raw["dual_coef"])
                params["support"] = to_csr([SparseFeatureVector(tuple(i), tuple(v)) for i, v in raw["support"]],
                                           vocab.size)
        return cls(kind, scheme, vocab, params, meta["negation_window"], meta["metadata"], naive)

    @classmethod
    def load(cls, path: str | Path) -> "TrainedModel":
        return cls.from_lines(Path(path).read_text(encoding="utf-8").splitlines())


def _sparse_row(row: np.ndarray) -> list[list]:
    nz = np.flatnonzero(row)
    return [[int(i), float(row[i])] for i in nz]


def _dense_row(cells: Sequence[Sequence], size: int) -> np.ndarray:
    row = np.zeros(size)
    for i, v in cells:
        row[int(i)] = float(v)
    return row


def _nb_params(counts: Sequence[np.ndarray], doc_counts: Sequence[int], alpha: float) -> dict:
    total = sum(doc_counts)
    size = len(counts[0])
    log_cond = [np.log2((c + alpha) / (c.sum() + alpha * size)) for c in counts]
    return {"alpha": float(alpha), "doc_counts": [int(d) for d in doc_counts],
            "counts": [np.asarray(c, dtype=np.float64) for c in counts],
            "log_prior": [float(np.log2(d / total)) for d in doc_counts],
            "log_cond": log_cond}


def document_tokens(doc: ReviewDocument, negation_window: int | None) -> list[list]:
    """Per-sentence token lists built from sentence text (raw text if unsegmented)."""
    texts = [s.text for s in doc.sentences] if doc.sentences else [doc.raw_text]
    return [process_text(t, negation_window) for t in texts]


def train_document_model(train_docs: Sequence[ReviewDocument], scheme: FeatureScheme | str,
                         kind: ModelKind | str, hyper: Mapping[str, Any] | None = None,
                         negation_window: int | None = None, min_count: int = 2,
                         metadata: Mapping[str, Any] | None = None) -> TrainedModel:
    scheme, kind = FeatureScheme.parse(scheme), ModelKind.parse(kind)
    hyper = resolve_hyper(hyper)
    labels = [d.label for d in train_docs]
    if len(set(labels)) < 2:
        raise TrainingError("training documents must cover both polarities")

    units = [document_tokens(d, negation_window) for d in train_docs]
    vocab = fit_vocabulary(units, scheme, min_count)
    X = to_csr([vectorize(u, scheme, vocab) for u in units], vocab.size)
    y = np.array([l.sign for l in labels], dtype=np.float64)
    meta = dict(metadata or {})
    meta["hyper"] = {k: hyper[k] for k in sorted(hyper)}
    meta["min_count"] = min_count

    if kind is ModelKind.NAIVE_BAYES:
        pos = np.asarray(X[y > 0].sum(axis=0)).ravel()
        neg = np.asarray(X[y < 0].sum(axis=0)).ravel()
        params = _nb_params([pos, neg], [int((y > 0).sum()), int((y < 0).sum())], float(hyper["alpha"]))
        return TrainedModel(kind, scheme, vocab, params, negation_window, meta)

    kernel = kernel_from_hyper(hyper)
    C = float(hyper["C"])
    K = kernel.matrix(X, X)
    res = smo(K, y, C=C, eps=float(hyper["eps"]))
    meta["smo"] = {"iterations": res.iterations, "kkt_violation": res.violation}
    params: dict[str, Any] = {"bias": res.bias, "C": C, "kernel": kernel}
    coef = res.alpha * y
    if kernel.is_linear:
        params["weights"] = np.asarray(X.T @ coef).ravel()
    else:
        sv = np.flatnonzero(res.alpha > 0)
        params["dual_coef"] = coef[sv]
        params["support"] = X[sv]
    return TrainedModel(kind, scheme, vocab, params, negation_window, meta)


def predict(model: TrainedModel, doc: ReviewDocument,
            scheme: FeatureScheme | str | None = None) -> tuple[Polarity, float]:
    """Polarity and decision score; a score of zero (within tie tolerance) maps to Positive."""
    if scheme is not None and FeatureScheme.parse(scheme) is not model.scheme:
        raise SchemeMismatchError(f"model uses {model.scheme.value} features, pipeline asked for {scheme}")
    score = model.decision(model.vectorize_doc(doc))
    return (Polarity.POSITIVE if score >= -TIE_TOLERANCE else Polarity.NEGATIVE), score


def training_matrix(docs: Sequence[ReviewDocument], model: TrainedModel) -> sp.csr_matrix:
    return to_csr([model.vectorize_doc(d) for d in docs], model.vocab.size)
