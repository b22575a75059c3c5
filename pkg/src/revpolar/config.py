"""Run configuration: defaults, key=value files with per-domain sections, env overrides.

File layout::

    [run]
    seed = 7
    theta = 2

    [domain:beauty]
    corpus = data/beauty.jsonl

Precedence, lowest first: field defaults, config file, ``REVPOLAR_<KEY>``
environment variables, command-line flags.
"""

from __future__ import annotations

import configparser
import io
import os
from dataclasses import dataclass, field, fields
from typing import Any, Mapping

from .correction import CorrectionConfig, Fallback
from .experiment import ExperimentSettings, GridRow
from .learn import ModelKind
from .learn.models import PRESETS
from .textproc import ConfigError, FeatureScheme

ENV_PREFIX = "REVPOLAR_"
RUN_SECTION = "run"
DOMAIN_PREFIX = "domain:"


def _opt(default, help: str):
    return field(default=default, metadata={"help": help})


@dataclass
class RunConfig:
    ratio: float = _opt(0.8, "train fraction of each (domain, label) cell")
    seed: int = _opt(0, "split seed")
    theta: int = _opt(2, "minimum same-polarity run length kept by sentence-level correction")
    negation_window: int = _opt(3, "tokens tagged NOT_ after a negation word (1-3)")
    negation_scope: str = _opt("corrected", "rows that use negation tagging: corrected, all or none")
    schemes: str = _opt("Bigram,BOWS,Unigram", "feature schemes in the grid")
    kinds: str = _opt("SVM,NB", "document learners in the grid")
    corrected_rows: bool = _opt(True, "include the corrected (-cor) rows")
    standard_rows: bool = _opt(True, "include the uncorrected standard rows")
    baseline_row: bool = _opt(True, "include the Baseline row")
    trainset_correction: bool = _opt(True, "re-pool misclassified training sentences")
    sentence_correction: bool = _opt(True, "drop outlier-polarity sentences from documents")
    retrain_naive: bool = _opt(True, "retrain the naive sentence model on the corrected pools")
    fallback: str = _opt("KeepAll", "policy when no run reaches theta: KeepAll or KeepMajorityRuns")
    alpha: float = _opt(1.0, "additive smoothing for naive Bayes models")
    C: float = _opt(1.0, "SVM soft-margin penalty")
    eps: float = _opt(1e-3, "SVM KKT tolerance")
    kernel: str = _opt("linear", "SVM kernel: linear, poly, normalized_poly or puk")
    preset: str = _opt("", f"named SVM preset ({', '.join(sorted(PRESETS))}); empty for none")
    min_count: int = _opt(2, "minimum feature count for document-level vocabularies")
    bootstrap: int = _opt(0, "bootstrap replicates for 95% intervals; 0 disables")
    jobs: int = _opt(1, "parallel grid cells")
    output_dir: str = _opt("runs/out", "directory for reports, models and traces")
    corpora: dict[str, str] = field(default_factory=dict, metadata={"help": "domain -> corpus JSONL path"})

    def validate(self) -> "RunConfig":
        if not 0 < self.ratio < 1:
            raise ConfigError(f"ratio must lie in (0, 1), got {self.ratio}")
        if self.negation_scope not in ("corrected", "all", "none"):
            raise ConfigError(f"negation_scope must be corrected, all or none, got {self.negation_scope!r}")
        if self.jobs < 1 or self.bootstrap < 0 or self.min_count < 1:
            raise ConfigError("jobs and min_count must be >= 1; bootstrap must be >= 0")
        if self.preset and self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}")
        self.scheme_list()
        self.kind_list()
        self.correction()
        return self

    def scheme_list(self) -> list[FeatureScheme]:
        return [FeatureScheme.parse(s) for s in _split(self.schemes)]

    def kind_list(self) -> list[ModelKind]:
        return [ModelKind.parse(k) for k in _split(self.kinds)]

    def correction(self) -> CorrectionConfig:
        return CorrectionConfig(theta=self.theta, negation_window=self.negation_window,
                                retrain_naive_after_trainset_correction=self.retrain_naive,
                                fallback=Fallback.parse(self.fallback),
                                trainset_correction=self.trainset_correction,
                                sentence_correction=self.sentence_correction)

    def rows(self) -> list[GridRow]:
        schemes = self.scheme_list()
        rows = []
        if self.corrected_rows:
            rows += [GridRow(s, corrected=True) for s in schemes]
        if self.standard_rows:
            rows += [GridRow(s) for s in schemes]
        if self.baseline_row:
            rows.append(GridRow(FeatureScheme.UNIGRAM, baseline=True))
        return rows

    def hyper(self) -> dict[str, Any]:
        hyper: dict[str, Any] = {"alpha": self.alpha, "eps": self.eps}
        if self.preset:
            hyper["preset"] = self.preset
        else:
            hyper.update(C=self.C, kernel=self.kernel)
        return hyper

    def settings(self, domain: str) -> ExperimentSettings:
        return ExperimentSettings(domain=domain, ratio=self.ratio, seed=self.seed, kinds=tuple(self.kind_list()),
                                  rows=tuple(self.rows()), correction=self.correction(),
                                  negation_scope=self.negation_scope, naive_alpha=self.alpha,
                                  min_count=self.min_count, hyper=self.hyper(), bootstrap=self.bootstrap,
                                  jobs=self.jobs)

    # ------------------------------------------------------------------

    def to_text(self) -> str:
        parser = _parser()
        parser[RUN_SECTION] = {f.name: _dump(getattr(self, f.name)) for f in scalar_fields()}
        for domain in sorted(self.corpora):
            parser[DOMAIN_PREFIX + domain] = {"corpus": self.corpora[domain]}
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str, base: "RunConfig | None" = None) -> "RunConfig":
        parser = _parser()
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"bad config file: {exc}") from exc
        values: dict[str, Any] = {}
        corpora = dict(base.corpora) if base else {}
        for section in parser.sections():
            if section == RUN_SECTION:
                values.update(parser[section])
            elif section.startswith(DOMAIN_PREFIX):
                corpora[section[len(DOMAIN_PREFIX):]] = parser[section]["corpus"]
            else:
                raise ConfigError(f"unknown config section [{section}]")
        cfg = (base or cls()).updated(values)
        cfg.corpora = corpora
        return cfg

    def updated(self, values: Mapping[str, Any]) -> "RunConfig":
        """Copy with string or typed overrides applied; unknown keys are errors."""
        known = {f.name: f for f in scalar_fields()}
        kwargs = {f.name: getattr(self, f.name) for f in fields(self)}
        kwargs["corpora"] = dict(self.corpora)
        for key, raw in values.items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(raw, type(getattr(self, key)), key)
        return RunConfig(**kwargs)

    def with_env(self, environ: Mapping[str, str] | None = None) -> "RunConfig":
        environ = os.environ if environ is None else environ
        names = {f.name.upper(): f.name for f in scalar_fields()}
        overrides = {names[k[len(ENV_PREFIX):]]: v for k, v in environ.items()
                     if k.startswith(ENV_PREFIX) and k[len(ENV_PREFIX):] in names}
        return self.updated(overrides)


def scalar_fields():
    return [f for f in fields(RunConfig) if f.name != "corpora"]


def _parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(default_section="__none__", interpolation=None)
    parser.optionxform = str  # keep key case ("C")
    return parser


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _dump(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def _coerce(raw: Any, typ: type, key: str) -> Any:
    if not isinstance(raw, str):
        return raw
    try:
        if typ is bool:
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return typ(raw.strip()) if typ in (int, float) else raw.strip()
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def field_help() -> list[tuple[str, Any, str]]:
    return [(f.name, f.default, f.metadata.get("help", "")) for f in scalar_fields()]
