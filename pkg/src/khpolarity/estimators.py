"""Scikit-learn estimator wrappers over the functional core.

These exist so the cleaner and the two classifiers drop into sklearn
pipelines and grid searches; the underlying logic lives in textnorm,
lexlabel, and llmclient.
"""
from __future__ import annotations

from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin

from .labels import PolarityLabel
from .lexlabel import HeuristicLabel, Lexicon, auto_label, starter_lexicon
from .llmclient import EndpointConfig, FailedOutcome, RunMode, classify_batch
from .textnorm import CleanConfig, clean_text

__all__ = ["TextCleaner", "LexiconPolarityClassifier", "LlmPolarityClassifier"]


class TextCleaner(BaseEstimator, TransformerMixin):
    """Stateless text normalizer with the sklearn transformer surface."""

    def __init__(self, lowercase_latin: bool = True, strip_punctuation: bool = True,
                 strip_emoji: bool = True, strip_symbols: bool = True,
                 respell_map: dict[str, str] | None = None,
                 collapse_whitespace: bool = True):
        self.lowercase_latin = lowercase_latin
        self.strip_punctuation = strip_punctuation
        self.strip_emoji = strip_emoji
        self.strip_symbols = strip_symbols
        self.respell_map = respell_map
        self.collapse_whitespace = collapse_whitespace

    def _config(self) -> CleanConfig:
        return CleanConfig(
            lowercase_latin=self.lowercase_latin,
            strip_punctuation=self.strip_punctuation,
            strip_emoji=self.strip_emoji,
            strip_symbols=self.strip_symbols,
            respell_map=self.respell_map or {},
            collapse_whitespace=self.collapse_whitespace,
        )

    def fit(self, X, y=None):
        self._config()  # validates the respell map
        return self

    def transform(self, X):
        cfg = self._config()
        return [clean_text(text, cfg) for text in X]


class LexiconPolarityClassifier(BaseEstimator, ClassifierMixin):
    """Lexicon voting classifier; predictions come with extractable rationales."""

    def __init__(self, lexicon: Lexicon | None = None):
        self.lexicon = lexicon

    def fit(self, X, y=None):
        self.lexicon_ = self.lexicon if self.lexicon is not None else starter_lexicon()
        self.classes_ = [label.value for label in PolarityLabel]
        return self

    def _check_fitted(self):
        if not hasattr(self, "lexicon_"):
            raise RuntimeError("call fit before predict")

    def explain(self, X) -> list[HeuristicLabel]:
        self._check_fitted()
        return [auto_label(text, self.lexicon_) for text in X]

    def predict(self, X):
        return [h.label.value for h in self.explain(X)]


class LlmPolarityClassifier(BaseEstimator, ClassifierMixin):
    """Remote-endpoint classifier.  Unparseable responses predict the
    string "unparseable" rather than raising, so scores stay honest."""

    def __init__(self, base_url: str = "http://localhost:8000", model_name: str = "",
                 api_key: str | None = None, mode: str = "thinking",
                 temperature: float = 0.0, max_new_tokens: int = 256,
                 request_timeout: float = 60.0, max_retries: int = 2,
                 max_in_flight: int = 4):
        self.base_url = base_url
        self.model_name = model_name
        self.api_key = api_key
        self.mode = mode
        self.temperature = temperature
        self.max_new_tokens = max_new_tokens
        self.request_timeout = request_timeout
        self.max_retries = max_retries
        self.max_in_flight = max_in_flight

    def _config(self) -> EndpointConfig:
        return EndpointConfig(
            base_url=self.base_url,
            model_name=self.model_name,
            api_key=self.api_key,
            temperature=self.temperature,
            max_new_tokens=self.max_new_tokens,
            request_timeout=self.request_timeout,
            max_retries=self.max_retries,
            max_in_flight=self.max_in_flight,
        )

    def fit(self, X=None, y=None):
        self._config()
        self.mode_ = RunMode(self.mode)
        self.classes_ = [label.value for label in PolarityLabel]
        return self

    def classify(self, X):
        """Raw outcomes, one per input, order preserved."""
        if not hasattr(self, "mode_"):
            raise RuntimeError("call fit before classify")
        return classify_batch(list(X), self._config(), self.mode_)

    def predict(self, X):
        out = []
        for outcome in self.classify(X):
            if isinstance(outcome, FailedOutcome):
                out.append("unparseable")
            else:
                out.append(outcome.label.value)
        return out
