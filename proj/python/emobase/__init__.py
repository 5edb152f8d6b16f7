"""Python access to the emobase core.

Structured values (recordings, reports, plans, profiles) are plain dicts;
they are passed to the extension as JSON.
"""

import json

from . import _emobase
from ._emobase import (
    EmobaseError,
    Model,
    NotFoundError,
    PoolExhaustedError,
    extract_features,
    feature_names,
    median_filter,
)

__all__ = [
    "EmobaseError",
    "Model",
    "NotFoundError",
    "PoolExhaustedError",
    "build_dataset",
    "evaluate",
    "extract_features",
    "feature_names",
    "generate_session",
    "load_model",
    "median_filter",
    "preprocess",
    "synthesize",
    "train",
    "validate_plan",
]


def _dump(value):
    return value if isinstance(value, str) else json.dumps(value)


def synthesize(seed, sessions=9, separability=0.5):
    """Synthetic subject recordings as a dict."""
    return json.loads(_emobase.synthesize(seed, sessions, separability))


def preprocess(recordings):
    return json.loads(_emobase.preprocess(_dump(recordings)))


def build_dataset(signals, w=32, min_rank=None):
    """Feature table as CSV text with every feature column."""
    return _emobase.build_dataset(_dump(signals), w, min_rank)


def evaluate(csv, classifier="rf", method="cv", folds=10, binary=False, with_skt=False, mask=(), seed=0):
    return json.loads(_emobase.evaluate(csv, classifier, method, folds, binary, with_skt, list(mask), seed))


def train(csv, classifier="rf", binary=False, with_skt=False, mask=(), seed=0):
    return _emobase.train(csv, classifier, binary, with_skt, list(mask), seed)


def load_model(model):
    return _emobase.load_model(_dump(model))


def generate_session(profile, pool, session_id, personalized=False, config=None):
    text = _emobase.generate_session(_dump(profile), _dump(pool), session_id, personalized, _dump(config or {}))
    return json.loads(text)


def validate_plan(plan, pool, profile, config=None):
    """Violations of a plan; an empty list means it is valid."""
    return _emobase.validate_plan(_dump(plan), _dump(pool), _dump(profile), _dump(config or {}))
