"""Emotion class labels.

``CLASSES`` is the reporting order used for confusion matrices (anger,
happy, surprise, sad, fear, disgust, neutral). ``VOTE_ORDER`` is the fixed
order used to break ties between one-vs-one votes.
"""

from .errors import FormatError

CLASSES = ("anger", "happy", "surprise", "sad", "fear", "disgust", "neutral")
VOTE_ORDER = ("happy", "anger", "surprise", "sad", "disgust", "fear", "neutral")

_ALIASES = {
    "angry": "anger",
    "surprised": "surprise",
    "sadness": "sad",
    "happiness": "happy",
    "disgusted": "disgust",
    "afraid": "fear",
}


def canonical_label(name):
    """Map a label string (case-insensitive, common aliases allowed) to its canonical form."""
    key = str(name).strip().lower()
    key = _ALIASES.get(key, key)
    if key not in CLASSES:
        raise FormatError(f"unknown class label {name!r}")
    return key


def class_code(name):
    """Integer code of a label in ``CLASSES`` order."""
    return CLASSES.index(canonical_label(name))
