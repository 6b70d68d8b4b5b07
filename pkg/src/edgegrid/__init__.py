"""Edge-grid video features with CFS selection and a one-vs-one RBF SVM."""

from .classes import CLASSES
from .config import RunConfig

__all__ = ["CLASSES", "RunConfig"]
