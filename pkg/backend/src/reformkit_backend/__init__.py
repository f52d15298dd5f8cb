"""Reference neural backend for the reformulation wire protocol."""

__version__ = "0.1.0"

from .classifier import AcceptabilityClassifier, load_labeled_corpus, train_classifier
from .data import Triad, generable_triads, load_triads
from .model import DecodingConfig
from .service import create_app
from .train import TrainingConfig, TrainingResult, fit, load_artifact, save_artifact, train
