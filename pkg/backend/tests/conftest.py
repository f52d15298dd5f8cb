from __future__ import annotations

from pathlib import Path

import pytest
import torch

from reformkit_backend.classifier import load_labeled_corpus, save_classifier, train_classifier
from reformkit_backend.data import generable_triads, load_triads
from reformkit_backend.model import DecodingConfig
from reformkit_backend.service import CLASSIFIER_FILE, GENERATOR_FILE
from reformkit_backend.train import TrainingConfig, fit, save_artifact

HERE = Path(__file__).resolve().parent
TRIADS_PATH = HERE / "fixtures" / "triads.jsonl"
ACCEPTABILITY_PATH = HERE.parent / "data" / "acceptability.jsonl"

torch.set_num_threads(4)


@pytest.fixture(scope="session")
def triads():
    return load_triads(TRIADS_PATH)


@pytest.fixture(scope="session")
def training_triads(triads):
    return generable_triads(triads, domain="hybrid")


@pytest.fixture(scope="session")
def artifacts_dir(tmp_path_factory, training_triads):
    """A small but real pair of artifacts for service-level tests."""
    directory = tmp_path_factory.mktemp("artifacts")
    cfg = TrainingConfig(
        base_model="gru-tiny",
        epochs=3,
        seed=3,
        decoding=DecodingConfig(mode="nucleus", top_p=0.5, seed=11),
    )
    fitted = fit(training_triads[:120], cfg)
    save_artifact(fitted, directory / GENERATOR_FILE)
    classifier = train_classifier(load_labeled_corpus(ACCEPTABILITY_PATH), seed=0)
    save_classifier(classifier, directory / CLASSIFIER_FILE)
    return directory
