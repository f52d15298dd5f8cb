import pytest
import torch

from reformkit_backend.data import Triad
from reformkit_backend.model import DecodingConfig
from reformkit_backend.train import TrainingConfig, fit, load_artifact, save_artifact, train


def test_smoke_training_loss_decreases(training_triads):
    cfg = TrainingConfig(base_model="gru-tiny", epochs=1, folds=5, seed=1)
    result = train(training_triads[:50], cfg)
    assert result.step_losses[-1] < result.step_losses[0]
    assert len(result.folds) == 5
    for fold in result.folds:
        assert fold.last_loss < fold.first_loss
        assert fold.n_train + fold.n_validation == 50
        assert fold.state_dict


def test_fewer_triads_than_folds_rejected(training_triads):
    cfg = TrainingConfig(folds=5)
    with pytest.raises(ValueError, match="at least 5"):
        train(training_triads[:3], cfg)


def test_non_generable_types_rejected():
    bad = [Triad("a", "change", "b")]
    with pytest.raises(ValueError, match="change"):
        train(bad, TrainingConfig(folds=2))


def test_hybrid_pool_trains_one_model(training_triads):
    domains = {t.domain for t in training_triads}
    assert domains == {"movie", "travel"}
    cfg = TrainingConfig(base_model="gru-tiny", epochs=1, folds=2, seed=2)
    result = train(training_triads[:40], cfg)
    assert result.artifact.cfg.domain == "hybrid"


def test_config_validation():
    with pytest.raises(ValueError):
        TrainingConfig(base_model="bert-large")
    with pytest.raises(ValueError):
        TrainingConfig(folds=1)
    with pytest.raises(ValueError):
        DecodingConfig(mode="beam")
    with pytest.raises(ValueError):
        DecodingConfig(top_p=0.0)


def test_fit_is_deterministic(training_triads):
    cfg = TrainingConfig(base_model="gru-tiny", epochs=1, seed=9)
    first = fit(training_triads[:30], cfg)
    second = fit(training_triads[:30], cfg)
    for a, b in zip(first.model.state_dict().values(), second.model.state_dict().values()):
        assert torch.equal(a, b)


def test_artifact_round_trip(tmp_path, training_triads):
    cfg = TrainingConfig(base_model="gru-tiny", epochs=1, seed=4)
    fitted = fit(training_triads[:30], cfg)
    path = tmp_path / "generator.pt"
    save_artifact(fitted, path)
    restored = load_artifact(path)
    assert restored.vocab.itos == fitted.vocab.itos
    assert restored.cfg.guided == fitted.cfg.guided
    greedy = DecodingConfig(mode="greedy")
    utterance = training_triads[0].original
    assert restored.generate(utterance, "repeat", greedy) == fitted.generate(
        utterance, "repeat", greedy
    )


def test_guided_model_uses_type_condition(training_triads):
    cfg = TrainingConfig(base_model="gru-tiny", epochs=8, seed=5)
    fitted = fit(training_triads[:250], cfg)
    greedy = DecodingConfig(mode="greedy")
    utterance = "I am looking for a comedy movie."
    outputs = {t: fitted.generate(utterance, t, greedy)[0] for t in ("repeat", "simplify")}
    assert outputs["repeat"] != outputs["simplify"]
