from __future__ import annotations

from dataclasses import dataclass

import pytest

from tddetect import features, pipeline, synthgen
from tddetect.corpus import Corpus


@pytest.fixture(scope="session")
def pretrained_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("emb") / "pretrained.txt"
    synthgen.write_fixture_embedding(path)
    return path


@dataclass
class Bundle:
    corpus: Corpus
    truth: dict[str, int]
    context: features.FeatureContext
    fmatrix: features.FeatureMatrix


@pytest.fixture(scope="session")
def bundle(pretrained_path) -> Bundle:
    """A 300-ticket synthetic corpus with 100 simulated labels.

    Session-scoped and shared: tests must not mutate it.
    """
    corpus, truth = synthgen.generate_synthetic_corpus(300, 0.16, seed=7)
    context = pipeline.build_feature_context(corpus, pretrained_path, seed=3)
    fmatrix = features.featurize_corpus(corpus, context)
    pipeline.simulate_active_learning(
        corpus, truth, fmatrix, n_labels=100, batch_size=25, seed=11
    )
    return Bundle(corpus=corpus, truth=truth, context=context, fmatrix=fmatrix)
