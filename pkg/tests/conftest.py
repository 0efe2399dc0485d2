import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=50,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    # synthesized stand-in corpus; tests only need piecewise-smooth images
    from corrupt_recover.experiments import synthesize_corpus

    path = tmp_path_factory.mktemp("corpus")
    synthesize_corpus(path, count=12, size=96, seed=0)
    return path
