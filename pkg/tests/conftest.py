import pytest

from wazobia.corpus import (
    bundled_corpus_path,
    bundled_gazetteer_path,
    read_corpus,
)
from wazobia.postprocess import Gazetteer


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        outcome = "PASS" if report.passed else "FAIL"
        print(f"\nACCEPTANCE {name}: {outcome}", flush=True)


@pytest.fixture(scope="session")
def mini_corpus():
    return read_corpus(bundled_corpus_path()).sentences


@pytest.fixture(scope="session")
def bundled_gazetteer():
    return Gazetteer.load(bundled_gazetteer_path())


@pytest.fixture(scope="session")
def empty_gazetteer():
    return Gazetteer()
