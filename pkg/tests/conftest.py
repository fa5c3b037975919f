import json
from importlib import resources

import numpy as np
import pytest
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from blfr import aarset
from blfr.estimation import FitOptions, fit

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def aarset_data():
    return aarset()


@pytest.fixture(scope="session")
def aarset_fits(aarset_data):
    from blfr.distribution import FAMILIES

    return {tag: fit(fam, aarset_data, FitOptions()) for tag, fam in FAMILIES.items()}


def _schema_registry():
    root = resources.files("blfr") / "schemas"
    docs = {p.name: json.loads(p.read_text()) for p in root.iterdir() if p.name.endswith(".json")}
    registry = Registry().with_resources((name, Resource.from_contents(doc)) for name, doc in docs.items())
    return docs, registry


@pytest.fixture(scope="session")
def validate_schema():
    docs, registry = _schema_registry()

    def check(name, instance):
        Draft202012Validator(docs[name], registry=registry).validate(instance)

    return check


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
