from __future__ import annotations

import sys
from pathlib import Path

import pytest

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE))

FIXTURES = HERE / "fixtures"
TOY = FIXTURES / "toy"
CORPUS = FIXTURES / "corpus"
GOLDEN = HERE / "golden"


def all_fixture_files() -> list[Path]:
    return sorted(FIXTURES.rglob("*.obo"))


@pytest.fixture
def toy_dir() -> Path:
    return TOY


@pytest.fixture(scope="session")
def toy_ontologies():
    from ontomod.obo import parse_obo

    return [
        parse_obo((TOY / f"{stem}.obo").read_text(), oid)
        for oid, stem in (("NCI", "nci_mini"), ("GO", "go_mini"), ("PRO", "pro_mini"))
    ]
