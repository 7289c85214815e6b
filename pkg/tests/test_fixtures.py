import json
from pathlib import Path

import pytest

from qecdip.cli import example_fixtures

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
DOCS = example_fixtures()


def test_no_extra_files():
    assert sorted(p.name for p in FIXTURES.glob("*.json")) == sorted(DOCS)


@pytest.mark.parametrize("name", sorted(DOCS))
def test_fixture_matches_generator(name):
    # regenerate with: qecdip export-example fixtures
    assert json.loads((FIXTURES / name).read_text()) == DOCS[name]
