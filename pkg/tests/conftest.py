from __future__ import annotations

import json
from pathlib import Path

import pytest

import tierslicer
from tierslicer import parse, placement_problem, resolve_calls
from tierslicer.depgraph import build_pdg

FIXTURES = Path(tierslicer.__file__).parent / "fixtures"


def fixture_path(name: str) -> Path:
    return FIXTURES / name


def load_fixture(name: str):
    return resolve_calls(parse(fixture_path(name).read_text(), name))


def fixture_problem(name: str):
    return placement_problem(build_pdg(load_fixture(name)))


@pytest.fixture(scope="session")
def manifest() -> dict:
    return json.loads((FIXTURES / "manifest.json").read_text())


@pytest.fixture(scope="session")
def all_fixture_names(manifest) -> list:
    return sorted(manifest)
