"""Paths to the bundled offline fixture: a 12-dataset synthetic city
catalog ("Lindenstadt"), a 12-question benchmark suite over it, and the
scripted-provider script that drives both stages deterministically.
"""
from __future__ import annotations

from pathlib import Path


def fixtures_root() -> Path:
    return Path(__file__).parent / "fixtures"


def catalog_manifest() -> Path:
    return fixtures_root() / "lindenstadt" / "manifest.json"


def suite_path() -> Path:
    return fixtures_root() / "suite" / "suite.json"


def provider_script() -> Path:
    return fixtures_root() / "scripts" / "provider.json"
