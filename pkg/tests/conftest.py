import logging
from pathlib import Path

import pytest

from synrec.cegis import SynthesisConfig
from synrec.parser import load_library, parse_program
from synrec.prelude import prelude_text

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"

logging.getLogger("synrec").setLevel(logging.WARNING)


def corpus_text(name: str) -> str:
    return (CORPUS / f"{name}.synrec").read_text()


@pytest.fixture(scope="session")
def lang_text() -> str:
    return corpus_text("lang")


@pytest.fixture(scope="session")
def lang_program(lang_text):
    return load_library(parse_program(lang_text), prelude_text())


@pytest.fixture(scope="session")
def lang_expected_text() -> str:
    return corpus_text("lang.expected")


@pytest.fixture
def small_cfg() -> SynthesisConfig:
    return SynthesisConfig(input_depth=2, timeout_secs=60)


@pytest.fixture(scope="session")
def default_cfg() -> SynthesisConfig:
    return SynthesisConfig()
