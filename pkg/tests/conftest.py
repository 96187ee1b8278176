import numpy as np
import pytest

from dali.corpus import Corpus, ParallelCorpus

_acceptance = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def write(tmp_path):
    def _write(name, text, mode="w"):
        p = tmp_path / name
        if mode == "wb":
            p.write_bytes(text)
        else:
            p.write_text(text, encoding="utf-8")
        return p

    return _write


def corpus_of(*lines, side="target"):
    return Corpus(tuple(tuple(l.split()) for l in lines), side)


def parallel_of(*pairs):
    return ParallelCorpus(tuple((tuple(s.split()), tuple(t.split())) for s, t in pairs))


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = report.keywords.get("acceptance")
    if marker is None:
        return
    name = report.nodeid.split("::")[-1]
    prev = _acceptance.get(name)
    ok = report.passed
    _acceptance[name] = ok if prev is None else (prev and ok)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance):
        status = "PASS" if _acceptance[name] else "FAIL"
        terminalreporter.write_line(f"{status}  {name}")
