import pytest

from sumproduct.graph import MATERIALIZED, build_graph, certify
from sumproduct.rings import parse_ring


@pytest.fixture(scope="session")
def z9():
    return parse_ring("zpr:3,2")


@pytest.fixture(scope="session")
def f3x2():
    return parse_ring("polyq:3,2,0,1")


@pytest.fixture(scope="session")
def z25_graph():
    return build_graph(parse_ring("zpr:5,2"), MATERIALIZED)


@pytest.fixture(scope="session")
def z25_cert(z25_graph):
    return certify(z25_graph)


@pytest.fixture(scope="session")
def z9_graph(z9):
    return build_graph(z9, MATERIALIZED)


@pytest.fixture(scope="session")
def f3x2_graph(f3x2):
    return build_graph(f3x2, MATERIALIZED)


# -- acceptance bookkeeping: one PASS/FAIL line per criterion, echoed in the terminal summary

import contextlib
import time

_ACCEPTANCE: list[str] = []


class _Recorder:
    @contextlib.contextmanager
    def __call__(self, number: int, name: str, limit: float | None = None):
        start = time.perf_counter()
        info = {"detail": ""}
        try:
            yield info
        except BaseException as exc:
            self._line("FAIL", number, name, time.perf_counter() - start, f"{type(exc).__name__}: {exc}"[:200])
            raise
        elapsed = time.perf_counter() - start
        if limit is not None and elapsed > limit:
            self._line("FAIL", number, name, elapsed, f"over the {limit:g} s limit")
            raise AssertionError(f"criterion {number} took {elapsed:.2f} s > {limit:g} s")
        self._line("PASS", number, name, elapsed, info["detail"])

    @staticmethod
    def _line(status, number, name, elapsed, detail):
        line = f"{status} criterion {number}: {name} ({elapsed:.2f} s)" + (f" -- {detail}" if detail else "")
        _ACCEPTANCE.append(line)
        print(line)


@pytest.fixture(scope="session")
def criterion():
    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
