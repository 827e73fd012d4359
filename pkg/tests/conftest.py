import numpy as np
import pytest

from sparsecd.datasets import karate
from sparsecd.generators import planted_partition, sample_dcsbm, two_class_symmetric
from sparsecd.graph import from_edge_list, largest_component


@pytest.fixture(scope="session")
def karate_graph():
    g, _ = karate()
    return g


@pytest.fixture(scope="session")
def small_sbm():
    """Connected two-class DC-SBM on a few hundred nodes."""
    lg = sample_dcsbm(two_class_symmetric(400, 9.0, 2.0, "power-uniform(3,10,2)"), seed=3)
    sub, mapping = largest_component(lg.graph)
    return sub, lg.labels[mapping >= 0]


def random_connected_graph(rng, n, extra):
    """A random spanning tree plus ``extra`` random chords."""
    parents = [int(rng.integers(i)) for i in range(1, n)]
    edges = [(p, i) for i, p in zip(range(1, n), parents)]
    edges += [tuple(rng.choice(n, 2, replace=False)) for _ in range(extra)]
    return from_edge_list(np.array(edges), n=n)


def cycle_graph(n):
    return from_edge_list(np.array([(i, (i + 1) % n) for i in range(n)]))


def complete_graph(n):
    return from_edge_list(np.array([(i, j) for i in range(n) for j in range(i + 1, n)]))


def random_regular(n, d, seed):
    """Configuration-model d-regular simple graph (rejection sampling)."""
    rng = np.random.default_rng(seed)
    while True:
        stubs = rng.permutation(np.repeat(np.arange(n), d)).reshape(-1, 2)
        lo, hi = stubs.min(axis=1), stubs.max(axis=1)
        if np.all(lo != hi) and len(np.unique(lo * n + hi)) == len(lo):
            return from_edge_list(stubs, n=n, strict=True)


def planted_sample(n=600, k=2, c_in=10.0, c_out=2.0, theta="constant", seed=0):
    return sample_dcsbm(planted_partition(n, k, c_in, c_out, theta), seed=seed)


# --- acceptance reporting: one PASS/FAIL line per criterion -----------------

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    number, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    if rep.failed and not detail:
        detail = str(call.excinfo.value).splitlines()[0] if call.excinfo else "error"
    _ACCEPTANCE[number] = (title, "PASS" if rep.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"[{status}] {number:>2}. {title}: {detail}")
