import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pprembed import Graph, erdos_renyi_edges

settings.register_profile(
    "ci",
    derandomize=True,
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


def make_er_graph(n: int, avg_degree: float, seed: int) -> Graph:
    return Graph.from_edges(
        erdos_renyi_edges(n, avg_degree=avg_degree, seed=seed), node_count=n
    )


def make_connected_graph(n: int, extra_avg_degree: float, seed: int) -> Graph:
    """Random attachment tree plus extra uniform edges; always connected."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    parents = np.array(
        [order[rng.integers(0, i)] for i in range(1, n)], dtype=np.int64
    )
    tree = np.column_stack((order[1:], parents))
    extra = erdos_renyi_edges(n, avg_degree=extra_avg_degree, seed=seed + 1)
    edges = np.vstack((tree, extra)) if len(extra) else tree
    return Graph.from_edges(edges, node_count=n)


@pytest.fixture(scope="session")
def sbm_400():
    from pprembed import two_block_sbm

    edges, labels = two_block_sbm(400, 0.2, 0.01, seed=20240)
    return Graph.from_edges(edges, node_count=400), labels


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    del exitstatus, config
    rows = []
    for status, outcome in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(status, []):
            if getattr(report, "when", "call") != "call":
                continue
            if "test_acceptance.py" in report.nodeid:
                rows.append((report.nodeid.split("::")[-1], outcome))
    if not rows:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome in sorted(rows):
        terminalreporter.write_line(f"{outcome}  {name}")
