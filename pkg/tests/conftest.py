"""Shared fixtures and event-stream helpers for the test suite."""

import numpy as np
import pytest

from vcgst.graph import EdgeEvent, EdgeKind, NodeEvent, NodeKind


def random_event_stream(rng, n_persons=30, n_startups=20, n_periods=10,
                        n_edges=80):
    """A schema-valid random stream: every node precedes its edges."""
    events = []
    p_period = {}
    s_period = {}
    for i in range(n_persons):
        period = int(rng.integers(0, n_periods))
        p_period[f"p{i}"] = period
        events.append(NodeEvent(period, f"p{i}", NodeKind.PERSON))
    for j in range(n_startups):
        period = int(rng.integers(0, n_periods))
        s_period[f"s{j}"] = period
        events.append(NodeEvent(period, f"s{j}", NodeKind.STARTUP))
    for _ in range(n_edges):
        p = f"p{rng.integers(0, n_persons)}"
        s = f"s{rng.integers(0, n_startups)}"
        earliest = max(p_period[p], s_period[s])
        period = int(rng.integers(earliest, n_periods))
        kind = EdgeKind.INVEST if rng.uniform() < 0.7 else EdgeKind.EMPLOY
        events.append(EdgeEvent(period, p, s, kind))
    return events


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
