import numpy as np
import pytest
from scipy.linalg import expm

from bigeo.lie import SE3, SO3, GroupPoint, euclidean, hat

_ACCEPTANCE = []


def series_exp(X, terms=30):
    """Truncated power series sum_k X^k / k!, the independent exp oracle."""
    X = np.asarray(X, dtype=float)
    out = np.broadcast_to(np.eye(X.shape[-1]), X.shape).copy()
    term = out.copy()
    for k in range(1, terms):
        term = term @ X / k
        out = out + term
    return out


def random_coords(rng, group, size, max_angle=3.0, trans_scale=1.0):
    """Algebra coordinates with rotation angle uniform in [0, max_angle)."""
    c = np.empty((size, group.dim))
    if group.kind == "R":
        return rng.normal(scale=trans_scale, size=(size, group.dim))
    axis = rng.normal(size=(size, 3))
    axis /= np.linalg.norm(axis, axis=-1, keepdims=True)
    c[:, :3] = axis * rng.uniform(0.0, max_angle, size=(size, 1))
    if group.kind == "SE3":
        c[:, 3:] = rng.normal(scale=trans_scale, size=(size, 3))
    return c


def random_mats(rng, group, size, max_angle=3.0, trans_scale=1.0):
    M = expm(hat(group, random_coords(rng, group, size, max_angle, trans_scale)))
    if group.kind != "SO3":
        M[:, -1, :] = np.eye(group.size)[-1]
    if group.kind == "R":
        M[:, :-1, :-1] = np.eye(group.n)
    return M


def random_point(rng, group=SE3, max_angle=3.0, trans_scale=1.0):
    return GroupPoint(group, random_mats(rng, group, 1, max_angle, trans_scale)[0])


GROUPS = [SO3, SE3, euclidean(1), euclidean(3)]


@pytest.fixture(params=GROUPS, ids=str)
def group(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def criterion():
    """Record an acceptance outcome; a summary line is printed at the end of the run."""

    def record(number, title, passed, detail=""):
        _ACCEPTANCE.append((number, title, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number} [{status}] {title}: {detail}")
