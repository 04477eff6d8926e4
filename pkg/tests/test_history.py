import numpy as np
import pytest

from flockdelay.exceptions import HistoryRangeError, OrderingError
from flockdelay.history import TrajectoryHistory
from flockdelay.models.initial import ConstantInitial, LinearInitial


@pytest.fixture
def initial():
    return ConstantInitial([[0.0], [1.0]], [[0.5], [-0.5]])


def _cubic(t):
    """x = t^3 - t, v = 3t^2 - 1, a = 6t"""
    return np.array([[t**3 - t]]), np.array([[3 * t**2 - 1]]), np.array([[6 * t]])


def test_initial_segment_is_served_by_initial_data(initial):
    history = TrajectoryHistory(initial, 1.0)
    positions, velocities = history.sample(-0.7)
    assert positions[:, 0] == pytest.approx([0.0, 1.0])
    assert velocities[:, 0] == pytest.approx([0.5, -0.5])


def test_append_advances_and_keeps_the_past(initial):
    history = TrajectoryHistory(initial, 1.0, capacity=2)
    zero = np.zeros((2, 1))
    history.append(0.25, (np.array([[0.1], [0.9]]), np.array([[0.4], [-0.4]])), (zero, zero))
    before = history.sample(0.25)
    history.append(0.5, (np.array([[0.2], [0.8]]), np.array([[0.3], [-0.3]])), (zero, zero))
    history.append(0.75, (np.array([[0.3], [0.7]]), np.array([[0.2], [-0.2]])), (zero, zero))
    assert history.t_now == 0.75
    assert len(history) == 4
    after = history.sample(0.25)
    assert np.array_equal(before[0], after[0])
    assert np.array_equal(before[1], after[1])


def test_append_must_move_forward(initial):
    history = TrajectoryHistory(initial, 1.0)
    zero = np.zeros((2, 1))
    history.append(0.5, initial.state(0.0), (zero, zero))
    with pytest.raises(OrderingError):
        history.append(0.5, initial.state(0.0), (zero, zero))


def test_lookup_outside_the_record(initial):
    history = TrajectoryHistory(initial, 1.0)
    with pytest.raises(HistoryRangeError):
        history.sample(-1.5)
    with pytest.raises(HistoryRangeError):
        history.sample(0.1)


def test_hermite_interpolant_reproduces_cubics():
    initial = LinearInitial([[0.0]], [[-1.0]], [[-1.0]], [[0.0]])
    history = TrajectoryHistory(initial, 0.5)
    grid = [0.0, 0.4, 1.0]
    for start, stop in zip(grid, grid[1:]):
        _, _, a0 = _cubic(start)
        x1, v1, a1 = _cubic(stop)
        history.append(stop, (x1, v1), (a0, a1))
    for t in (0.1, 0.25, 0.4, 0.7, 0.95):
        x, _ = history.sample(t)
        assert x[0, 0] == pytest.approx(t**3 - t, abs=1e-12)
    # velocities are cubic Hermite in the accelerations, exact for a quadratic velocity
    _, v = history.sample(0.7)
    assert v[0, 0] == pytest.approx(3 * 0.49 - 1, abs=1e-12)


def test_extrapolate_continues_the_last_cell():
    initial = LinearInitial([[0.0]], [[-1.0]], [[-1.0]], [[0.0]])
    history = TrajectoryHistory(initial, 0.5)
    _, _, a0 = _cubic(0.0)
    x1, v1, a1 = _cubic(0.5)
    history.append(0.5, (x1, v1), (a0, a1))
    x, _ = history.extrapolate(0.6)
    assert x[0, 0] == pytest.approx(0.6**3 - 0.6, abs=1e-12)


def test_record_indices(initial):
    history = TrajectoryHistory(initial, 0.0)
    zero = np.zeros((2, 1))
    for k in range(1, 11):
        history.append(0.1 * k, initial.state(0.0), (zero, zero))
    assert history.record_indices(3).tolist() == [0, 3, 6, 9, 10]
    assert history.record_indices(4, anchors=[0.5]).tolist() == [0, 4, 5, 8, 10]


def test_to_csv(tmp_path, initial):
    history = TrajectoryHistory(initial, 0.0)
    zero = np.zeros((2, 1))
    history.append(0.5, initial.state(0.0), (zero, zero))
    path = tmp_path / "trajectory.csv"
    history.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,agent,x0,v0"
    assert len(lines) == 1 + 2 * 2


def _sine_history(h_step):
    """A history holding x = sin t, v = cos t exactly at the nodes of a uniform grid on [0, 2]."""
    history = TrajectoryHistory(ConstantInitial([[0.0]], [[1.0]]), 0.0)
    grid = np.linspace(0.0, 2.0, round(2.0 / h_step) + 1)
    for start, stop in zip(grid, grid[1:]):
        history.append(
            stop,
            (np.array([[np.sin(stop)]]), np.array([[np.cos(stop)]])),
            (np.array([[-np.sin(start)]]), np.array([[-np.sin(stop)]])),
        )
    midpoints = (grid[:-1] + grid[1:]) / 2
    return history, midpoints


def test_dense_output_refines_at_fourth_order():
    position_errors, velocity_errors = [], []
    for h_step in (0.2, 0.1, 0.05):
        history, midpoints = _sine_history(h_step)
        positions, velocities = history.sample_many(midpoints)
        position_errors.append(np.max(np.abs(positions[:, 0, 0] - np.sin(midpoints))))
        velocity_errors.append(np.max(np.abs(velocities[:, 0, 0] - np.cos(midpoints))))
    for errors in (np.array(position_errors), np.array(velocity_errors)):
        assert np.all(errors > 1e-12)
        assert np.all(np.log2(errors[:-1] / errors[1:]) >= 3.5)
