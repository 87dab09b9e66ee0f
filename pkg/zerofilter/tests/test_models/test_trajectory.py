import numpy as np

from zerofilter.models.grid import Field
from zerofilter.models.trajectory import (
    BREAKING,
    RunStatus,
    TrajectoryBuilder,
)


def test_status_strings():
    assert str(RunStatus()) == "completed"
    assert str(RunStatus(BREAKING, 0.3222)) == "breaking-detected(0.3222)"
    assert not RunStatus(BREAKING, 0.3).completed


def test_builder_freezes_series(sine):
    builder = TrajectoryBuilder("run", (2.0, 1.0))
    for t in (0.0, 0.1):
        builder.record(
            sine.with_meta(time=t),
            {2.0: 3.0, 1.0: 2.0},
            min_slope=-1.0,
            energy=np.pi,
            tail_fraction=0.0,
        )
    assert builder.active
    trajectory = builder.freeze()
    assert len(trajectory) == 2
    np.testing.assert_allclose(trajectory.times, [0.0, 0.1])
    np.testing.assert_allclose(trajectory.norm_series[2.0], [3.0, 3.0])
    assert isinstance(trajectory.final, Field)
    assert trajectory.fields[0].time == 0.0
    assert trajectory.status.completed
