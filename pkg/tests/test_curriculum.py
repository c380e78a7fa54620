import math

import numpy as np
import pytest

from acer.curriculum import CurriculumConfig, CurriculumState, advance_episode, priority


def test_peak_and_reference_value():
    assert priority(10.0, 10.0, 0.01, 0.005) == 1.0
    assert priority(-10.0, 10.0, 0.01, 0.005) == 1.0
    assert priority(0.0, 10.0, 0.01, 0.005) == pytest.approx(math.exp(-0.1), abs=1e-12)
    assert priority(20.0, 10.0, 0.01, 0.005) == pytest.approx(math.exp(-0.05), abs=1e-12)


def test_array_input_and_floor():
    p = priority(np.array([0.0, 5.0, 1e9]), 5.0, 0.01, 0.005)
    assert p.shape == (3,)
    assert p[1] == 1.0
    assert p[2] > 0.0


def test_invalid_config():
    with pytest.raises(ValueError):
        CurriculumConfig(k1=0.005, k2=0.01)
    with pytest.raises(ValueError):
        CurriculumConfig(c_init=0.0)
    with pytest.raises(ValueError):
        priority(1.0, 0.0, 0.01, 0.005)


def test_schedule_steps_every_period():
    cfg = CurriculumConfig(c_init=10, c_incr=1, update_period=100)
    s = CurriculumState.initial(cfg)
    cs = []
    for _ in range(250):
        s = advance_episode(s, cfg)
        cs.append(s.c)
    assert cs[98] == 10 and cs[99] == 11 and cs[199] == 12 and cs[-1] == 12
