from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbitsim.anneal import AnnealSchedule, beta_at, linear_schedule


def test_fourteen_stage_default_protocol():
    s = linear_schedule(0.5, 7.0, 0.5, 937)
    assert len(s.stages) == 14
    assert s.total_sweeps == 14 * 937 == 13118
    assert s.betas[0] == 0.5 and s.betas[-1] == 7.0
    assert np.allclose(np.diff(s.betas), 0.5)


def test_single_stage_schedule():
    s = linear_schedule(1.0, 1.0, 0.5, 100)
    assert len(s.stages) == 1
    assert s.total_sweeps == 100
    assert beta_at(s, 50) == 1.0


def test_unit_sweep_stages():
    s = linear_schedule(0.5, 7.0, 0.5, 1)
    assert len(s.stages) == 14
    assert s.total_sweeps == 14


def test_invalid_schedules_rejected():
    with pytest.raises(ValueError):
        linear_schedule(7.0, 0.5, 0.5, 937)
    with pytest.raises(ValueError):
        linear_schedule(0.5, 7.0, 0.0, 937)
    with pytest.raises(ValueError):
        linear_schedule(0.5, 7.0, 0.5, 0)
    with pytest.raises(ValueError):
        AnnealSchedule(stages=((1.0, 10), (0.5, 10)))  # decreasing beta
    with pytest.raises(ValueError):
        AnnealSchedule(stages=((1.0, 0),))


def test_beta_at_boundary_enters_next_stage():
    s = linear_schedule(0.5, 7.0, 0.5, 937)
    assert beta_at(s, 0) == 0.5
    assert beta_at(s, 936) == 0.5
    assert beta_at(s, 937) == 1.0
    assert beta_at(s, 13117) == 7.0
    assert beta_at(s, 13118) == 7.0  # full progress holds the final stage


def test_beta_at_rejects_out_of_range():
    s = linear_schedule(0.5, 1.0, 0.5, 10)
    with pytest.raises(ValueError):
        beta_at(s, -1)
    with pytest.raises(ValueError):
        beta_at(s, 21)


def test_cumulative_sweeps_are_stage_ends():
    s = linear_schedule(0.5, 2.0, 0.5, 3)
    assert list(s.cumulative_sweeps()) == [3, 6, 9, 12]


@given(start=st.floats(0.0, 3.0), span=st.floats(0.0, 5.0),
       step=st.floats(0.1, 1.0), sweeps=st.integers(1, 50))
@settings(max_examples=50, deadline=None)
def test_beta_at_is_monotone_piecewise_constant(start, span, step, sweeps):
    s = linear_schedule(start, start + span, step, sweeps)
    samples = [beta_at(s, p) for p in range(0, s.total_sweeps + 1)]
    assert all(a <= b for a, b in zip(samples, samples[1:]))
    assert len(set(samples)) == len(s.stages)
