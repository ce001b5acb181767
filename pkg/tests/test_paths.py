import math

import numpy as np
import pytest

from qaction import (ActionSpec, ConjugatePoint, Potential1D, Potential2D,
                     euclidean_action, path_energy_residual,
                     solve_euclidean_path)
from qaction.paths import el_residual, is_local_minimum

FREE = ActionSpec(mass=1.0, potential=Potential1D())
HARM = ActionSpec(mass=1.0, potential=Potential1D(v2=0.5))
DW = ActionSpec(mass=1.0, potential=Potential1D(v0=0.5, v2=-1.0, v4=0.5))


def test_free_particle_straight_line():
    tr = solve_euclidean_path(FREE, 0.0, 1.0, 1.0, N=50)
    assert np.abs(tr.positions - tr.times).max() < 1e-12
    assert el_residual(FREE, tr) < 1e-12
    assert euclidean_action(FREE, tr) == pytest.approx(0.5, abs=1e-6)


def test_harmonic_path_matches_sinh():
    tr = solve_euclidean_path(HARM, 0.0, 1.0, 1.0, N=400)
    exact = np.sinh(tr.times) / math.sinh(1.0)
    assert np.abs(tr.positions - exact).max() < 1e-6


def test_harmonic_action_matches_coth():
    tr = solve_euclidean_path(HARM, 0.0, 1.0, 1.0, N=400)
    assert euclidean_action(HARM, tr) == pytest.approx(0.5 / math.tanh(1.0), abs=1e-5)


def test_constant_path_at_minimum():
    tr = solve_euclidean_path(DW, 1.0, 1.0, 2.0, N=400)
    assert np.abs(tr.positions - 1.0).max() < 1e-12
    assert el_residual(DW, tr) < 1e-12
    assert euclidean_action(DW, tr) == pytest.approx(0.0, abs=1e-12)


def test_endpoints_exact():
    tr = solve_euclidean_path(DW, -0.3, 0.9, 1.0, N=100)
    assert tr.positions[0] == -0.3
    assert tr.positions[-1] == 0.9


def test_energy_residual_free():
    tr = solve_euclidean_path(FREE, 0.0, 1.0, 1.0, N=100)
    assert path_energy_residual(FREE, tr) < 1e-10


def test_energy_residual_harmonic():
    tr = solve_euclidean_path(HARM, 0.0, 1.0, 1.0, N=400)
    assert path_energy_residual(HARM, tr) < 1e-4


def test_energy_residual_grows_with_perturbation():
    tr = solve_euclidean_path(HARM, 0.0, 1.0, 1.0, N=400)
    base = path_energy_residual(HARM, tr)
    small = tr.positions + 0.001 * np.sin(np.pi * tr.times)
    large = tr.positions + 0.05 * np.sin(np.pi * tr.times)
    tr_small = type(tr)(action=tr.action, duration=tr.duration, times=tr.times,
                        positions=small)
    tr_large = type(tr)(action=tr.action, duration=tr.duration, times=tr.times,
                        positions=large)
    r_small = path_energy_residual(HARM, tr_small)
    r_large = path_energy_residual(HARM, tr_large)
    assert base < r_small < r_large


def test_action_second_order_refinement():
    exact = 0.5 / math.tanh(1.0)
    err = []
    for N in (200, 400):
        tr = solve_euclidean_path(HARM, 0.0, 1.0, 1.0, N=N)
        err.append(abs(euclidean_action(HARM, tr) - exact))
    assert 3.5 < err[0] / err[1] < 4.5


def test_parity_covariance():
    a = solve_euclidean_path(DW, -0.3, 0.9, 1.0, N=200)
    b = solve_euclidean_path(DW, 0.3, -0.9, 1.0, N=200)
    assert np.abs(a.positions + b.positions).max() < 1e-10


def test_minimality_vs_straight_line():
    straight = np.linspace(-3.0, 3.0, 401)
    tr = solve_euclidean_path(DW, -3.0, 3.0, 4.0, N=400)
    straight_tr = type(tr)(action=DW, duration=4.0, times=tr.times, positions=straight)
    assert euclidean_action(DW, tr) <= euclidean_action(DW, straight_tr) + 1e-12


def test_conjugate_point_detection():
    # the x = 0 stationary path for 0 -> 0 at long T is a saddle: Newton from
    # that exact point stays there and the positivity test must reject it
    zeros = np.zeros(1601)
    with pytest.raises(ConjugatePoint):
        solve_euclidean_path(DW, 0.0, 0.0, 4.0, N=1600,
                             initial_guess=zeros, multistart=False)


def test_multistart_finds_dipped_minimum():
    tr = solve_euclidean_path(DW, 0.0, 0.0, 4.0, N=1600)
    assert euclidean_action(DW, tr) < 2.0  # sitting at the barrier costs 0.5*T
    assert np.abs(tr.positions).max() > 0.5
    assert is_local_minimum(DW, tr)


def test_preconditions():
    with pytest.raises(ValueError):
        solve_euclidean_path(FREE, 0.0, 1.0, 1.0, N=10)
    with pytest.raises(ValueError):
        solve_euclidean_path(FREE, 0.0, 1.0, -1.0)


def test_2d_free_straight_line():
    free2 = ActionSpec(mass=1.0, potential=Potential2D())
    tr = solve_euclidean_path(free2, (0.0, 0.0), (1.0, 1.0), 1.0, N=100)
    assert euclidean_action(free2, tr) == pytest.approx(1.0, abs=1e-6)
    assert np.abs(tr.positions[:, 0] - tr.times).max() < 1e-12


def test_2d_harmonic_path():
    harm2 = ActionSpec(mass=1.0, potential=Potential2D(v2=0.5))
    tr = solve_euclidean_path(harm2, (0.0, 0.0), (1.0, 0.5), 1.0, N=400)
    sinh = np.sinh(tr.times) / math.sinh(1.0)
    assert np.abs(tr.positions[:, 0] - sinh).max() < 1e-6
    assert np.abs(tr.positions[:, 1] - 0.5 * sinh).max() < 1e-6


def test_trajectory_csv(tmp_path):
    tr = solve_euclidean_path(HARM, 0.0, 1.0, 1.0, N=100)
    path = tmp_path / "traj.csv"
    tr.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "t,x"
    assert len(lines) == 102
