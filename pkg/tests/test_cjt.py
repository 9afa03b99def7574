from __future__ import annotations

import csv

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nslab.cjt import (
    apply_rotation,
    cjt_diagonalize,
    exact_rotation_angles,
    sweep_schedule,
    wrap_angle,
)
from nslab.linalg import (
    RotationParams,
    gram,
    hermitian,
    off_diag_norm,
    quadratic_form,
    random_channel,
    reference_evd,
    rotation_column,
    rotation_matrix,
)


def random_hermitian(seed, n):
    rng = np.random.default_rng(seed)
    return hermitian(random_channel(rng, n, n))


def test_schedule_order():
    assert sweep_schedule(2) == [(0, 1)]
    assert sweep_schedule(3) == [(0, 1), (0, 2), (1, 2)]
    assert len(sweep_schedule(6)) == 15
    with pytest.raises(ValueError):
        sweep_schedule(1)


@given(st.floats(-50, 50))
def test_wrap_angle_range(x):
    y = wrap_angle(x)
    assert -np.pi <= y < np.pi
    assert np.isclose(np.cos(x), np.cos(y)) and np.isclose(np.sin(x), np.sin(y), atol=1e-9)


def test_angles_on_two_by_two(two_by_two):
    H, null = two_by_two
    G = gram(H)
    p = exact_rotation_angles(G, 0, 1)
    assert p.theta == pytest.approx(-np.pi / 6)
    assert p.phi == pytest.approx(0.0)
    # the second column of R is the null vector (up to sign)
    R = rotation_matrix(2, p)
    assert abs(np.vdot(R[:, 1], null)) == pytest.approx(1.0)


def test_zero_offdiag_gives_identity():
    p = exact_rotation_angles(np.diag([1.0, 2.0]), 0, 1)
    assert (p.theta, p.phi) == (0.0, 0.0)


def test_equal_diagonal_uses_quarter_turn():
    A = np.array([[1.0, 0.5j], [-0.5j, 1.0]])
    p = exact_rotation_angles(A, 0, 1)
    assert abs(p.theta) == pytest.approx(np.pi / 4)
    B = A.astype(complex)
    apply_rotation(B, p)
    assert abs(B[0, 1]) < 1e-15


@given(st.integers(0, 10_000), st.integers(2, 6))
def test_rotation_annihilates_entry(seed, n):
    A = random_hermitian(seed, n)
    l, m = 0, n - 1
    p = exact_rotation_angles(A, l, m)
    assert abs(p.theta) <= np.pi / 4 + 1e-15
    R = rotation_matrix(n, p)
    B = R.conj().T @ A @ R
    assert abs(B[l, m]) <= 1e-12 * np.linalg.norm(A)
    C = A.copy()
    apply_rotation(C, p)
    assert np.allclose(B, C, atol=1e-12)


@given(st.integers(0, 10_000))
def test_phi_minimizes_quarter_turn_objective(seed):
    A = random_hermitian(seed, 2)
    p = exact_rotation_angles(A, 0, 1)
    grid = np.linspace(-np.pi, np.pi, 4001)
    S = [quadratic_form(A, rotation_column(2, 0, 1, np.pi / 4, g)) for g in grid]
    best = grid[int(np.argmin(S))]
    assert abs(wrap_angle(best - p.phi)) < 2e-3


def test_diagonalize_matches_reference():
    for seed in range(30):
        n = 2 + seed % 5
        G = random_hermitian(seed, n)
        res = cjt_diagonalize(G)
        ref = reference_evd(G)[0]
        assert np.allclose(np.sort(res.diag)[::-1], ref, atol=1e-10)
        assert np.allclose(res.V.conj().T @ G @ res.V, res.A, atol=1e-10)
        assert np.allclose(res.V.conj().T @ res.V, np.eye(n), atol=1e-12)


def test_offdiag_monotone_and_quadratic():
    G = random_hermitian(7, 5)
    res = cjt_diagonalize(G, stop_tol=0)
    P = [res.P0] + [s.P for s in res.trace]
    assert all(b <= a * (1 + 1e-12) + 1e-15 for a, b in zip(P, P[1:]))
    sp = res.sweep_P()
    assert sp[0] == pytest.approx(off_diag_norm(G))
    # reaches machine precision within a handful of sweeps
    assert min(sp) < 1e-12 * np.linalg.norm(G)


def test_diagonal_input_is_fixed_point():
    res = cjt_diagonalize(np.diag([3.0, 1.0, 2.0]))
    assert res.trace == []
    assert np.array_equal(res.V, np.eye(3))


def test_trace_csv(tmp_path):
    res = cjt_diagonalize(random_hermitian(3, 3))
    path = tmp_path / "trace.csv"
    res.to_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["k", "l", "m", "theta", "phi", "P_k"]
    assert rows[1][:3] == ["1", "1", "2"]
    assert len(rows) == len(res.trace) + 1
