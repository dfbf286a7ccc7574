"""Path sampling: reproducibility, law agreement, PDE residuals."""

import math

import numpy as np
import pytest

from weylkern import (
    DomainError,
    build_root_system,
    compare_density,
    compare_exit,
    pde_residual,
    simulate,
    spec_from_name,
)
from weylkern.montecarlo import exit_density_arc
from weylkern.quadrature import arc_span_frame, gauss_nodes

B1 = build_root_system(spec_from_name("B1"))
B2 = build_root_system(spec_from_name("B2"))


# ---------------------------------------------------------------------------
# reproducibility


def test_thread_count_does_not_change_the_sample():
    kw = dict(horizon=0.05, n_paths=4096, dt=1e-3, seed=3, block_size=1024)
    m1 = simulate(B2, "killed", (0.9, 0.4), threads=1, **kw)
    m4 = simulate(B2, "killed", (0.9, 0.4), threads=4, **kw)
    assert np.array_equal(m1.points, m4.points)
    assert m1.n_killed == m4.n_killed
    d1 = simulate(B2, "dyson", (0.9, 0.4), threads=1, **kw)
    d4 = simulate(B2, "dyson", (0.9, 0.4), threads=4, **kw)
    assert np.array_equal(d1.points, d4.points)


def test_seed_changes_the_sample():
    kw = dict(horizon=0.05, n_paths=1024, dt=1e-3)
    a = simulate(B2, "killed", (0.9, 0.4), seed=0, **kw)
    b = simulate(B2, "killed", (0.9, 0.4), seed=1, **kw)
    assert not np.array_equal(a.points, b.points)


def test_config_echo():
    m = simulate(B2, "killed", (0.9, 0.4), horizon=0.1, n_paths=512, dt=1e-3,
                 seed=9, block_size=256, threads=2)
    c = m.config
    assert (c.system, c.process, c.stop) == ("B2", "killed", "time")
    assert c.x0 == (0.9, 0.4)
    assert (c.horizon, c.n_paths, c.dt, c.seed) == (0.1, 512, 1e-3, 9)
    assert (c.block_size, c.threads) == (256, 2)


# ---------------------------------------------------------------------------
# path laws


def test_killed_survivors_stay_in_chamber():
    m = simulate(B2, "killed", (0.9, 0.4), horizon=0.1, n_paths=8192, dt=1e-3, seed=1)
    assert len(m.points) + m.n_killed == 8192
    assert 0 < len(m.points) < 8192
    dots = m.points @ B2.roots_np().T
    assert dots.min() > 0


def test_dyson_never_dies():
    m = simulate(B2, "dyson", (0.9, 0.4), horizon=0.1, n_paths=4096, dt=1e-3, seed=1)
    assert m.n_killed == 0
    assert len(m.points) + m.n_aborted == 4096
    assert m.n_aborted <= 4      # step halving handles the walls
    dots = m.points @ B2.roots_np().T
    assert dots.min() > 0


def test_killed_density_b1():
    m = simulate(B1, "killed", (0.6,), horizon=0.25, n_paths=20000, dt=1e-3, seed=7)
    rep = compare_density(B1, m, n_bins=25)
    assert rep.passed
    assert rep.dof > 0 and rep.n_used <= 20000


def test_dyson_density_b1():
    m = simulate(B1, "dyson", (0.6,), horizon=0.25, n_paths=20000, dt=1e-3, seed=7)
    rep = compare_density(B1, m, n_bins=25)
    assert rep.passed


def test_exit_b1_exact_location():
    m = simulate(B1, "killed", (0.6,), stop="exit", n_paths=20000, dt=1e-3, seed=11)
    rep = compare_exit(B1, m)
    assert rep.passed
    assert rep.detail["max_location_error"] == 0.0
    assert rep.detail["exit_probability"] == 0.6
    # dyson exits almost surely
    md = simulate(B1, "dyson", (0.6,), stop="exit", n_paths=5000, dt=1e-3, seed=11)
    repd = compare_exit(B1, md)
    assert repd.passed and len(md.points) == 5000


def test_exit_b2_angles():
    m = simulate(B2, "dyson", (0.45, 0.2), stop="exit", n_paths=20000, dt=1e-3, seed=5)
    rep = compare_exit(B2, m, n_bins=20)
    assert rep.passed
    assert rep.detail["dropped"] == 2
    radii = np.linalg.norm(m.points, axis=1)
    assert np.allclose(radii, 1.0, atol=1e-12)


def test_exit_arc_density_mass():
    # dyson harmonic measure has total mass one on the chamber arc
    _, _, theta_max = arc_span_frame(B2)
    th, w = gauss_nodes(0.0, theta_max, 400)
    dens = exit_density_arc(B2, "dyson", (0.45, 0.2), th)
    assert abs(float(w @ dens) - 1.0) < 1e-8


# ---------------------------------------------------------------------------
# PDE residuals


def test_heat_residual_b2():
    rep = pde_residual(B2, "heat", (0.9, 0.4), (0.7, 0.2), t=0.3)
    assert rep.passed and rep.residual < 1e-4


def test_poisson_harmonic_b2():
    rep = pde_residual(B2, "poisson", (0.5, 0.2), (0.8, 0.6))
    assert rep.passed


def test_newton_residual_off_pole_b2():
    rep = pde_residual(B2, "newton", (1.3, 0.6), (0.7, 0.2))
    assert rep.passed


def test_residual_halving_consistency():
    """Quartic convergence of the central second difference."""
    a = pde_residual(B2, "heat", (0.9, 0.4), (0.7, 0.2), t=0.3, h=2e-3)
    b = pde_residual(B2, "heat", (0.9, 0.4), (0.7, 0.2), t=0.3, h=1e-3)
    assert b.residual < a.residual * 1.5 + 1e-9


# ---------------------------------------------------------------------------
# argument validation


def test_simulate_domain_errors():
    with pytest.raises(DomainError):
        simulate(B2, "levy", (0.9, 0.4), horizon=0.1, n_paths=8)
    with pytest.raises(DomainError):
        simulate(B2, "killed", (0.9, 0.4), horizon=0.1, n_paths=8, stop="never")
    with pytest.raises(DomainError):
        simulate(B2, "killed", (0.5, 0.5), horizon=0.1, n_paths=8)  # wall start
    with pytest.raises(DomainError):
        simulate(B2, "killed", (0.9, 0.4), n_paths=8)  # no horizon
    with pytest.raises(DomainError):
        simulate(B2, "killed", (1.2, 0.4), stop="exit", n_paths=8)  # outside ball


def test_compare_exit_needs_exit_measure():
    m = simulate(B2, "killed", (0.9, 0.4), horizon=0.05, n_paths=64, dt=1e-3)
    with pytest.raises(DomainError):
        compare_exit(B2, m)
