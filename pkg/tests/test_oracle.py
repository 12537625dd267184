import math

import numpy as np
import pytest

from vibronic_qes.model import ModelParams, PhysicalParams, channel_swap, to_dimensionless
from vibronic_qes.oracle import (
    EigensolverError,
    OracleConfig,
    UntrustedTarget,
    coupled_matrix,
    match_exceptional,
    position_matrix,
    spectrum,
    symmetric_eigvalsh,
    tridiagonal_eigvalsh,
    tridiagonalize,
)
from vibronic_qes.sl2 import allowed_couplings

from conftest import random_fb


def test_position_matrix_small():
    assert np.allclose(position_matrix(2), [[0, math.sqrt(0.5)], [math.sqrt(0.5), 0]], atol=0)
    Z3 = position_matrix(3)
    assert Z3[0, 1] == pytest.approx(math.sqrt(0.5), abs=1e-15)
    assert Z3[1, 2] == pytest.approx(1.0, abs=1e-15)
    assert Z3[0, 2] == 0.0
    assert np.array_equal(Z3, Z3.T)


def test_position_matrix_rejects_tiny():
    with pytest.raises(ValueError):
        position_matrix(1)


def test_position_matrix_parity():
    ev = np.linalg.eigvalsh(position_matrix(64))
    assert np.allclose(ev, -ev[::-1], atol=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        OracleConfig(basis_size=7)
    with pytest.raises(ValueError):
        OracleConfig(match_tolerance=0.0)
    with pytest.raises(ValueError):
        OracleConfig(basis_size=30).check_level(11)
    OracleConfig(basis_size=30).check_level(10)


def test_coupled_matrix_block_layout():
    cfg = OracleConfig(basis_size=10)
    mp = ModelParams(F=0.4, b=-0.3, v=0.2)
    H = coupled_matrix(mp, cfg)
    N = cfg.basis_size
    assert H.shape == (2 * N, 2 * N)
    assert np.array_equal(H, H.T)
    assert np.allclose(np.diag(H[N:, N:]), np.arange(N) + 0.5)
    assert np.allclose(np.diag(H[:N, :N]), np.arange(N) + 0.5 + 0.4 * -0.3)
    assert np.allclose(H[:N, N:], 0.2 * np.eye(N))
    assert np.allclose(H[:N, :N] - np.diag(np.diag(H[:N, :N])), 0.4 * position_matrix(N))


def test_free_oscillators_doubly_degenerate():
    ev = spectrum(ModelParams(), OracleConfig(basis_size=40)).eigenvalues
    expected = np.repeat(np.arange(20) + 0.5, 2)
    assert np.allclose(ev, expected, atol=1e-12)


def test_constant_coupling_splits_levels():
    v = 0.3
    ev = np.linalg.eigvalsh(coupled_matrix(ModelParams(v=v), OracleConfig(basis_size=30)))
    k = np.arange(30) + 0.5
    assert np.allclose(ev, np.sort(np.concatenate([k - v, k + v])), atol=1e-12)


def test_shifted_oscillator_channel():
    # completing the square in channel 1 lowers its ladder by F^2/2
    F, N = 0.7, 120
    cfg = OracleConfig(basis_size=N)
    H = coupled_matrix(ModelParams(F=F), cfg)
    ch1 = np.linalg.eigvalsh(H[:N, :N])[:30]
    ch2 = np.linalg.eigvalsh(H[N:, N:])[:30]
    assert np.allclose(ch1, np.arange(30) + 0.5 - F**2 / 2, atol=1e-10)
    assert np.allclose(ch2, np.arange(30) + 0.5, atol=1e-12)


def test_eigensolver_against_lapack(rng):
    for size in (1, 2, 3, 17, 60):
        A = rng.normal(size=(size, size))
        A = A + A.T
        assert np.allclose(symmetric_eigvalsh(A), np.linalg.eigvalsh(A), atol=1e-11)


def test_eigensolver_selection_and_degeneracy(rng):
    A = np.diag([3.0, 1.0, 1.0, 2.0, 1.0])
    assert np.allclose(symmetric_eigvalsh(A), [1, 1, 1, 2, 3], atol=1e-14)
    assert np.allclose(symmetric_eigvalsh(A, 2), [1, 1], atol=1e-14)
    Q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
    B = Q @ A @ Q.T
    B = (B + B.T) / 2
    assert np.allclose(symmetric_eigvalsh(B, [4, 3]), [3, 2], atol=1e-12)


def test_tridiagonalize_preserves_spectrum(rng):
    A = rng.normal(size=(25, 25))
    A = A + A.T
    d, e = tridiagonalize(A)
    T = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    assert np.allclose(np.linalg.eigvalsh(T), np.linalg.eigvalsh(A), atol=1e-11)
    assert np.allclose(tridiagonal_eigvalsh(d, e), np.linalg.eigvalsh(A), atol=1e-11)


def test_eigensolver_rejects_bad_input():
    with pytest.raises(ValueError):
        symmetric_eigvalsh(np.array([[1.0, 2.0], [2.0 + 1e-15, 1.0]]))
    with pytest.raises(EigensolverError):
        tridiagonalize(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_lowest_eigenvalues():
    cfg = OracleConfig(basis_size=64)
    assert spectrum(ModelParams(), cfg).eigenvalues[0] == pytest.approx(0.5, abs=1e-12)
    assert spectrum(ModelParams(v=0.25), cfg).eigenvalues[0] == pytest.approx(0.25, abs=1e-12)


def test_spectrum_trusted_half_and_window():
    cfg = OracleConfig(basis_size=50)
    mp = ModelParams(F=0.8, b=0.3, v=0.6)
    full = spectrum(mp, cfg)
    assert full.eigenvalues.size == 50
    assert np.all(np.diff(full.eigenvalues) >= 0)
    ref = np.linalg.eigvalsh(coupled_matrix(mp, cfg))
    assert np.allclose(full.eigenvalues, ref[:50], atol=1e-11)
    assert full.trusted_max == pytest.approx(ref[49], abs=1e-11)
    win = spectrum(mp, cfg, window=(2.0, 4.0))
    inside = ref[:50][(ref[:50] >= 2.0) & (ref[:50] < 4.0)]
    assert np.allclose(win.eigenvalues, inside, atol=1e-11)
    assert win.trusted_max == pytest.approx(full.trusted_max, abs=1e-11)


def test_sign_of_coupling_irrelevant(rng):
    cfg = OracleConfig(basis_size=60)
    for _ in range(3):
        F, b = random_fb(rng)
        v = rng.uniform(0.1, 1.5)
        a = spectrum(ModelParams(F, b, v), cfg).eigenvalues
        c = spectrum(ModelParams(F, b, -v), cfg).eigenvalues
        assert np.allclose(a, c, atol=1e-11)


def test_small_coupling_first_order_split():
    v = 1e-4
    ev = spectrum(ModelParams(v=v), OracleConfig(basis_size=40)).eigenvalues
    pairs = ev.reshape(-1, 2)
    k = np.arange(pairs.shape[0]) + 0.5
    assert np.allclose(pairs[:, 0] - k, -v, atol=v**2)
    assert np.allclose(pairs[:, 1] - k, v, atol=v**2)


def test_free_case_matches_every_level():
    cfg = OracleConfig(basis_size=60)
    rep = spectrum(ModelParams(), cfg)
    for n in range(0, 25):
        matched, gap = match_exceptional(rep, n, cfg)
        assert matched and gap < 1e-12
    assert len(rep.matches) == 25
    assert all(m.gap >= 0 for m in rep.matches)


def test_first_excited_closed_form_is_in_spectrum():
    cfg = OracleConfig(basis_size=200)
    rep = spectrum(ModelParams(F=1.0, b=0.0, v=1.0), cfg)
    matched, gap = match_exceptional(rep, 1, cfg)
    assert matched, gap
    assert rep.matches[-1].nearest == pytest.approx(1.5, abs=1e-7)


def test_untrusted_target_rejected():
    cfg = OracleConfig(basis_size=20)
    rep = spectrum(ModelParams(F=0.5, b=0.1, v=0.3), cfg)
    with pytest.raises(UntrustedTarget):
        match_exceptional(rep, 40, cfg)


def test_random_couplings_generically_miss(rng):
    cfg = OracleConfig(basis_size=120)
    gaps = []
    for _ in range(20):
        F, b = random_fb(rng)
        n = int(rng.integers(1, 4))
        v = rng.uniform(0.05, 2.0)
        rep = spectrum(ModelParams(F, b, v), cfg, window=(n - 0.5, n + 1.5))
        gaps.append(match_exceptional(rep, n, OracleConfig(basis_size=120, match_tolerance=1e-6))[1])
    # accidental near-hits are possible, so judge the distribution
    assert np.median(gaps) > 1e-3
    assert sum(g <= 1e-6 for g in gaps) <= 2


def test_truncation_convergence(rng):
    for n in (2, 3):
        F, b = random_fb(rng)
        mp0 = ModelParams(F, b)
        admissible = [c for c in allowed_couplings(n, mp0) if c.physical and c.v_squared > 0]
        if not admissible:
            continue
        mp = mp0.with_coupling(math.sqrt(admissible[0].v_squared))
        gaps = []
        for N in (200, 400):
            cfg = OracleConfig(basis_size=N)
            rep = spectrum(mp, cfg, window=(n, n + 1))
            gaps.append(match_exceptional(rep, n, cfg)[1])
        assert gaps[0] < 1e-7
        assert abs(gaps[0] - gaps[1]) < 1e-8


def test_channel_swap_gives_same_physical_spectrum(rng):
    # relabelling the channels cannot change the physical energies
    cfg = OracleConfig(basis_size=120)
    for _ in range(3):
        p = PhysicalParams(F1=rng.uniform(-1, 1), F2=rng.uniform(-1, 1), V=rng.uniform(0.1, 1))
        q = channel_swap(p)
        a, c = to_dimensionless(p), to_dimensionless(q)
        Ea = spectrum(a, cfg).eigenvalues[:40] - 0.5 - a.b**2 / 2
        Ec = spectrum(c, cfg).eigenvalues[:40] - 0.5 - c.b**2 / 2
        assert np.allclose(Ea, Ec, atol=1e-9)


def test_schur_count_matches_dense(rng):
    for _ in range(25):
        F, b = random_fb(rng, f_min=0.0)
        mp = ModelParams(F, b, rng.uniform(0, 2))
        N = int(rng.integers(8, 50))
        cfg = OracleConfig(basis_size=N)
        ref = np.linalg.eigvalsh(coupled_matrix(mp, cfg))
        got = spectrum(mp, cfg, method="schur").eigenvalues
        assert np.allclose(got, ref[:N], atol=1e-11)
        assert spectrum(mp, cfg, method="schur").trusted_max == pytest.approx(ref[N - 1], abs=1e-11)


def test_schur_count_on_poles():
    # x exactly at an uncoupled level k + 1/2 must not divide by zero
    from vibronic_qes.oracle import schur_count_below

    mp = ModelParams(0.0, 0.0, 0.0)
    ref = np.linalg.eigvalsh(coupled_matrix(mp, OracleConfig(basis_size=10)))
    for x in (0.5, 1.5, 3.5):
        assert schur_count_below(mp, 10, x) == int(np.sum(ref < x))


def test_schur_window_agrees_with_dense():
    cfg = OracleConfig(basis_size=200)
    mp = ModelParams(F=1.0, b=0.0, v=1.0)
    a = spectrum(mp, cfg, window=(1.0, 2.0))
    c = spectrum(mp, cfg, window=(1.0, 2.0), method="schur")
    assert np.allclose(a.eigenvalues, c.eigenvalues, atol=1e-12)
    assert match_exceptional(c, 1, cfg)[0]
    with pytest.raises(ValueError):
        spectrum(mp, cfg, method="qr")
