import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from prnn import (
    eigendecompose,
    evaluate_fractional,
    jordan_block_power,
    real_jordan,
    rebase_start,
)

PARABOLA_W = np.array([[1.0, 2.0, 1.0], [0.0, 1.0, 1.0], [0.0, 0.0, 1.0]])
PARABOLA_X0 = np.array([0.0, 0.0, 1.0])


def _assert_reconstructs(form, w, x0, steps, tol):
    j = form.jordan_matrix()
    u = np.array(form.y)
    state = x0.copy()
    for _ in range(steps):
        scale = max(np.linalg.norm(state), np.linalg.norm(x0), 1.0)
        assert np.max(np.abs(form.a @ u - state)) <= tol * scale
        u = j @ u
        state = w @ state


def random_diagonalizable(rng, n, max_modulus=1.2):
    """Real matrix with a well-conditioned eigenbasis, by spectrum assignment."""
    blocks = []
    width = 0
    while width < n:
        if n - width >= 2 and rng.random() < 0.5:
            r = rng.uniform(0.2, max_modulus)
            ang = rng.uniform(0.05, np.pi - 0.05)
            c, s = np.cos(ang), np.sin(ang)
            blocks.append(r * np.array([[c, s], [-s, c]]))
            width += 2
        else:
            blocks.append(np.array([[rng.uniform(-max_modulus, max_modulus)]]))
            width += 1
    core = scipy.linalg.block_diag(*blocks)
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return q @ core @ q.T


class TestEigendecompose:
    def test_diagonal(self):
        dec = eigendecompose(np.diag([3.0, 1.0]), np.array([1.0, 1.0]))
        np.testing.assert_allclose(dec.lambdas, [3.0, 1.0])
        np.testing.assert_allclose(np.abs(dec.x * dec.v.sum(axis=0)), [1.0, 1.0], atol=1e-12)
        assert not dec.near_defective

    def test_rotation_pair_on_unit_circle(self):
        dec = eigendecompose(np.array([[0.0, 1.0], [-1.0, 0.0]]), np.array([1.0, 0.0]))
        np.testing.assert_allclose(np.abs(dec.lambdas), [1.0, 1.0], atol=1e-12)
        assert dec.lambdas[0].imag > 0  # positive-imaginary member first
        assert dec.lambdas[1] == pytest.approx(dec.lambdas[0].conjugate())

    def test_defective_matrix_is_flagged(self):
        dec = eigendecompose(PARABOLA_W, PARABOLA_X0)
        assert dec.near_defective

    def test_sorted_by_modulus(self):
        rng = np.random.default_rng(8)
        w = random_diagonalizable(rng, 12)
        dec = eigendecompose(w, rng.standard_normal(12))
        mods = np.abs(dec.lambdas)
        assert np.all(np.diff(mods) <= 1e-12)

    def test_eigenvector_residuals(self):
        rng = np.random.default_rng(23)
        w = random_diagonalizable(rng, 14)
        dec = eigendecompose(w, rng.standard_normal(14))
        bound = 1e-8 * np.linalg.norm(w, 2)
        for k in range(14):
            residual = w @ dec.v[:, k] - dec.lambdas[k] * dec.v[:, k]
            assert np.linalg.norm(residual) <= bound

    def test_reconstruction_is_real_at_integer_times(self):
        rng = np.random.default_rng(15)
        w = random_diagonalizable(rng, 10)
        x0 = rng.standard_normal(10)
        dec = eigendecompose(w, x0)
        state = x0.copy()
        for t in range(8):
            rebuilt = dec.v @ (dec.lambdas**t * dec.x)
            assert np.max(np.abs(rebuilt.imag)) <= 1e-9
            np.testing.assert_allclose(rebuilt.real, state, atol=1e-8)
            state = w @ state


class TestJordanBlockPower:
    def test_scalar_block(self):
        out = jordan_block_power(2.0 + 1.0j, 1, 5)
        assert out.shape == (1, 1)
        assert out[0, 0] == pytest.approx((2.0 + 1.0j) ** 5)

    def test_unit_block_binomials(self):
        np.testing.assert_allclose(jordan_block_power(1.0, 2, 3), [[1.0, 3.0], [0.0, 1.0]])

    def test_matches_repeated_multiplication(self):
        j = np.array([[2.0, 1.0, 0.0], [0.0, 2.0, 1.0], [0.0, 0.0, 2.0]])
        expected = np.linalg.matrix_power(j, 4)
        np.testing.assert_allclose(jordan_block_power(2.0, 3, 4).real, expected, atol=1e-12)

    def test_nilpotent_zero_power_convention(self):
        np.testing.assert_allclose(jordan_block_power(0.0, 2, 0), np.eye(2))
        np.testing.assert_allclose(jordan_block_power(0.0, 2, 1), [[0.0, 1.0], [0.0, 0.0]])

    @settings(max_examples=100, deadline=None)
    @given(
        st.integers(1, 4),
        st.integers(0, 20),
        st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False),
    )
    def test_power_oracle(self, m, t, lam):
        closed = jordan_block_power(lam, m, t)
        block = np.eye(m, dtype=complex) * lam
        for i in range(m - 1):
            block[i, i + 1] = 1.0
        brute = np.eye(m, dtype=complex)
        for _ in range(t):
            brute = brute @ block
        scale = max(np.max(np.abs(brute)), 1.0)
        assert np.max(np.abs(closed - brute)) <= 1e-10 * scale


class TestRealJordan:
    def test_symmetric_matrix_gives_real_singletons(self):
        rng = np.random.default_rng(2)
        a = rng.standard_normal((5, 5))
        w = (a + a.T) / 2
        form = real_jordan(w, rng.standard_normal(5))
        assert all(b.kind == "real" and b.m == 1 for b in form.blocks)
        assert form.width == 5

    def test_rotation_gives_single_pair_block(self):
        w = np.array([[0.0, 1.0], [-1.0, 0.0]])
        form = real_jordan(w, np.array([1.0, 0.0]))
        assert len(form.blocks) == 1
        block = form.blocks[0]
        assert block.kind == "complex" and block.m == 1
        np.testing.assert_allclose(block.matrix(), [[0.0, 1.0], [-1.0, 0.0]], atol=1e-12)

    def test_defective_parabola_matrix(self):
        form = real_jordan(PARABOLA_W, PARABOLA_X0)
        assert len(form.blocks) == 1
        block = form.blocks[0]
        assert block.kind == "real" and block.m == 3
        assert block.lam == pytest.approx(1.0)

    def test_parabola_reconstruction(self):
        form = real_jordan(PARABOLA_W, PARABOLA_X0, d_out=1)
        j = form.jordan_matrix()
        u = np.array(form.y)
        for t in range(10):
            assert form.a @ u == pytest.approx(float(t * t), abs=1e-9)
            u = j @ u

    def test_reconstructs_all_rows_on_random_diagonalizable(self):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(2, 51))
            w = random_diagonalizable(rng, n, max_modulus=1.1)
            x0 = rng.standard_normal(n)
            form = real_jordan(w, x0)
            j = form.jordan_matrix()
            u = np.array(form.y)
            state = x0.copy()
            bound = 1e-6 * max(np.linalg.norm(x0), 1.0)
            for t in range(8):
                assert np.max(np.abs(form.a @ u - state)) <= bound
                u = j @ u
                state = w @ state

    def test_output_row_restriction(self):
        rng = np.random.default_rng(4)
        w = random_diagonalizable(rng, 6)
        x0 = rng.standard_normal(6)
        full = real_jordan(w, x0)
        restricted = real_jordan(w, x0, d_out=2, keep_full_basis=True)
        assert restricted.a.shape == (2, 6)
        np.testing.assert_allclose(restricted.a, full.a[:2])
        np.testing.assert_allclose(restricted.a_full, full.a)

    def test_defective_complex_pair(self):
        # two cells of a rotation-scaling block, hidden by an orthogonal change of basis
        lam = 0.5 + 0.6j
        m_cell = np.array([[lam.real, lam.imag], [-lam.imag, lam.real]])
        j = np.block([[m_cell, np.eye(2)], [np.zeros((2, 2)), m_cell]])
        rng = np.random.default_rng(0)
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        w = q @ j @ q.T
        x0 = rng.standard_normal(4)
        form = real_jordan(w, x0)
        assert [(b.kind, b.m) for b in form.blocks] == [("complex", 2)]
        assert form.blocks[0].lam == pytest.approx(lam, abs=1e-9)
        _assert_reconstructs(form, w, x0, steps=12, tol=1e-10)

    def test_defective_pair_among_other_eigenvalues(self):
        # the pair cluster must be separated from the rest by the distance to
        # the nearer conjugate representative, not to one of them
        lam = 0.5 + 0.6j
        m_cell = np.array([[lam.real, lam.imag], [-lam.imag, lam.real]])
        dj = np.block([[m_cell, np.eye(2)], [np.zeros((2, 2)), m_cell]])
        rot = 0.2 * np.array([[np.cos(0.4), np.sin(0.4)], [-np.sin(0.4), np.cos(0.4)]])
        core = scipy.linalg.block_diag(dj, np.array([[0.3]]), rot)
        rng = np.random.default_rng(5)
        q, _ = np.linalg.qr(rng.standard_normal((7, 7)))
        w = q @ core @ q.T
        x0 = rng.standard_normal(7)
        form = real_jordan(w, x0)
        assert sorted((b.kind, b.m) for b in form.blocks) == [
            ("complex", 1), ("complex", 2), ("real", 1)
        ]
        _assert_reconstructs(form, w, x0, steps=12, tol=1e-9)

    def test_mixed_defective_and_simple_blocks(self):
        lam = 0.5 + 0.6j
        m_cell = np.array([[lam.real, lam.imag], [-lam.imag, lam.real]])
        core = scipy.linalg.block_diag(
            np.array([[1.0, 1.0], [0.0, 1.0]]), np.array([[0.3]]), m_cell
        )
        rng = np.random.default_rng(1)
        q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        w = q @ core @ q.T
        x0 = rng.standard_normal(5)
        form = real_jordan(w, x0)
        kinds = sorted((b.kind, b.m) for b in form.blocks)
        assert kinds == [("complex", 1), ("real", 1), ("real", 2)]
        _assert_reconstructs(form, w, x0, steps=12, tol=1e-10)

    def test_cluster_tolerance_chain_ambiguity(self):
        # eigenvalues chained within tol but spanning far more than 10*tol
        w = np.diag(1.0 + 4e-3 * np.arange(15))
        with pytest.raises(ValueError):
            real_jordan(w, np.ones(15), tol=4.5e-3)


class TestRebaseStart:
    def test_rebase_onto_coordinates_gives_back_basis(self):
        # with y equal to the coordinates of x0, the commuting factor is the
        # identity and the returned map is the basis itself
        form = real_jordan(np.diag([3.0, 2.0]), np.array([4.0, 5.0]))
        basis = np.eye(2)
        x0 = np.array([4.0, 5.0])
        a = rebase_start(basis, form.blocks, x0, y=x0)
        np.testing.assert_allclose(a, basis @ np.eye(2), atol=1e-12)
        # and it reproduces the dynamics: a @ J^t @ x0 = W^t x0
        j = form.jordan_matrix()
        u = x0.copy()
        state = x0.copy()
        for _ in range(5):
            np.testing.assert_allclose(a @ u, state, atol=1e-10)
            u = j @ u
            state = np.diag([3.0, 2.0]) @ state

    def test_scalar_case(self):
        a = rebase_start(np.array([[1.0]]), real_jordan(np.array([[0.5]]), np.array([3.0])).blocks,
                         np.array([3.0]), np.array([1.0]))
        assert a[0, 0] == pytest.approx(3.0)

    def test_rejects_zero_entries(self):
        form = real_jordan(np.eye(2) * 0.5, np.ones(2), keep_full_basis=True)
        with pytest.raises(ValueError):
            rebase_start(np.eye(2), form.blocks, np.ones(2), np.array([1.0, 0.0]))

    def test_agreement_with_matrix_powers(self):
        for seed in range(20):
            rng = np.random.default_rng(100 + seed)
            n = int(rng.integers(2, 21))
            w = random_diagonalizable(rng, n)
            x0 = rng.standard_normal(n)
            form = real_jordan(w, x0)
            j = form.jordan_matrix()
            power = np.eye(n)
            state = x0.copy()
            for t in range(11):
                lhs = form.a @ power @ form.y
                scale = max(np.linalg.norm(state), np.linalg.norm(x0), 1.0)
                assert np.max(np.abs(lhs - state)) <= 1e-8 * scale
                power = j @ power
                state = w @ state


class TestEvaluateFractional:
    def test_square_root_of_four(self):
        dec = eigendecompose(np.array([[4.0]]), np.array([1.0]))
        assert evaluate_fractional(dec, 0.5)[0] == pytest.approx(2.0)

    def test_integer_times_match_trajectory(self):
        rng = np.random.default_rng(12)
        w = random_diagonalizable(rng, 6, max_modulus=1.0)
        x0 = rng.standard_normal(6)
        dec = eigendecompose(w, x0)
        state = x0.copy()
        for t in range(6):
            value = evaluate_fractional(dec, float(t))
            np.testing.assert_allclose(value.real, state, atol=1e-9)
            state = w @ state

    def test_principal_branch_of_negative_base(self):
        dec = eigendecompose(np.array([[-1.0]]), np.array([1.0]))
        assert evaluate_fractional(dec, 0.5)[0] == pytest.approx(1.0j)

    def test_rejects_near_defective(self):
        dec = eigendecompose(PARABOLA_W, PARABOLA_X0)
        with pytest.raises(ValueError):
            evaluate_fractional(dec, 0.5)

    def test_zero_eigenvalue_negative_time(self):
        dec = eigendecompose(np.array([[0.0]]), np.array([1.0]))
        with pytest.raises(ValueError):
            evaluate_fractional(dec, -1.0)
