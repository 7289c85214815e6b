import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import brute_orth_projector, coordinate_indices, truncated_unitary_pi
from qecdip.errors import ValidationError
from qecdip.linalg import (
    DEFAULT_TOL,
    Subspace,
    Tolerance,
    complement,
    contains,
    direct_sum,
    hs_inner,
    intersect,
    is_partial_isometry,
    join,
    kernel,
    ominus,
    orthonormalize,
    projector,
    random_unitary,
    range_space,
    subspace_distance,
    support,
)
from qecdip.wold import example_v15

EPS = DEFAULT_TOL.check_eps
seeds = st.integers(0, 2**32 - 1)


def e(d, i):
    v = np.zeros(d, dtype=complex)
    v[i] = 1
    return v


def ketbra(d, i, j):
    return np.outer(e(d, i), e(d, j))


def shift3():
    return np.roll(np.eye(3), 1, axis=0)


class TestTolerance:
    def test_defaults(self):
        assert (DEFAULT_TOL.rank_eps, DEFAULT_TOL.check_eps) == (1e-10, 1e-9)

    @pytest.mark.parametrize("r, c", [(0, 1e-9), (1e-10, 0), (-1, 1)])
    def test_rejects_nonpositive(self, r, c):
        with pytest.raises(ValidationError):
            Tolerance(r, c)


class TestHSInner:
    def test_identity(self):
        assert hs_inner(np.eye(2), np.eye(2)) == 2

    def test_rank_one(self):
        a = ketbra(2, 1, 0)
        assert hs_inner(a, a) == 1

    def test_shift_clock_orthogonal(self):
        z = np.exp(2j * np.pi / 3)
        v = np.diag([1, z, z**2])
        # oracle: explicit trace of the 3x3 product
        assert abs(np.trace(shift3().conj().T @ v)) < 1e-12
        assert abs(hs_inner(shift3(), v)) < 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            hs_inner(np.eye(2), np.eye(3))

    @given(seeds)
    @settings(max_examples=30, deadline=None)
    def test_inner_product_axioms(self, seed):
        rng = np.random.default_rng(seed)
        a, b = (rng.standard_normal((2, 3, 3)) + 1j * rng.standard_normal((2, 3, 3)))
        c = complex(rng.standard_normal(), rng.standard_normal())
        assert abs(hs_inner(a, b) - np.conj(hs_inner(b, a))) < 1e-12
        assert hs_inner(a, a).real > 0 and abs(hs_inner(a, a).imag) < 1e-12
        assert abs(hs_inner(c * a, b) - np.conj(c) * hs_inner(a, b)) < 1e-10


class TestSupportKernelRange:
    def test_zero(self):
        assert support(np.zeros((2, 2))).dim == 0
        assert kernel(np.zeros((3, 3))).dim == 3

    def test_ketbra(self):
        s = support(ketbra(2, 1, 0))
        assert coordinate_indices(s.frame) == [0]
        assert coordinate_indices(range_space(ketbra(2, 1, 0)).frame) == [1]

    def test_identity_kernel(self):
        assert kernel(np.eye(3)).dim == 0

    def test_example_support_and_kernel(self):
        v = example_v15()
        # oracle: V e_k != 0 exactly for the columns that hold a one
        nonzero_cols = [k for k in range(15) if np.any(v[:, k])]
        assert coordinate_indices(support(v).frame) == nonzero_cols == list(range(12))
        assert coordinate_indices(kernel(v).frame) == [12, 13, 14]

    def test_non_square(self):
        with pytest.raises(ValidationError):
            support(np.ones((2, 3)))

    @given(seeds, st.integers(1, 8))
    @settings(max_examples=40, deadline=None)
    def test_support_perp_kernel(self, seed, d):
        rng = np.random.default_rng(seed)
        r = int(rng.integers(0, d + 1))
        t = (rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))) @ rng.standard_normal((r, d))
        s, k = support(t), kernel(t)
        assert s.dim + k.dim == d
        assert np.linalg.norm(projector(s) @ projector(k)) <= EPS


class TestProjector:
    def test_zero(self):
        assert np.array_equal(projector(Subspace.zero(3)), np.zeros((3, 3)))

    def test_full(self):
        assert np.allclose(projector(Subspace.full(2)), np.eye(2))

    def test_diagonal_vector(self):
        s = Subspace(2, (np.array([[1], [1]]) / np.sqrt(2)))
        assert np.allclose(projector(s), np.full((2, 2), 0.5), atol=1e-15)

    @given(seeds, st.integers(1, 8))
    @settings(max_examples=40, deadline=None)
    def test_idempotent_selfadjoint(self, seed, d):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(0, d + 1))
        s = orthonormalize(rng.standard_normal((k, d)) + 1j * rng.standard_normal((k, d)), ambient=d)
        p = projector(s)
        assert np.linalg.norm(p @ p - p) <= EPS
        assert np.linalg.norm(p - p.conj().T) <= EPS
        assert s.orthonormality_residual() <= 10 * EPS
        assert np.linalg.norm(p - brute_orth_projector(s.frame)) <= EPS


class TestOminus:
    def test_self(self):
        h = Subspace.full(3)
        assert ominus(h, h).dim == 0

    def test_zero(self):
        h = Subspace.full(3)
        assert subspace_distance(ominus(h, Subspace.zero(3)), h) == 0

    def test_overlapping_coordinates(self):
        a, b = Subspace.coordinate(3, [0, 1]), Subspace.coordinate(3, [1, 2])
        assert coordinate_indices(ominus(a, b).frame) == [0]

    def test_non_commuting(self):
        # a ∩ b^perp is zero here although projecting a onto b^perp is not
        a = Subspace(2, np.array([[1], [1]]) / np.sqrt(2))
        b = Subspace.coordinate(2, [0])
        assert ominus(a, b).dim == 0

    def test_ambient_mismatch(self):
        with pytest.raises(ValidationError):
            ominus(Subspace.full(2), Subspace.full(3))

    @given(seeds, st.integers(2, 8))
    @settings(max_examples=40, deadline=None)
    def test_complement_and_intersection(self, seed, d):
        rng = np.random.default_rng(seed)
        u = random_unitary(d, rng)
        k = int(rng.integers(0, d + 1))
        a = Subspace(d, u[:, :k])
        c = complement(a)
        assert c.dim == d - k
        assert np.linalg.norm(projector(a) + projector(c) - np.eye(d)) <= EPS
        # b contains a's first column plus a vector outside a
        j = int(rng.integers(0, d - k)) if k < d else None
        cols = [u[:, 0]] + ([u[:, k + j]] if j is not None else [])
        b = orthonormalize(cols, ambient=d)
        if k >= 1:
            assert contains(intersect(a, b), Subspace(d, u[:, :1])) <= EPS


class TestOrthonormalize:
    def test_duplicates(self):
        s = orthonormalize([e(3, 0), e(3, 0)])
        assert s.dim == 1 and coordinate_indices(s.frame) == [0]

    def test_rotated_pair(self):
        s = orthonormalize([e(3, 0) + e(3, 1), e(3, 0) - e(3, 1)])
        q, _ = np.linalg.qr(np.stack([e(3, 0) + e(3, 1), e(3, 0) - e(3, 1)], axis=1))
        assert s.dim == 2
        assert np.linalg.norm(projector(s) - q @ q.conj().T) <= EPS

    def test_empty(self):
        assert orthonormalize([], ambient=4).dim == 0
        with pytest.raises(ValidationError):
            orthonormalize([])

    def test_first_vector_wins(self):
        v = np.array([1, 1, 0]) / np.sqrt(2)
        s = orthonormalize([v, e(3, 0), e(3, 1)])
        assert abs(abs(np.vdot(s.frame[:, 0], v)) - 1) < 1e-12

    @given(seeds, st.integers(1, 8), st.integers(1, 10))
    @settings(max_examples=40, deadline=None)
    def test_spans_same_space(self, seed, d, n):
        rng = np.random.default_rng(seed)
        r = min(n, d, int(rng.integers(1, d + 1)))
        vecs = (rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))) @ (
            rng.standard_normal((r, d)) + 1j * rng.standard_normal((r, d)))
        s = orthonormalize(vecs)
        assert s.dim == np.linalg.matrix_rank(vecs)
        assert s.orthonormality_residual() <= 10 * EPS
        assert np.linalg.norm(projector(s) - brute_orth_projector(vecs.T)) <= 1e-8


class TestJoin:
    def test_orthogonal_sum(self):
        j = join([Subspace.coordinate(4, [0]), Subspace.coordinate(4, [2, 3])])
        assert coordinate_indices(j.frame) == [0, 2, 3]

    def test_empty_needs_ambient(self):
        with pytest.raises(ValidationError):
            join([])
        assert join([], ambient=3).dim == 0


class TestDirectSum:
    def test_identities(self):
        assert np.array_equal(direct_sum([np.eye(1), np.eye(2)]), np.eye(3))

    def test_single(self):
        u = np.array([[0, 1], [1, 0]])
        assert np.array_equal(direct_sum([u]), u)

    def test_index_offsets(self):
        u2 = np.array([[0, 1], [1, 0]])
        z = np.exp(2j * np.pi / 3)
        v3 = np.diag([1, z, z**2])
        out = direct_sum([u2, v3])
        expect = np.zeros((5, 5), dtype=complex)
        for i in range(2):
            for j in range(2):
                expect[i, j] = u2[i, j]
        for i in range(3):
            expect[2 + i, 2 + i] = v3[i, i]
        assert np.array_equal(out, expect)

    def test_empty(self):
        with pytest.raises(ValidationError):
            direct_sum([])


class TestPartialIsometry:
    def test_identity(self):
        c = is_partial_isometry(np.eye(4))
        assert c and c.kind == "unitary"

    def test_ketbra(self):
        c = is_partial_isometry(ketbra(2, 1, 0))
        assert c and c.kind == "general"

    def test_not(self):
        c = is_partial_isometry(np.diag([1, 0.5]))
        assert not c and c.kind is None

    def test_partial_unitary(self):
        c = is_partial_isometry(np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]]))
        assert c and c.kind == "partial_unitary"

    def test_example_is_general(self):
        # supp V = e0..e11 but ran V = e0..e3, e7..e14, so supp != ran
        v = example_v15()
        ran = sorted({int(np.flatnonzero(v[:, k])[0]) for k in range(15) if v[:, k].any()})
        assert ran == [0, 1, 2, 3] + list(range(7, 15))
        c = is_partial_isometry(v)
        assert c and c.kind == "general" and c.rank == 12

    def test_numerically_zero_product(self):
        u = random_unitary(3, np.random.default_rng(0))
        p = u @ np.diag([1, 0, 0]) @ u.conj().T
        q = u @ np.diag([0, 1, 1]) @ u.conj().T
        c = is_partial_isometry(p @ q)
        assert c and c.rank == 0

    def test_zero_is_partial_isometry(self):
        c = is_partial_isometry(np.zeros((3, 3)))
        assert c and c.rank == 0

    def test_product_need_not_be_partial_isometry(self):
        # both factors are partial isometries, their product has singular value 1/sqrt(2)
        f = np.array([1, 1]) / np.sqrt(2)
        v = np.outer(f, f.conj())
        l = ketbra(2, 0, 0)
        assert is_partial_isometry(v) and is_partial_isometry(l)
        assert not is_partial_isometry(v @ l)
        assert np.allclose(np.linalg.svd(v @ l, compute_uv=False), [1 / np.sqrt(2), 0])

    @given(seeds, st.integers(2, 7))
    @settings(max_examples=60, deadline=None)
    def test_product_characterization(self, seed, d):
        # VL is a partial isometry iff P_supp(V) and P_ran(L) commute
        rng = np.random.default_rng(seed)
        v = truncated_unitary_pi(rng, d, int(rng.integers(0, d + 1)))
        l = truncated_unitary_pi(rng, d, int(rng.integers(0, d + 1)))
        if rng.integers(2):
            # force commuting projections by sharing a coordinate system
            u = random_unitary(d, rng)
            sv = rng.integers(0, 2, d).astype(bool)
            rl = rng.integers(0, 2, d).astype(bool)
            v = random_unitary(d, rng) @ (u * sv) @ u.conj().T
            l = (u * rl) @ u.conj().T @ random_unitary(d, rng)
        ps = projector(support(v, scale=1.0))
        pr = projector(range_space(l, scale=1.0))
        commute = np.linalg.norm(ps @ pr - pr @ ps) <= 1e-8
        assert bool(is_partial_isometry(v @ l)) == commute

    @given(seeds, st.integers(1, 8))
    @settings(max_examples=40, deadline=None)
    def test_truncated_unitaries(self, seed, d):
        rng = np.random.default_rng(seed)
        r = int(rng.integers(0, d + 1))
        c = is_partial_isometry(truncated_unitary_pi(rng, d, r))
        assert c and c.rank == r


class TestSubspace:
    def test_frame_is_read_only(self):
        s = Subspace.full(2)
        with pytest.raises(ValueError):
            s.frame[0, 0] = 5

    def test_bad_frame(self):
        with pytest.raises(ValidationError):
            Subspace(3, np.ones((2, 1)))

    def test_zero(self):
        z = Subspace.zero(4)
        assert z.dim == 0 and projector(z).shape == (4, 4)
