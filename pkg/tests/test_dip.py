import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qecdip.dip import (
    DecodingGram,
    OperatorSpan,
    compute_gram,
    dimension_bound,
    inner_product_from_positive,
    phi_onb,
    split_negligible,
    verify_equivalences,
)
from qecdip.errors import DegenerateGram, EquivalenceFailure, NotDecodable, ValidationError
from qecdip.linalg import DEFAULT_TOL, Subspace, hs_inner, projector, support
from qecdip.qecc import random_instance
from qecdip.sampling import random_state_in
from qecdip.wold import example_v15, power_span

EPS = DEFAULT_TOL.check_eps
seeds = st.integers(0, 2**32 - 1)


def ketbra(d, i, j):
    a = np.zeros((d, d), dtype=complex)
    a[i, j] = 1
    return a


def brute_gram(code_idx, ops, d):
    """lambda_jk read off entrywise from P V_j^* V_k P on coordinate codes."""
    p = np.zeros((d, d))
    p[code_idx, code_idx] = 1
    i0 = code_idx[0]
    return np.array([[(p @ a.conj().T @ b @ p)[i0, i0] for b in ops] for a in ops])


@st.composite
def instance_args(draw, max_d=12):
    k = draw(st.integers(1, 3))
    n = draw(st.integers(1, 4))
    d = draw(st.integers(k * n, max(k * n, max_d)))
    return d, k, n, draw(seeds)


class TestOperatorSpan:
    def test_dependent_rejected(self):
        with pytest.raises(ValidationError):
            OperatorSpan.of([np.eye(2), 2 * np.eye(2)])

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            OperatorSpan.of([])

    def test_shape_checked(self):
        with pytest.raises(ValidationError):
            OperatorSpan(3, np.eye(2)[None])

    def test_coordinates_roundtrip(self):
        n = power_span(example_v15(), 3)
        c = np.array([1, 2j, -1, 0.5])
        assert np.allclose(n.coordinates(n.combine(c)), c)


class TestSplitNegligible:
    def test_full_code(self):
        n = OperatorSpan.of([ketbra(2, 1, 0), ketbra(2, 0, 1)])
        assert not split_negligible(Subspace.full(2), n).has_negligible

    def test_ketbra_pair(self):
        n = OperatorSpan.of([ketbra(2, 1, 0), ketbra(2, 0, 1)])
        s = split_negligible(Subspace.coordinate(2, [0]), n)
        assert s.negligible.count == 1 and s.effective.count == 1
        # both parts are one-dimensional, so compare up to phase
        assert abs(abs(hs_inner(s.negligible[0], ketbra(2, 0, 1))) - 1) < 1e-12
        assert abs(abs(hs_inner(s.effective[0], ketbra(2, 1, 0))) - 1) < 1e-12

    def test_identity_never_negligible(self):
        s = split_negligible(Subspace.coordinate(3, [1]), OperatorSpan.of([np.eye(3)]))
        assert not s.has_negligible

    @given(seeds, st.integers(2, 6))
    @settings(max_examples=30, deadline=None)
    def test_invariants_and_idempotence(self, seed, d):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(1, d))
        code = Subspace.coordinate(d, range(k))
        # random operators, some of which kill the code
        ops = []
        for _ in range(int(rng.integers(1, 4))):
            a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            if rng.integers(2):
                a[:, :k] = 0
            ops.append(a)
        try:
            n = OperatorSpan.of(ops)
        except ValidationError:
            return
        s = split_negligible(code, n)
        pc = projector(code)
        if s.has_negligible:
            for a in s.negligible:
                assert np.linalg.norm(a @ pc) <= EPS
            if s.effective is not None:
                cross = np.einsum("jab,lab->jl", s.effective.basis.conj(), s.negligible.basis)
                assert np.abs(cross).max() <= EPS
                assert s.effective.count + s.negligible.count == n.count
                assert not split_negligible(code, s.effective).has_negligible


class TestComputeGram:
    def test_example_identity(self):
        v = example_v15()
        n = power_span(v, 3)
        g = compute_gram(Subspace.coordinate(15, [0, 4, 5]), n)
        assert np.allclose(brute_gram([0, 4, 5], n.basis, 15), np.eye(4))
        assert np.linalg.norm(g.gram - np.eye(4)) <= EPS

    def test_single_identity(self):
        for d in (1, 3, 5):
            g = compute_gram(Subspace.coordinate(d, [0]), OperatorSpan.of([np.eye(d)]))
            assert np.allclose(g.gram, [[1]])

    def test_example_failure(self):
        n = power_span(example_v15(), 2)
        with pytest.raises(NotDecodable) as ei:
            compute_gram(Subspace.coordinate(15, [0, 5, 1, 8]), n)
        assert ei.value.residual > 0.1 and ei.value.pair is not None

    def test_negligible_refused(self):
        n = OperatorSpan.of([ketbra(2, 1, 0), ketbra(2, 0, 1)])
        with pytest.raises(DegenerateGram):
            compute_gram(Subspace.coordinate(2, [0]), n)

    def test_zero_code_rejected(self):
        with pytest.raises(ValidationError):
            compute_gram(Subspace.zero(2), OperatorSpan.of([np.eye(2)]))

    @given(instance_args())
    @settings(max_examples=30, deadline=None)
    def test_uniqueness_via_states(self, args):
        d, k, n, seed = args
        cc = random_instance(d, k, n, seed)
        g = compute_gram(cc.code, cc.noise)
        rng = np.random.default_rng(seed)
        rho = random_state_in(cc.code, rng)
        b = cc.noise.basis
        lam = np.einsum("ab,jcb,lca->jl", rho, b.conj(), b)  # tr(rho N_j^* N_l)
        assert np.abs(lam - g.gram).max() <= EPS

    @given(instance_args())
    @settings(max_examples=30, deadline=None)
    def test_support_containment(self, args):
        cc = random_instance(*args)
        pc = projector(cc.code)
        for a in cc.noise:
            ps = projector(support(a))
            assert np.linalg.norm((np.eye(len(pc)) - ps) @ pc) <= EPS


class TestEquivalences:
    def test_identity_noise_whole_space(self):
        code = Subspace.full(3)
        n = OperatorSpan.of([np.eye(3)])
        rep = verify_equivalences(code, n, compute_gram(code, n))
        assert rep.max_residual <= 1e-12

    def test_example(self):
        code = Subspace.coordinate(15, [0, 4, 5])
        n = power_span(example_v15(), 3)
        rep = verify_equivalences(code, n, compute_gram(code, n), n_samples=30)
        assert rep.passed()

    def test_random_instance(self):
        cc = random_instance(8, 2, 3, seed=11)
        rep = verify_equivalences(cc.code, cc.noise, compute_gram(cc.code, cc.noise), n_samples=30)
        assert rep.max_residual <= 1e-9

    def test_wrong_gram_detected(self):
        code = Subspace.coordinate(15, [0, 4, 5])
        n = power_span(example_v15(), 3)
        bad = DecodingGram(2 * np.eye(4), n)
        with pytest.raises(EquivalenceFailure):
            verify_equivalences(code, n, bad)
        assert not verify_equivalences(code, n, bad, strict=False).passed()


class TestPhiOnb:
    def test_identity_gram(self):
        n = power_span(example_v15(), 2)
        out = phi_onb(n, DecodingGram(np.eye(3), n))
        assert np.allclose(out.orthonormal.basis, n.basis)

    def test_scalar(self):
        a = np.diag([1.0, 2.0])
        n = OperatorSpan.of([a])
        out = phi_onb(n, DecodingGram(np.array([[4.0]]), n))
        assert np.allclose(out.orthonormal[0], a / 2)

    def test_scaled_pair_recomputed(self):
        code = Subspace.coordinate(4, [0])
        u = np.roll(np.eye(4), 1, axis=0)
        n = OperatorSpan.of([np.sqrt(2) * np.eye(4), np.sqrt(2) * u])
        g = compute_gram(code, n)
        assert np.allclose(g.gram, 2 * np.eye(2))
        out = phi_onb(n, g, code=code)
        assert np.allclose(out.orthonormal.basis, n.basis / np.sqrt(2))
        assert np.allclose(compute_gram(code, out.orthonormal).gram, np.eye(2))
        assert out.code_residual <= EPS

    def test_degenerate(self):
        n = OperatorSpan.of([np.eye(2), np.diag([1, -1])])
        with pytest.raises(DegenerateGram):
            phi_onb(n, DecodingGram(np.array([[1, 1], [1, 1.0]]), n))

    @given(instance_args())
    @settings(max_examples=30, deadline=None)
    def test_roundtrip_and_representation(self, args):
        cc = random_instance(*args)
        g = compute_gram(cc.code, cc.noise)
        out = phi_onb(cc.noise, g, code=cc.code)
        assert np.linalg.norm(compute_gram(cc.code, out.orthonormal).gram - np.eye(cc.noise.count)) <= EPS
        assert out.code_residual <= EPS
        # phi(N, M) = sum_a w_a <N, U_a>_2 <U_a, M>_2 on the basis itself
        u = out.hs_basis.basis
        assert np.linalg.norm(out.hs_basis.hs_gram() - np.eye(len(u))) <= EPS
        inner = np.einsum("jab,kab->jk", cc.noise.basis.conj(), u)  # <N_j, U_a>
        rep = (inner * out.weights) @ inner.conj().T
        assert np.abs(rep - g.gram).max() <= 1e-8

    @given(instance_args())
    @settings(max_examples=30, deadline=None)
    def test_orthogonal_ranges(self, args):
        cc = random_instance(*args)
        g = compute_gram(cc.code, cc.noise)
        basis = phi_onb(cc.noise, g).orthonormal
        pc = projector(cc.code)
        for j, a in enumerate(basis):
            for k, b in enumerate(basis):
                target = pc if j == k else 0
                assert np.linalg.norm((a @ pc).conj().T @ (b @ pc) - target) <= EPS


class TestInnerProductFromPositive:
    def base(self):
        return OperatorSpan.of([np.diag([1.0, 0]), np.diag([0, 1.0])])

    def test_unit_weights(self):
        assert np.allclose(inner_product_from_positive(self.base(), [1, 1]).gram, np.eye(2))

    def test_weights(self):
        assert np.allclose(inner_product_from_positive(self.base(), [1, 2]).gram, np.diag([1, 2]))

    def test_roundtrip(self):
        b = self.base()
        g = inner_product_from_positive(b, [3, 5])
        out = phi_onb(b, g)
        assert np.allclose(g.matrix_for(list(out.orthonormal)), np.eye(2))

    def test_rejects_nonpositive(self):
        with pytest.raises(ValidationError):
            inner_product_from_positive(self.base(), [1, 0])

    def test_rejects_non_orthonormal(self):
        with pytest.raises(ValidationError):
            inner_product_from_positive(OperatorSpan.of([np.eye(2)]), [1])


class TestDimensionBound:
    def test_example_dims(self):
        assert dimension_bound(Subspace.coordinate(15, [0, 4, 5]), power_span(example_v15(), 3))

    def test_full_algebra_dim2(self):
        n = OperatorSpan.of([ketbra(2, i, j) for i in range(2) for j in range(2)])
        assert not dimension_bound(Subspace.coordinate(2, [0]), n)

    def test_dim1(self):
        assert dimension_bound(Subspace.full(1), OperatorSpan.of([np.eye(1)]))
