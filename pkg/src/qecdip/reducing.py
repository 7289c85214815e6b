"""Reducing subspaces: block-wise classification, Wold data, codes and decoders.

A partition ``H = H_1 ⊕ ... ⊕ H_k`` reduces ``V`` when every block and its
complement are ``V``-invariant. Blocks are worked on in local coordinates
``Q_j^* V Q_j`` (``Q_j`` an orthonormal frame of ``H_j``) and lifted back with
``Q_j``. Every block-wise result is cross-checked against the same computation
on the un-partitioned operator; disagreement raises InternalMismatch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cyclic import clock_operator, cyclic_frame, shift_operator
from .dip import OperatorSpan
from .errors import InternalMismatch, NotPowerPartialIsometry, NotReducing, NotShift, ValidationError
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    Tolerance,
    as_matrix,
    direct_sum,
    frobenius,
    is_partial_isometry,
    join,
    kernel,
    ominus,
    projector,
    range_space,
    subspace_distance,
    support,
)
from .qecc import QuantumChannel, decoding_basis_residual, decoding_noise_basis
from .wold import WoldDecomposition, code_bound, power_span, shift_power_code, wold_decompose

__all__ = [
    "Partition",
    "ReducedFamily",
    "BlockClass",
    "Classification",
    "BlockWold",
    "BlockCodes",
    "check_reducing",
    "block_classify",
    "block_wold",
    "block_shift_codes",
    "direct_sum_decoding_basis",
    "split_decoding_basis",
    "block_code",
    "block_decoder",
]


@dataclass(frozen=True, eq=False)
class Partition:
    """Pairwise orthogonal blocks whose dimensions add up to the ambient dimension."""

    ambient: int
    blocks: tuple
    tol: Tolerance = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if not blocks:
            raise ValidationError("a partition needs at least one block")
        for b in blocks:
            if not isinstance(b, Subspace) or b.ambient != self.ambient:
                raise ValidationError("every block must be a Subspace of the ambient space")
            if b.dim == 0:
                raise ValidationError("partition blocks must be nonzero")
        if sum(b.dim for b in blocks) != self.ambient:
            raise ValidationError(f"block dimensions sum to {sum(b.dim for b in blocks)}, not {self.ambient}")
        for i in range(len(blocks)):
            for j in range(i + 1, len(blocks)):
                r = frobenius(blocks[i].frame.conj().T @ blocks[j].frame)
                if r > self.tol.check_eps:
                    raise ValidationError(f"blocks {i} and {j} are not orthogonal (overlap {r:.3e})")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_sizes(cls, sizes: Sequence[int], tol: Tolerance = DEFAULT_TOL) -> Partition:
        """Consecutive coordinate blocks of the given sizes."""
        sizes = [int(s) for s in sizes]
        if any(s < 1 for s in sizes):
            raise ValidationError("block sizes must be positive")
        d = sum(sizes)
        offs = np.concatenate([[0], np.cumsum(sizes)])
        return cls(d, tuple(Subspace.coordinate(d, range(offs[i], offs[i + 1])) for i in range(len(sizes))), tol)

    @classmethod
    def trivial(cls, ambient: int, tol: Tolerance = DEFAULT_TOL) -> Partition:
        return cls(ambient, (Subspace.full(ambient),), tol)

    def __len__(self):
        return len(self.blocks)

    def local(self, op: np.ndarray, j: int) -> np.ndarray:
        q = self.blocks[j].frame
        return q.conj().T @ op @ q

    def lift(self, s: Subspace, j: int) -> Subspace:
        return Subspace(self.ambient, self.blocks[j].frame @ s.frame)

    def lift_op(self, a: np.ndarray, j: int) -> np.ndarray:
        q = self.blocks[j].frame
        return q @ a @ q.conj().T


@dataclass(frozen=True, eq=False)
class ReducedFamily:
    partition: Partition
    operator: np.ndarray = field(repr=False)
    reduced: tuple = field(repr=False)  # V P_{H_j}, ambient coordinates

    def local(self, j: int) -> np.ndarray:
        return self.partition.local(self.operator, j)


def check_reducing(v, partition: Partition, tol: Tolerance = DEFAULT_TOL) -> ReducedFamily:
    """Verify every block reduces ``v`` and return the reduced operators ``V P_{H_j}``."""
    v = as_matrix(v, square=True)
    d = partition.ambient
    if v.shape[0] != d:
        raise ValidationError(f"operator acts on C^{v.shape[0]}, partition on C^{d}")
    eye = np.eye(d)
    worst, worst_block = 0.0, -1
    for j, b in enumerate(partition.blocks):
        p = projector(b)
        r = max(frobenius((eye - p) @ v @ p), frobenius(p @ v @ (eye - p)))
        if r > worst:
            worst, worst_block = r, j
    if worst > tol.check_eps:
        raise NotReducing(f"block {worst_block} is not reducing (residual {worst:.3e})", worst_block, worst)
    reduced = tuple(v @ projector(b) for b in partition.blocks)
    r = frobenius(sum(reduced) - v)
    if r > tol.check_eps:
        raise InternalMismatch(f"reduced operators do not add up to V ({r:.3e})", r)
    ran_v, supp_v = range_space(v, tol), support(v, tol)
    scale = np.linalg.norm(v, 2) if v.any() else None
    for j, (b, vj) in enumerate(zip(partition.blocks, reduced)):
        for name, got, want in (
            ("range", range_space(vj, tol, scale=scale), _meet(ran_v, b, tol)),
            ("support", support(vj, tol, scale=scale), _meet(supp_v, b, tol)),
        ):
            r = subspace_distance(got, want)
            if r > tol.check_eps:
                raise InternalMismatch(f"{name} of block {j} does not match the global {name} ({r:.3e})", r)
    return ReducedFamily(partition, v, reduced)


def _meet(a: Subspace, block: Subspace, tol: Tolerance) -> Subspace:
    # a and block commute here, so the meet is the block's share of a
    return range_space(projector(block) @ projector(a), tol, scale=1.0)


@dataclass(frozen=True, eq=False)
class BlockClass:
    index: int
    kind: str  # "not_partial_isometry", "unitary", "shift", "mixed", "partial_isometry"
    partial_unitary: bool
    wandering: Subspace | None  # lifted to the ambient space
    multiplicity: int | None


@dataclass(frozen=True, eq=False)
class Classification:
    blocks: tuple
    kind: str
    wandering: Subspace | None
    multiplicity: int | None


def _classify_matrix(a: np.ndarray, tol: Tolerance) -> tuple[str, bool, WoldDecomposition | None]:
    chk = is_partial_isometry(a, tol)
    if not chk:
        return "not_partial_isometry", False, None
    pu = chk.kind in ("unitary", "partial_unitary")
    try:
        w = wold_decompose(a, tol)
    except NotPowerPartialIsometry:
        return "partial_isometry", pu, None
    if w.is_unitary:
        return "unitary", pu, w
    if w.is_shift:
        return "shift", pu, w
    return "mixed", pu, w


def block_classify(family: ReducedFamily, tol: Tolerance = DEFAULT_TOL) -> Classification:
    """Classify each block and check that the classification lifts to ``V``.

    Lifting both ways: ``V`` is a partial isometry / partial unitary /
    unilateral shift iff every block is, and ``L = ⊕ L_j``, ``m = max m_j``.
    """
    part = family.partition
    out = []
    for j in range(len(part)):
        kind, pu, w = _classify_matrix(family.local(j), tol)
        lw = part.lift(w.wandering, j) if w is not None else None
        out.append(BlockClass(j, kind, pu, lw, w.multiplicity if w is not None else None))
    g_kind, g_pu, g_w = _classify_matrix(family.operator, tol)

    def mismatch(what):
        raise InternalMismatch(f"global and block-wise {what} classifications disagree")

    is_pi = [b.kind != "not_partial_isometry" for b in out]
    if (g_kind != "not_partial_isometry") != all(is_pi):
        mismatch("partial isometry")
    if g_kind != "not_partial_isometry" and g_pu != all(b.partial_unitary for b in out):
        mismatch("partial unitary")
    if g_w is not None and all(b.wandering is not None for b in out):
        if (g_kind == "shift") != all(b.kind == "shift" for b in out):
            mismatch("unilateral shift")
        if (g_kind == "unitary") != all(b.kind == "unitary" for b in out):
            mismatch("unitary")
        lw = join([b.wandering for b in out], tol)
        r = subspace_distance(lw, g_w.wandering)
        if r > tol.check_eps:
            raise InternalMismatch(f"wandering space is not the sum of the block wandering spaces ({r:.3e})", r)
        if g_w.multiplicity != max(b.multiplicity for b in out):
            mismatch("multiplicity")
    return Classification(tuple(out), g_kind, g_w.wandering if g_w else None, g_w.multiplicity if g_w else None)


def _lift_wold(part: Partition, j: int, w: WoldDecomposition) -> WoldDecomposition:
    return WoldDecomposition(
        part.lift(w.wandering, j),
        w.multiplicity,
        part.lift(w.shift_part, j),
        part.lift(w.unitary_part, j),
        part.lift_op(w.v_shift, j),
        part.lift_op(w.v_unitary, j),
        w.residual,
    )


@dataclass(frozen=True, eq=False)
class BlockWold:
    blocks: tuple  # per-block WoldDecomposition in ambient coordinates
    combined: WoldDecomposition
    direct: WoldDecomposition  # wold_decompose of the full operator


def block_wold(family: ReducedFamily, tol: Tolerance = DEFAULT_TOL) -> BlockWold:
    """Per-block Wold data and the assembled global split ``K = ⊕ K_j``.

    The assembly is compared with :func:`wold_decompose` of the full operator.
    """
    part = family.partition
    d = part.ambient
    blocks = tuple(_lift_wold(part, j, wold_decompose(family.local(j), tol)) for j in range(len(part)))
    lw = join([b.wandering for b in blocks], tol)
    k = join([b.shift_part for b in blocks], tol)
    kp = join([b.unitary_part for b in blocks], tol)
    m = max(b.multiplicity for b in blocks)
    direct = wold_decompose(family.operator, tol)
    r = max(
        subspace_distance(lw, direct.wandering),
        subspace_distance(k, direct.shift_part),
        subspace_distance(kp, direct.unitary_part),
    )
    if r > tol.check_eps or m != direct.multiplicity:
        raise InternalMismatch(f"block-wise Wold data disagree with the global split ({r:.3e})", r)
    pk = projector(k)
    v = family.operator
    combined = WoldDecomposition(lw, m, k, kp, v @ pk, v @ (np.eye(d) - pk), r)
    return BlockWold(blocks, combined, direct)


@dataclass(frozen=True, eq=False)
class BlockCodes:
    codes: dict  # block index -> lifted code C_{t_j}
    ts: dict  # block index -> t_j used for that block
    noise: dict  # block index -> local span{V_j^r : r <= t_j}
    bound: Subspace
    largest: Subspace | None  # the largest code when t = m and V is a unilateral shift
    skipped: tuple  # blocks with m_j = 0


def block_shift_codes(
    family: ReducedFamily,
    t: int,
    tol: Tolerance = DEFAULT_TOL,
    block_ts: Sequence[int] | None = None,
) -> BlockCodes:
    """Per-block shift-power codes ``C_{t_j} = L_j ⊖ ker V_j^{t_j}`` and the global bound.

    ``t_j`` defaults to ``min(t, m_j)``. Unitary blocks (``m_j = 0``) are
    skipped; any other block must be a unilateral shift. The global bound is
    ``⊕_j (⊕_{r <= m-t} V_j^r L_j) ⊖ ker V_j^t`` with the unitary blocks added
    in front, and it is compared against :func:`code_bound` on the full operator.
    """
    part = family.partition
    d = part.ambient
    locals_ = [family.local(j) for j in range(len(part))]
    walds = [wold_decompose(a, tol) for a in locals_]
    m = max(w.multiplicity for w in walds)
    if not 0 <= t <= m:
        raise ValidationError(f"t = {t} outside [0, {m}]")
    if block_ts is not None and len(block_ts) != len(part):
        raise ValidationError("block_ts needs one entry per block")
    codes, ts, noise, skipped = {}, {}, {}, []
    bounds = []
    for j, (a, w) in enumerate(zip(locals_, walds)):
        if w.is_unitary:
            skipped.append(j)
            bounds.append(part.lift(w.unitary_part, j))
            continue
        if not w.is_shift:
            raise NotShift(f"block {j} has both a shift and a unitary part")
        tj = min(t, w.multiplicity) if block_ts is None else int(block_ts[j])
        if not 0 <= tj <= w.multiplicity:
            raise ValidationError(f"t_{j} = {tj} outside [0, {w.multiplicity}]")
        c, n = shift_power_code(a, tj, tol)
        codes[j], ts[j], noise[j] = part.lift(c, j), tj, n
        k = a.shape[0]
        lower = join(
            [Subspace(k, np.linalg.matrix_power(a, r) @ w.wandering.frame) for r in range(m - t + 1)],
            tol,
        )
        bounds.append(part.lift(ominus(lower, kernel(np.linalg.matrix_power(a, t), tol, scale=1.0), tol), j))
    bound = join(bounds, tol, ambient=d)
    r = subspace_distance(bound, code_bound(family.operator, t, tol))
    if r > tol.check_eps:
        raise InternalMismatch(f"block-wise code bound disagrees with the global bound ({r:.3e})", r)
    largest = None
    if t == m and not skipped:
        largest = bound
        decoding_noise_basis(largest, power_span(family.operator, m, tol), tol)
    return BlockCodes(codes, ts, noise, bound, largest, tuple(skipped))


def direct_sum_decoding_basis(
    blocks: Sequence[tuple[Subspace, OperatorSpan]],
    tol: Tolerance = DEFAULT_TOL,
) -> tuple[Subspace, OperatorSpan]:
    """Global code ``⊕ C_s`` and basis ``{⊕_s N_{sj}}``, truncated to the smallest count."""
    if not blocks:
        raise ValidationError("need at least one block")
    for c, b in blocks:
        if c.ambient != b.ambient:
            raise ValidationError("block code and basis act on different spaces")
    n = min(b.count for _, b in blocks)
    code = Subspace(sum(c.ambient for c, _ in blocks), direct_sum_frames([c.frame for c, _ in blocks]))
    ops = np.stack([direct_sum([b.basis[j] for _, b in blocks]) for j in range(n)])
    basis = OperatorSpan(code.ambient, ops, tol)
    r = decoding_basis_residual(code, basis)
    if r > tol.check_eps:
        raise InternalMismatch(f"direct sum of decoding bases is not code-decoding ({r:.3e})", r)
    return code, basis


def direct_sum_frames(frames: Sequence[np.ndarray]) -> np.ndarray:
    rows = sum(f.shape[0] for f in frames)
    cols = sum(f.shape[1] for f in frames)
    out = np.zeros((rows, cols), dtype=complex)
    r = c = 0
    for f in frames:
        out[r:r + f.shape[0], c:c + f.shape[1]] = f
        r += f.shape[0]
        c += f.shape[1]
    return out


def split_decoding_basis(
    partition: Partition,
    code: Subspace,
    basis: OperatorSpan,
    tol: Tolerance = DEFAULT_TOL,
) -> list[tuple[int, Subspace, OperatorSpan]]:
    """Split a block-structured instance into local (block, code, basis) triples.

    Requires the code to be a sum of its block parts and every basis operator
    to be reduced by the partition. Blocks meeting the code trivially are left out.
    """
    d = partition.ambient
    if code.ambient != d or basis.ambient != d:
        raise ValidationError("code, basis and partition act on different spaces")
    eye = np.eye(d)
    pc = projector(code)
    out = []
    for j, b in enumerate(partition.blocks):
        p = projector(b)
        r = frobenius(p @ pc - pc @ p)
        if r > tol.check_eps:
            raise NotReducing(f"code does not split along block {j} ({r:.3e})", j, r)
        for op in basis.basis:
            r = max(frobenius((eye - p) @ op @ p), frobenius(p @ op @ (eye - p)))
            if r > tol.check_eps:
                raise NotReducing(f"basis operator is not reduced by block {j} ({r:.3e})", j, r)
        local_code = range_space(b.frame.conj().T @ pc @ b.frame, tol, scale=1.0)
        if local_code.dim == 0:
            continue
        ops = np.stack([partition.local(op, j) for op in basis.basis])
        local_basis = OperatorSpan(b.dim, ops, tol)
        out.append((j, local_code, local_basis))
    return out


def _block_vectors(m: int, flavor: str) -> np.ndarray:
    if flavor == "shift":
        return np.eye(m, dtype=complex)
    if flavor == "clock":
        return cyclic_frame(m).entangled
    raise ValidationError(f"unknown flavor {flavor!r}; expected 'shift' or 'clock'")


def _block_args(dims, js, flavor):
    dims = [int(m) for m in dims]
    js = [int(j) for j in js]
    if not dims or len(dims) != len(js):
        raise ValidationError("need one code index per block")
    for m, j in zip(dims, js):
        if m < 1 or not 0 <= j < m:
            raise ValidationError(f"index {j} outside Z_{m}")
    if flavor not in ("shift", "clock"):
        raise ValidationError(f"unknown flavor {flavor!r}; expected 'shift' or 'clock'")
    return dims, js


def _step(flavor: str) -> int:
    # noise maps the code vector s_j to s_{j+r} (shift) or s_{j-r} (clock)
    return 1 if flavor == "shift" else -1


def block_code(dims: Sequence[int], js: Sequence[int], flavor: str = "shift", tol: Tolerance = DEFAULT_TOL):
    """Code ``⊕_s span{s_{j_s}}`` and noise ``{⊕_s W_s^r : r < min dims}``.

    ``s_k`` is ``e_k`` and ``W_s = U_s`` for the shift flavor, ``phi_k`` and
    ``W_s = V_s`` for the clock flavor.
    """
    dims, js = _block_args(dims, js, flavor)
    m = min(dims)
    frames = [_block_vectors(ms, flavor)[:, [j]] for ms, j in zip(dims, js)]
    code = Subspace(sum(dims), direct_sum_frames(frames))
    gen = shift_operator if flavor == "shift" else clock_operator
    noise = OperatorSpan(code.ambient, np.stack([direct_sum([gen(ms, r) for ms in dims]) for r in range(m)]), tol)
    return code, noise


def block_decoder(dims: Sequence[int], js: Sequence[int], flavor: str = "shift", tol: Tolerance = DEFAULT_TOL) -> QuantumChannel:
    """Decoder for :func:`block_code`.

    For ``r < m = min dims`` the Kraus operator ``⊕_s |s_{j_s}><s_{j_s + r}|``
    moves every block's corrupted vector back coherently; the remaining basis
    vectors ``s_{j_s + r}``, ``m <= r < m_s``, pass through as rank-one
    projections. Shift-flavor indices step by ``+r``, clock-flavor by ``-r``.
    """
    dims, js = _block_args(dims, js, flavor)
    m = min(dims)
    d = sum(dims)
    offs = np.concatenate([[0], np.cumsum(dims)])
    step = _step(flavor)
    ks = []
    for r in range(m):
        k = np.zeros((d, d), dtype=complex)
        for s, (ms, j) in enumerate(zip(dims, js)):
            b = _block_vectors(ms, flavor)
            k[offs[s]:offs[s + 1], offs[s]:offs[s + 1]] = np.outer(b[:, j], b[:, (j + step * r) % ms].conj())
        ks.append(k)
    for s, (ms, j) in enumerate(zip(dims, js)):
        b = _block_vectors(ms, flavor)
        for r in range(m, ms):
            k = np.zeros((d, d), dtype=complex)
            x = b[:, (j + step * r) % ms]
            k[offs[s]:offs[s + 1], offs[s]:offs[s + 1]] = np.outer(x, x.conj())
            ks.append(k)
    return QuantumChannel(np.stack(ks), tol)
