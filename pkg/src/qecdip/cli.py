"""Command line front end.

Exit status: 0 success, 1 mathematical failure (not decodable, not a partial
isometry, residual above tolerance), 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import cyclic, reducing, serialize as ser
from .errors import EmptyCode, MathematicalFailure, NotDecodable, QECError, ValidationError
from .linalg import Subspace, Tolerance, as_matrix, frobenius, is_partial_isometry
from .qecc import (
    CorrectingCode,
    decoding_noise_basis,
    decoding_residual,
    kl_check,
    kraus_projection_residual,
    perturb_channel,
    random_instance,
    synthesize_channel,
    verify_decoding,
)
from .wold import example_v15, power_span, wold_cross_check, wold_decompose

SEED_ENV = "QECC_SEED"


@dataclass(frozen=True)
class RunConfig:
    tol: Tolerance
    seed: int
    samples: int
    fmt: str

    @classmethod
    def from_args(cls, args) -> RunConfig:
        if args.seed is not None:
            seed = args.seed
        else:
            env = os.environ.get(SEED_ENV)
            try:
                seed = int(env) if env else 0
            except ValueError:
                raise ValidationError(f"{SEED_ENV}={env!r} is not an integer") from None
        if seed < 0:
            raise ValidationError("seed must be non-negative")
        if args.samples < 1:
            raise ValidationError("--samples must be at least 1")
        return cls(Tolerance(args.rank_eps, args.check_eps), seed, args.samples, args.format)


def _e(x: float) -> str:
    return f"{x:.2e}"


def _fmt_complex(z: complex) -> str:
    if abs(z.imag) < 5e-13:
        return f"{z.real: .4f}"
    return f"{z.real: .4f}{z.imag:+.4f}j"


def _fmt_matrix(a: np.ndarray) -> str:
    return "\n".join("  " + " ".join(_fmt_complex(z) for z in row) for row in a)


class Reporter:
    """Collects key/value output; prints text lines or a single JSON document."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.data: dict = {}

    def line(self, key: str, value, text: str | None = None):
        self.data[key] = value
        if self.cfg.fmt == "text":
            print(text if text is not None else f"{key}: {value}")

    def block(self, key: str, value, text: str):
        self.data[key] = value
        if self.cfg.fmt == "text":
            print(text)

    def finish(self, status: int) -> int:
        if self.cfg.fmt == "json":
            self.data["status"] = status
            print(json.dumps(self.data, indent=1))
        return status


def _load_code(path, tol):
    return ser.subspace_from_json(ser.load_json(path), tol)


def _load_span(path, tol):
    return ser.span_from_json(ser.load_json(path), tol)


def _load_matrix(path):
    return as_matrix(ser.matrix_from_json(ser.load_json(path)), square=True, name="operator")


def _check_ambient(code, noise):
    if code.ambient != noise.ambient:
        raise ValidationError(f"code lives in C^{code.ambient} but noise acts on C^{noise.ambient}")


def cmd_kl_check(args, cfg: RunConfig) -> int:
    tol = cfg.tol
    code, noise = _load_code(args.code, tol), _load_span(args.noise, tol)
    _check_ambient(code, noise)
    rep = Reporter(cfg)
    try:
        gram = kl_check(code, noise, tol)
    except NotDecodable as e:
        rep.line("decodable", False, "NOT DECODABLE")
        if e.pair is not None:
            rep.line("worst_pair", list(e.pair), f"worst pair: {e.pair}")
        rep.line("residual", e.residual, f"residual: {_e(e.residual)}")
        rep.line("message", str(e))
        return rep.finish(1)
    rep.line("decodable", True, "decodable")
    rep.line("max_residual", gram.max_residual, f"max residual: {_e(gram.max_residual)}")
    rep.block("gram", ser.matrix_to_json(gram.gram), "decoding Gram matrix:\n" + _fmt_matrix(gram.gram))
    return rep.finish(0)


def cmd_synthesize(args, cfg: RunConfig) -> int:
    tol = cfg.tol
    code, noise = _load_code(args.code, tol), _load_span(args.noise, tol)
    _check_ambient(code, noise)
    rep = Reporter(cfg)
    basis = decoding_noise_basis(code, noise, tol)
    channel = synthesize_channel(code, basis, tol)
    if args.bundle:
        doc = ser.bundle_to_json(CorrectingCode(code, noise, basis, channel))
    else:
        doc = ser.channel_to_json(channel)
    ser.dump_json(doc, args.out)
    rep.line("kraus_count", len(channel), f"wrote {len(channel)} Kraus operators to {args.out}")
    rep.line("completeness_residual", channel.completeness_residual(),
             f"completeness residual: {_e(channel.completeness_residual())}")
    proj = kraus_projection_residual(channel.kraus, basis.count)
    rep.line("projection_residual", proj, f"projection residual: {_e(proj)}")
    return rep.finish(0)


def _verify_one(path, cfg: RunConfig) -> dict:
    try:
        cc = ser.bundle_from_json(ser.load_json(path), cfg.tol)
    except QECError as e:
        return {"file": str(path), "error": str(e), "status": 1 if isinstance(e, MathematicalFailure) else 2}
    r = verify_decoding(cc, cfg.samples, cfg.seed)
    return {"file": str(path), "residual": r, "status": 0 if r <= cfg.tol.check_eps else 1}


def cmd_verify(args, cfg: RunConfig) -> int:
    if args.jobs < 1:
        raise ValidationError("--jobs must be at least 1")
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        results = list(pool.map(lambda p: _verify_one(p, cfg), args.bundles))
    rep = Reporter(cfg)
    rep.data["samples"] = cfg.samples
    rep.data["seed"] = cfg.seed
    for res in results:
        if "error" in res:
            text = f"{res['file']}: ERROR {res['error']}"
        else:
            verdict = "ok" if res["status"] == 0 else "FAIL"
            text = f"{res['file']}: max residual {_e(res['residual'])} over {cfg.samples} samples [{verdict}]"
        if cfg.fmt == "text":
            print(text)
    rep.data["results"] = results
    return rep.finish(max(r["status"] for r in results))


def _report_wold(rep: Reporter, w, v, cfg: RunConfig, prefix=""):
    kind = "unitary" if w.is_unitary else "unilateral shift" if w.is_shift else "mixed"
    rep.line(prefix + "classification", kind)
    rep.line(prefix + "wandering_dim", w.wandering.dim, f"{prefix}dim L: {w.wandering.dim}")
    rep.line(prefix + "multiplicity", w.multiplicity, f"{prefix}m: {w.multiplicity}")
    rep.line(prefix + "shift_dim", w.shift_part.dim, f"{prefix}dim K: {w.shift_part.dim}")
    rep.line(prefix + "unitary_dim", w.unitary_part.dim, f"{prefix}dim K_perp: {w.unitary_part.dim}")
    checks = wold_cross_check(w, v, cfg.tol)
    checks["split"] = w.residual
    rep.block(prefix + "residuals", checks,
              "\n".join(f"{prefix}residual {k}: {_e(x)}" for k, x in checks.items()))
    return max(checks.values())


def cmd_wold(args, cfg: RunConfig) -> int:
    v = _load_matrix(args.operator)
    rep = Reporter(cfg)
    chk = is_partial_isometry(v, cfg.tol)
    rep.line("partial_isometry", bool(chk), f"partial isometry: {'yes' if chk else 'no'} "
             f"(residual {_e(chk.residual)})")
    if not chk:
        return rep.finish(1)
    w = wold_decompose(v, cfg.tol)
    worst = _report_wold(rep, w, v, cfg)
    if args.partition:
        part = ser.partition_from_json(ser.load_json(args.partition), cfg.tol)
        bw = reducing.block_wold(reducing.check_reducing(v, part, cfg.tol), cfg.tol)
        for j in range(len(part)):
            local = part.local(v, j)
            worst = max(worst, _report_wold(rep, wold_decompose(local, cfg.tol), local, cfg, prefix=f"block{j}."))
        rep.line("blockwise_agreement", bw.combined.residual,
                 f"block-wise vs global: {_e(bw.combined.residual)}")
    return rep.finish(0 if worst <= cfg.tol.check_eps else 1)


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"expected comma-separated integers, got {text!r}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"expected comma-separated numbers, got {text!r}") from None


def cmd_cyclic(args, cfg: RunConfig) -> int:
    dims = _ints(args.dim)
    if not dims:
        raise ValidationError("--dim is required")
    op = args.op
    if op != "weyl" and len(dims) != 1:
        raise ValidationError(f"--op {op} takes a single dimension")
    m = dims[0]
    tol = cfg.tol
    check: dict = {}
    if op in ("shift", "clock", "fourier", "entangled", "weyl"):
        if op == "weyl":
            r = _ints(args.r) if args.r else [0] * len(dims)
            t = _ints(args.t) if args.t else [0] * len(dims)
            a = cyclic.weyl_operator(dims, r, t)
        else:
            a = {"shift": cyclic.shift_operator, "clock": cyclic.clock_operator,
                 "fourier": cyclic.fourier_operator, "entangled": cyclic.entangled_basis}[op](m)
        doc = ser.matrix_to_json(a)
        check["unitarity"] = frobenius(a.conj().T @ a - np.eye(a.shape[0]))
    elif op in ("code", "clock-code"):
        thetas = _floats(args.thetas) if args.thetas else [0.0] * m
        if op == "code":
            code = cyclic.make_shift_code(m, thetas)
            test, noise = cyclic.is_shift_code(code, tol), cyclic.shift_powers(m, tol=tol)
        else:
            code = cyclic.make_clock_code(m, thetas)
            test, noise = cyclic.is_clock_code(code, tol), cyclic.clock_powers(m, tol=tol)
        doc = ser.subspace_to_json(code)
        check["flat"] = test.spread
        if args.check:
            try:
                check["kl"] = kl_check(code, noise, tol).max_residual
            except NotDecodable as e:
                check["kl"] = e.residual
    elif op in ("decoder", "clock-decoder"):
        j = args.j if args.j is not None else 0
        if op == "decoder":
            ch, code, noise = cyclic.shift_decoder(j, m, tol), Subspace.coordinate(m, [j]), cyclic.shift_powers(m, tol=tol)
        else:
            ch = cyclic.clock_decoder(j, m, tol)
            code = Subspace(m, cyclic.entangled_basis(m)[:, [j]])
            noise = cyclic.clock_powers(m, tol=tol)
        doc = ser.channel_to_json(ch)
        check["completeness"] = ch.completeness_residual()
        if args.check:
            check["decoding"] = decoding_residual(ch, code, noise, cfg.samples, cfg.seed)
    else:  # argparse restricts the choices
        raise ValidationError(f"unknown op {op}")
    if args.out:
        ser.dump_json(doc, args.out)
    elif cfg.fmt == "text":
        print(ser.dump_json(doc))
    rep = Reporter(cfg)
    if args.out is None:
        rep.data["object"] = doc
    ok = all(x <= tol.check_eps for x in check.values()) if args.check else True
    if args.check:
        for k, x in check.items():
            if cfg.fmt == "text":
                print(f"check {k}: {_e(x)} [{'ok' if x <= tol.check_eps else 'FAIL'}]", file=sys.stderr)
        rep.data["check"] = check
    return rep.finish(0 if ok else 1)


def cmd_blocks(args, cfg: RunConfig) -> int:
    tol = cfg.tol
    v = _load_matrix(args.operator)
    part = ser.partition_from_json(ser.load_json(args.partition), tol)
    fam = reducing.check_reducing(v, part, tol)
    rep = Reporter(cfg)
    cls = reducing.block_classify(fam, tol)
    for b in cls.blocks:
        extra = f", dim L {b.wandering.dim}, m {b.multiplicity}" if b.wandering is not None else ""
        rep.line(f"block{b.index}", b.kind, f"block {b.index}: {b.kind}{extra}")
    rep.line("global", cls.kind, f"global: {cls.kind}")
    if cls.wandering is None:
        return rep.finish(0 if cls.kind != "not_partial_isometry" else 1)
    bw = reducing.block_wold(fam, tol)
    w = bw.combined
    rep.line("shift_dim", w.shift_part.dim, f"dim K: {w.shift_part.dim}")
    rep.line("unitary_dim", w.unitary_part.dim, f"dim K_perp: {w.unitary_part.dim}")
    rep.line("blockwise_agreement", w.residual, f"block-wise vs global Wold: {_e(w.residual)}")
    if args.t is not None:
        try:
            codes = reducing.block_shift_codes(fam, args.t, tol)
        except EmptyCode as e:
            rep.line("codes", None, f"codes: {e}")
            return rep.finish(1)
        for j, c in codes.codes.items():
            rep.line(f"code{j}_dim", c.dim, f"block {j}: code dim {c.dim} (t_j = {codes.ts[j]})")
        rep.line("bound_dim", codes.bound.dim, f"code bound dim: {codes.bound.dim}")
        if codes.largest is not None:
            rep.line("largest_dim", codes.largest.dim, f"largest code dim: {codes.largest.dim}")
        if args.out:
            ser.dump_json(ser.subspace_to_json(codes.bound), args.out)
    return rep.finish(0)


def cmd_simulate(args, cfg: RunConfig) -> int:
    """Random correctable instances, decoding residuals and perturbed negative controls."""
    if args.instances < 1:
        raise ValidationError("--instances must be at least 1")
    if args.max_ambient < 2 or args.max_code_dim < 1 or args.max_noise < 1:
        raise ValidationError("--max-ambient must be at least 2 and the other bounds at least 1")
    rng = np.random.default_rng(cfg.seed)
    rep = Reporter(cfg)
    worst, weakest_control = 0.0, np.inf
    rows = []
    for i in range(args.instances):
        d = int(rng.integers(2, args.max_ambient + 1))
        k = int(rng.integers(1, min(args.max_code_dim, d) + 1))
        n = int(rng.integers(1, min(args.max_noise, d // k) + 1))
        s = int(rng.integers(2**32))
        cc = random_instance(d, k, n, s, cfg.tol)
        r = verify_decoding(cc, cfg.samples, s)
        bad = CorrectingCode(cc.code, cc.noise, cc.decoding_basis, perturb_channel(cc.channel, args.perturb, s))
        ctrl = verify_decoding(bad, cfg.samples, s)
        worst, weakest_control = max(worst, r), min(weakest_control, ctrl)
        rows.append({"ambient": d, "code_dim": k, "noise_count": n, "residual": r, "control": ctrl})
        if cfg.fmt == "text" and args.verbose:
            print(f"instance {i}: d={d} k={k} n={n} residual {_e(r)} control {_e(ctrl)}")
    rep.data["instances"] = rows
    rep.line("max_residual", worst, f"max decoding residual: {_e(worst)} over {args.instances} instances")
    rep.line("min_control", weakest_control, f"min perturbed-control residual: {_e(weakest_control)}")
    ok = worst <= cfg.tol.check_eps and weakest_control > args.control_floor
    return rep.finish(0 if ok else 1)


def example_fixtures(tol: Tolerance | None = None) -> dict[str, dict]:
    """The 15-dimensional partial unitary example as named JSON documents."""
    tol = tol or Tolerance()
    v = example_v15()
    d = v.shape[0]

    def code(*idx):
        return Subspace(d, np.eye(d, dtype=complex)[:, list(idx)])

    docs = {
        "v15.json": ser.matrix_to_json(v),
        "v15_partition.json": ser.partition_to_json(reducing.Partition.from_sizes([4, 11], tol)),
        "identity.json": ser.matrix_to_json(np.eye(4)),
        "non_isometry.json": ser.matrix_to_json(np.array([[1.0, 1.0], [0.0, 1.0]])),
        "noise_t2.json": ser.span_to_json(power_span(v, 2, tol)),
        "noise_t3.json": ser.span_to_json(power_span(v, 3, tol)),
        "code_a.json": ser.subspace_to_json(code(0, 4, 5)),
        "code_b.json": ser.subspace_to_json(code(1, 4, 8)),
        "code_ab.json": ser.subspace_to_json(code(0, 5, 1, 8)),
    }
    c, n = code(0, 4, 5), power_span(v, 3, tol)
    basis = decoding_noise_basis(c, n, tol)
    cc = CorrectingCode(c, n, basis, synthesize_channel(c, basis, tol))
    docs["bundle_a.json"] = ser.bundle_to_json(cc)
    bad = CorrectingCode(c, n, basis, perturb_channel(cc.channel, 1e-2, 0))
    docs["bundle_a_perturbed.json"] = ser.bundle_to_json(bad)
    return docs


def cmd_export_example(args, cfg: RunConfig) -> int:
    out = Path(args.directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ValidationError(f"cannot create {out}: {e}") from None
    rep = Reporter(cfg)
    docs = example_fixtures(cfg.tol)
    for name, doc in docs.items():
        ser.dump_json(doc, out / name)
    rep.line("files", sorted(docs), f"wrote {len(docs)} files to {out}")
    return rep.finish(0)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rank-eps", type=float, default=1e-10, help="singular-value cutoff")
    common.add_argument("--check-eps", type=float, default=1e-9, help="residual acceptance threshold")
    common.add_argument("--seed", type=int, default=None, help=f"RNG seed (default: ${SEED_ENV} or 0)")
    common.add_argument("--samples", type=int, default=100, help="random samples per check")
    common.add_argument("--format", choices=["text", "json"], default="text")

    p = argparse.ArgumentParser(prog="qecdip", description="Quantum error-correcting codes via decoding inner products.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("kl-check", parents=[common], help="Knill-Laflamme test of a code against a noise span")
    s.add_argument("code")
    s.add_argument("noise")
    s.set_defaults(func=cmd_kl_check)

    s = sub.add_parser("synthesize", parents=[common], help="build the decoding channel")
    s.add_argument("code")
    s.add_argument("noise")
    s.add_argument("-o", "--out", required=True)
    s.add_argument("--bundle", action="store_true", help="write a full code/noise/basis/Kraus bundle")
    s.set_defaults(func=cmd_synthesize)

    s = sub.add_parser("verify", parents=[common], help="sampled decoding residual of bundles")
    s.add_argument("bundles", nargs="+")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("wold", parents=[common], help="Wold decomposition of a partial isometry")
    s.add_argument("operator")
    s.add_argument("--partition", default=None)
    s.set_defaults(func=cmd_wold)

    s = sub.add_parser("cyclic", parents=[common], help="shift/clock/Fourier/Weyl operators, codes and decoders")
    s.add_argument("--dim", required=True, help="dimension, or comma-separated block dimensions for weyl")
    s.add_argument("--op", required=True,
                   choices=["shift", "clock", "fourier", "entangled", "weyl", "code", "clock-code", "decoder", "clock-decoder"])
    s.add_argument("--r", default=None)
    s.add_argument("--t", default=None)
    s.add_argument("--thetas", default=None)
    s.add_argument("--j", type=int, default=None)
    s.add_argument("--check", action="store_true")
    s.add_argument("-o", "--out", default=None)
    s.set_defaults(func=cmd_cyclic)

    s = sub.add_parser("blocks", parents=[common], help="block-wise analysis over a reducing partition")
    s.add_argument("operator")
    s.add_argument("--partition", required=True)
    s.add_argument("--t", type=int, default=None, help="also build block shift-power codes for this t")
    s.add_argument("-o", "--out", default=None, help="write the code bound here")
    s.set_defaults(func=cmd_blocks)

    s = sub.add_parser("simulate", parents=[common], help="seeded random instances with negative controls")
    s.add_argument("--instances", type=int, default=20)
    s.add_argument("--max-ambient", type=int, default=16)
    s.add_argument("--max-code-dim", type=int, default=4)
    s.add_argument("--max-noise", type=int, default=6)
    s.add_argument("--perturb", type=float, default=1e-2)
    s.add_argument("--control-floor", type=float, default=1e-3)
    s.add_argument("-v", "--verbose", action="store_true")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("export-example", parents=[common], help="write the 15-dimensional example fixtures")
    s.add_argument("directory")
    s.set_defaults(func=cmd_export_example)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_args(args)
        return args.func(args, cfg)
    except MathematicalFailure as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ValidationError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
