"""Command-line front end: ``curvlab {models,classify,audit,wp}``.

Exit codes: 0 success (or verdicts as expected), 1 verdict mismatch or chain
violation, 2 input error.  ``CURVLAB_THREADS`` caps the BLAS thread pools; it
must be read before numpy is imported, which is why it is handled first.
"""

from __future__ import annotations

import os

_THREADS = os.environ.get("CURVLAB_THREADS")
if _THREADS:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _THREADS)

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .positivity.classify import (CHAIN, DEFAULT_RESTARTS, DEFAULT_SAMPLES, DEFAULT_TOL,
                                  classify_all, classify_eigen, implication_audit)
from .tensor_core import (SIGN_CLASSES, CurvatureTensor, TensorError, model_complex_ball,
                          model_fubini_study, random_kahler_tensor, validate, zero_tensor)
from .tensorfile import dumps_json, dumps_text, read_tensor

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT = 0, 1, 2
MODELS = ("fubini_study", "complex_ball", "flat", "random")


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    tol: float | None = None
    samples: int = DEFAULT_SAMPLES
    restarts: int = DEFAULT_RESTARTS
    seed: int = 0
    refinement: int = 3
    input: str | None = None
    output: str | None = None
    curve: list = field(default_factory=list)
    fmt: str = "text"

    def check(self):
        if self.tol is not None and not self.tol > 0:
            raise InputError(f"--tol must be positive, got {self.tol}")
        if self.samples < 1 or self.restarts < 1:
            raise InputError("--samples and --restarts must be at least 1")
        if not 0 <= self.refinement <= 6:
            raise InputError(f"--refine must be in 0..6, got {self.refinement}")


def parse_curve(text: str) -> list[complex]:
    """Seven complex coefficients ``c0..c6``: either 7 Python complex literals
    (``-1,0,0,0,0,0,1`` or ``1+2j,...``) or 14 reals as (re, im) pairs."""
    toks = [t.strip() for t in text.split(",") if t.strip()]
    try:
        if len(toks) == 14:
            vals = [float(t) for t in toks]
            return [complex(vals[2 * k], vals[2 * k + 1]) for k in range(7)]
        if len(toks) == 7:
            return [complex(t.replace(" ", "")) for t in toks]
    except ValueError as exc:
        raise InputError(f"cannot parse curve coefficients {text!r}: {exc}") from exc
    raise InputError(f"expected 7 complex or 14 real coefficients, got {len(toks)}")


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dumps_tensor(R: CurvatureTensor, fmt: str) -> str:
    return dumps_text(R) if fmt == "text" else dumps_json(R)


def cmd_models(args, cfg: RunConfig) -> int:
    n = args.n
    if n < 1:
        raise InputError("-n must be positive")
    if args.name == "fubini_study":
        R = model_fubini_study(n)
    elif args.name == "complex_ball":
        R = model_complex_ball(n)
    elif args.name == "flat":
        R = zero_tensor(n)
    else:
        if args.sign_class not in SIGN_CLASSES:
            raise InputError(f"unknown sign class {args.sign_class!r}; choose from {SIGN_CLASSES}")
        R = random_kahler_tensor(cfg.seed, n, args.sign_class)
    bad = validate(R)
    if bad:
        raise InputError("generated tensor failed validation: " + "; ".join(bad))
    _emit(_dumps_tensor(R, cfg.fmt), cfg.output)
    return EXIT_OK


def _load(path: str | None) -> CurvatureTensor:
    if not path:
        raise InputError("--in is required")
    try:
        R = read_tensor(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except (TensorError, ValueError) as exc:
        raise InputError(f"invalid tensor file {path}: {exc}") from exc
    bad = validate(R)
    if bad:
        raise InputError(f"tensor in {path} violates its symmetries:\n  " + "\n  ".join(bad))
    return R


def cmd_classify(args, cfg: RunConfig) -> int:
    R = _load(cfg.input)
    tol = DEFAULT_TOL if cfg.tol is None else cfg.tol
    report = classify_all(R, cfg.samples, cfg.restarts, tol, cfg.seed)
    _emit(report.to_text() if cfg.fmt == "text" else report.to_json() + "\n", cfg.output)
    return EXIT_MISMATCH if report.chain_violations else EXIT_OK


def cmd_audit(args, cfg: RunConfig) -> int:
    if args.count < 0 or args.n < 1:
        raise InputError("--count must be >= 0 and -n >= 1")
    if args.sign_class not in SIGN_CLASSES:
        raise InputError(f"unknown sign class {args.sign_class!r}; choose from {SIGN_CLASSES}")
    tol = DEFAULT_TOL if cfg.tol is None else cfg.tol
    # tensor k uses the k-th child of the master seed for generation and search
    children = np.random.SeedSequence(cfg.seed).spawn(args.count)
    failures = []
    for k, ss in enumerate(children):
        gen, search = ss.spawn(2)
        R = random_kahler_tensor(np.random.default_rng(gen), args.n, args.sign_class)
        overrides = None
        if args.inject_sign_flip:
            # test hook: replace the operator verdict by that of -R
            overrides = {"curvature_operator": classify_eigen("curvature_operator", -R, tol)}
        rep = implication_audit(R, cfg.samples, cfg.restarts, tol, search, overrides=overrides)
        if rep.chain_violations:
            failures.append({"index": k, "violations": list(rep.chain_violations),
                             "report": rep.to_dict(),
                             "tensor": json.loads(dumps_json(R))})
    summary = {"audited": args.count, "n": args.n, "sign_class": args.sign_class,
               "seed": cfg.seed, "tol": tol, "samples": cfg.samples,
               "restarts": cfg.restarts, "violations": len(failures), "failures": failures}
    if cfg.fmt == "structured":
        text = json.dumps(summary, indent=1) + "\n"
    else:
        text = (f"audited {args.count} tensors (n={args.n}, {args.sign_class}, seed={cfg.seed}): "
                f"{len(failures)} with chain violations\n")
        for f in failures:
            text += f"  tensor {f['index']}: {', '.join(f['violations'])}\n"
            involved = {x for label, a, b in CHAIN if label in f["violations"] for x in (a, b)}
            for v in f["report"]["verdicts"]:
                if v["notion"] in involved:
                    text += (f"    {v['notion']}: {v['sign']} extremal={v['extremal_value']:+.6e} "
                             f"witness={json.dumps(v['witness'])}\n")
    _emit(text, cfg.output)
    return EXIT_MISMATCH if failures else EXIT_OK


def cmd_wp(args, cfg: RunConfig) -> int:
    from .wp.mesh import HyperellipticCurve, MeshError
    from .wp.pipeline import X6_MINUS_1, run_wp

    coeffs = cfg.curve or list(X6_MINUS_1)
    try:
        curve = HyperellipticCurve(tuple(coeffs))
    except (MeshError, ValueError) as exc:
        raise InputError(f"invalid curve: {exc}") from exc
    try:
        run = run_wp(curve, cfg.refinement, seed=cfg.seed, samples=cfg.samples,
                     restarts=cfg.restarts, identity_trials=args.identity_trials, tol=cfg.tol)
    except MeshError as exc:
        raise InputError(f"mesh construction failed: {exc}") from exc
    run.manifest["run_config"] = asdict(cfg) | {"curve": [[c.real, c.imag] for c in coeffs]}
    manifest = json.dumps(run.manifest, indent=1, default=float) + "\n"
    if cfg.output:
        out = Path(cfg.output)
        out.mkdir(parents=True, exist_ok=True)
        ext = "txt" if cfg.fmt == "text" else "json"
        tensors = {"cotangent": run.curvature.cotangent, "tangent": run.curvature.tangent,
                   "cotangent_orthonormal": run.cotangent, "tangent_orthonormal": run.tangent}
        for name, R in tensors.items():
            (out / f"{name}.{ext}").write_text(_dumps_tensor(R, cfg.fmt))
        (out / "manifest.json").write_text(manifest)
    if cfg.fmt == "structured":
        sys.stdout.write(manifest)
    else:
        m = run.manifest
        lines = [f"curve c0..c6 = {', '.join(f'{c:g}' for c in coeffs)}; level {cfg.refinement}; "
                 f"{m['mesh']['vertices']} vertices, chi = {m['mesh']['euler_characteristic']}",
                 f"area/4pi - 1 = {m['liouville']['area_relative_error']:.3e}; "
                 f"Liouville residual {m['liouville']['residual']:.3e} "
                 f"in {m['liouville']['iterations']} Newton steps",
                 f"Hodge=WP residual {m['basis']['hodge_wp_residual']:.3e}; "
                 f"duality residual {m['tensors']['duality_residual']:.3e}; "
                 f"mesh_tol {run.mesh_tol:.3e}",
                 "cotangent bundle (Hodge metric):", run.cotangent_report.to_text().rstrip(),
                 "tangent bundle (Weil-Petersson metric):", run.tangent_report.to_text().rstrip()]
        if run.as_expected:
            lines.append("verdicts as expected")
        else:
            lines += ["VERDICT MISMATCH:"] + [f"  {s}" for s in run.mismatches]
        sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK if run.as_expected else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None,
                        help=f"sign tolerance (default {DEFAULT_TOL:g}; wp: 1e-3 x max-norm)")
    common.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    common.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output file (wp: output directory)")
    common.add_argument("--format", dest="fmt", choices=("text", "structured"), default="text")

    p = argparse.ArgumentParser(prog="curvlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="subcommand", required=True)

    m = sub.add_parser("models", parents=[common], help="emit a model curvature tensor")
    m.add_argument("name", choices=MODELS)
    m.add_argument("-n", type=int, default=2)
    m.add_argument("--sign-class", default="unconstrained")

    c = sub.add_parser("classify", parents=[common], help="classify a tensor file")
    c.add_argument("--in", dest="input", default=None)

    a = sub.add_parser("audit", parents=[common], help="implication-chain fuzz audit")
    a.add_argument("--count", type=int, default=100)
    a.add_argument("-n", type=int, default=2)
    a.add_argument("--sign-class", default="semi-dual-nakano-negative")
    a.add_argument("--inject-sign-flip", action="store_true", help=argparse.SUPPRESS)

    w = sub.add_parser("wp", parents=[common], help="Weil-Petersson curvature pipeline")
    w.add_argument("--curve", default=None, help='"c0,c1,...,c6" (default x^6 - 1)')
    w.add_argument("--refine", type=int, default=3)
    w.add_argument("--identity-trials", type=int, default=20)
    return p


COMMANDS = {"models": cmd_models, "classify": cmd_classify, "audit": cmd_audit, "wp": cmd_wp}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:          # argparse usage errors exit with 2 already
        return int(exc.code or 0)
    try:
        cfg = RunConfig(subcommand=args.subcommand, tol=args.tol, samples=args.samples,
                        restarts=args.restarts, seed=args.seed,
                        refinement=getattr(args, "refine", 3),
                        input=getattr(args, "input", None), output=args.out,
                        curve=parse_curve(args.curve) if getattr(args, "curve", None) else [],
                        fmt=args.fmt)
        cfg.check()
        return COMMANDS[args.subcommand](args, cfg)
    except InputError as exc:
        print(f"curvlab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
