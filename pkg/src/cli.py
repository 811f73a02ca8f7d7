"""
Command-Line Interface
======================
Signal generation, transforms, sketching, recovery, condenser verification and
benchmarks, wired to the text file formats.

Usage:
    python main.py gen --n 10 --k 4 --model exact --seed 1 --out x.txt
    python main.py recover --input x.txt --k 4 --condenser certified --report run.json
    python main.py verify --condenser lhl --n 6 --r 3 --check universality
    python main.py bench --sweep n --from 10 --to 14
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from src.bench import SWEEPS, run_bench
from src.condenser import (
    CertifiedRandomCondenser, GuvCondenser, LeftoverHashCondenser, LinearCondenser,
    build_recovery_condenser, certified_random_family, guv_params, verify_expansion,
    verify_universality,
)
from src.config import (
    DEFAULT_CERT_EPS, DEFAULT_EPS, DEFAULT_SEEDS, EXPANSION_TRIALS, CondenserConfig,
    RecoveryConfig,
)
from src.data_loader import (
    get_signal_summary, load_condenser, load_signal, save_condenser, save_signal, save_sketch,
)
from src.errors import SparseWHTError, UnsupportedParametersError
from src.evaluate import RunReport, build_report, check_guarantee, save_report
from src.gf2 import F2Matrix
from src.recover import end_to_end
from src.signals import generate_signal
from src.sketch import build_sketch, plan_queries
from src.wht import DenseSignal, fwht, oracle_from_signal

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_BREACH = 2

MODES = {"det": "deterministic", "rand": "randomized"}


# =============================================================================
# HELPERS
# =============================================================================

def _banner(title: str):
    print("\n" + "="*60)
    print(f"  {title}")
    print("="*60)


def _condenser_for(args, n: int, k: int) -> LinearCondenser:
    if getattr(args, "condenser_file", None):
        cond = load_condenser(args.condenser_file)
        if cond.n != n:
            raise UnsupportedParametersError(
                f"condenser file is for n={cond.n}, signal has n={n}")
        print(f"✓ Loaded condenser {cond.describe()} from {args.condenser_file}")
        return cond
    config = CondenserConfig(backend=args.condenser, D=args.D, r=args.r, seed=args.seed)
    cond = build_recovery_condenser(n, k, config)
    print(f"✓ Built condenser {cond.describe()}")
    if getattr(args, "condenser_out", None):
        save_condenser(cond, args.condenser_out)
        print(f"  ✓ Saved: {args.condenser_out}")
    return cond


def _add_condenser_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--condenser", choices=["certified", "guv", "lhl"], default="certified")
    parser.add_argument("--condenser-file", help="Load a saved condenser descriptor")
    parser.add_argument("--condenser-out", help="Save the condenser descriptor used")
    parser.add_argument("--D", type=int, default=DEFAULT_SEEDS, help="Seeds (certified)")
    parser.add_argument("--r", type=int, default=None, help="Output bits (default from k)")


# =============================================================================
# COMMANDS
# =============================================================================

def cmd_gen(args) -> int:
    """Write a random k-sparse (optionally noisy) integer signal."""
    signal = generate_signal(args.n, args.k, model=args.model, noise_l1=args.noise_l1,
                             mag_max=args.mag_max, seed=args.seed)
    save_signal(signal, args.out, layout=args.layout)
    print(f"✓ Wrote signal n={args.n} nnz={int(np.count_nonzero(signal.values))} to {args.out}")
    return EXIT_OK


def cmd_transform(args) -> int:
    """Write the Walsh-Hadamard spectrum of a signal (sqrt(N) x-hat with --integer)."""
    signal = load_signal(args.input)
    spectrum = fwht(signal, normalized=not args.integer)
    save_signal(DenseSignal(spectrum.n, spectrum.values), args.out, layout="dense")
    print(f"✓ Wrote spectrum of length {spectrum.N:,} to {args.out}")
    return EXIT_OK


def cmd_sketch(args) -> int:
    """Measure the condenser sketch of a signal through spectral queries."""
    signal = load_signal(args.input)
    cond = _condenser_for(args, signal.n, args.k)
    plan = plan_queries(cond, with_tensor=not args.no_tensor)
    oracle = oracle_from_signal(signal, integer=signal.is_integral())
    oracle.arm(plan)
    sketch = build_sketch(oracle, cond, not args.no_tensor, plan)
    save_sketch(sketch, args.out)
    print(f"✓ Sketch {sketch.entries.shape} from {oracle.query_count:,} queries "
          f"(plan {plan.size:,}) written to {args.out}")
    return EXIT_OK


def cmd_recover(args, argv: List[str]) -> int:
    """Recover a k-sparse approximation and write the JSON report."""
    mode = MODES[args.mode]
    if args.condenser == "lhl" and mode == "deterministic" and not args.condenser_file:
        print("✗ lhl has D = 2^n seeds; deterministic recovery would enumerate all of them. "
              "Use --mode rand.", file=sys.stderr)
        return EXIT_INFEASIBLE

    _banner("SPARSE WALSH-HADAMARD RECOVERY")
    print("\n📂 STEP 1: Loading signal...")
    signal = load_signal(args.input)
    if not signal.is_integral():
        print("✗ recovery runs in integer mode and needs an integer signal", file=sys.stderr)
        return EXIT_INFEASIBLE
    get_signal_summary(signal, args.k)

    print("\n⚙️ STEP 2: Building condenser...")
    cond = _condenser_for(args, signal.n, args.k)
    if isinstance(cond, LeftoverHashCondenser) and mode == "deterministic":
        print("✗ lhl condensers only support --mode rand", file=sys.stderr)
        return EXIT_INFEASIBLE

    print("\n🔎 STEP 3: Sketching and recovering...")
    config = RecoveryConfig(k=args.k, eps=args.eps, s0=args.s0, L=args.mag_max, mode=mode,
                            q=args.q, eta=args.eta, rng_seed=args.seed, n_jobs=args.jobs)
    # the harness computes the spectrum; recovery only sees the oracle
    oracle = oracle_from_signal(signal, integer=True)
    result = end_to_end(oracle, cond, config)

    print("\n📊 STEP 4: Evaluating...")
    base = build_report(result, signal, cond, config)
    report = RunReport(**base.model_dump(), command=" ".join(argv),
                       config=config.model_dump(mode="json"))
    floor = config.resolved_nu(signal.n) * float(np.abs(signal.values).sum()) \
        if mode == "randomized" else 0.0
    ok = check_guarantee(report.l1_error, report.l1_tail, config.eps, floor)
    print(f"  Queries: {report.queries:,}   Seeds: {report.seeds_touched}   "
          f"Iterations: {report.iterations}")
    print(f"  l1 error: {report.l1_error:g}   tail: {report.l1_tail:g}   "
          f"exact: {report.exact}   ratio: {report.ratio}")
    if args.report:
        save_report(report, args.report)
    else:
        print(report.model_dump_json(indent=2))
    if not ok:
        print("✗ l1/l1 guarantee breached", file=sys.stderr)
        return EXIT_BREACH
    print("✓ Guarantee satisfied")
    return EXIT_OK


def _verify_target(args) -> LinearCondenser:
    if args.condenser_file:
        return load_condenser(args.condenser_file)
    if args.condenser == "lhl":
        return LeftoverHashCondenser(args.n, args.r if args.r is not None else args.n)
    if args.condenser == "guv":
        return GuvCondenser(guv_params(args.alpha, args.n, args.kappa or args.n, args.eps))
    r = args.r if args.r is not None else args.n
    if args.adversarial:
        M = F2Matrix.random(np.random.default_rng(args.seed), r, args.n)
        return CertifiedRandomCondenser(args.n, r, [M] * args.D)
    return certified_random_family(args.n, r, args.D, args.k, args.eps, seed=args.seed,
                                   mode=args.mode, trials=args.trials)


def cmd_verify(args) -> int:
    """Run the expansion or universality verifier and print the outcome."""
    cond = _verify_target(args)
    print(f"✓ Condenser {cond.describe()}")
    if args.check == "universality":
        if not isinstance(cond, LeftoverHashCondenser):
            print("✗ universality is checked for lhl families only", file=sys.stderr)
            return EXIT_INFEASIBLE
        report = verify_universality(cond)
        print(f"  Pairs: {report.pairs:,}   max collision probability: "
              f"{report.max_collision_prob:.6g}   bound 2^-r: {report.bound:.6g}")
    else:
        report = verify_expansion(cond, args.k, args.eps, mode=args.mode, trials=args.trials,
                                  seed=args.seed)
        print(f"  Sets checked: {report.sets_checked:,}   worst ratio: {report.worst_ratio:.4f}"
              f"   threshold: {1 - args.eps:.4f}")
        if report.witness is not None:
            print(f"  Witness: {report.witness}")
    print(report.model_dump_json(indent=2))
    if not report.passed:
        print("✗ check failed", file=sys.stderr)
        return EXIT_BREACH
    print("✓ check passed")
    return EXIT_OK


def cmd_bench(args) -> int:
    """Sweep a parameter and print the scaling table."""
    table = run_bench(args.sweep, args.start, args.stop, step=args.step, n=args.n, k=args.k,
                      D=args.D, trials=args.trials, noise_l1=args.noise_l1, seed=args.seed)
    print(table.to_string(index=False))
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(args.out, index=False)
        print(f"  ✓ Saved: {args.out}")
    if not table['queries_match_plan'].all():
        print("✗ query counts disagree with the plan", file=sys.stderr)
        return EXIT_BREACH
    return EXIT_OK


# =============================================================================
# PARSER
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparse-wht",
        description="Sparse Walsh-Hadamard recovery from non-adaptive spectral queries")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="Generate a sparse integer signal")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--k", type=int, required=True)
    gen.add_argument("--model", choices=["exact", "noisy"], default="exact")
    gen.add_argument("--noise-l1", type=float, default=0.0)
    gen.add_argument("--mag-max", type=int, default=10)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--layout", choices=["sparse", "dense"], default="sparse")
    gen.add_argument("--out", required=True)

    transform = sub.add_parser("transform", help="Walsh-Hadamard transform of a signal file")
    transform.add_argument("--input", required=True)
    transform.add_argument("--out", required=True)
    transform.add_argument("--integer", action="store_true", help="Unnormalized (sqrt(N) x-hat)")

    sketch = sub.add_parser("sketch", help="Sketch a signal through spectral queries")
    sketch.add_argument("--input", required=True)
    sketch.add_argument("--k", type=int, required=True)
    sketch.add_argument("--seed", type=int, default=0)
    sketch.add_argument("--no-tensor", action="store_true", help="Only the M x rows")
    sketch.add_argument("--out", required=True)
    _add_condenser_flags(sketch)

    recover = sub.add_parser("recover", help="Recover a k-sparse approximation")
    recover.add_argument("--input", required=True)
    recover.add_argument("--k", type=int, required=True)
    recover.add_argument("--eps", type=float, default=DEFAULT_EPS)
    recover.add_argument("--mode", choices=sorted(MODES), default="det")
    recover.add_argument("--q", type=int, default=None,
                         help="Seeds sampled per iteration in rand mode. The default from eps and eta "
                              "exceeds the query cap at desk scale, so pass it explicitly there")
    recover.add_argument("--eta", type=float, default=0.1)
    recover.add_argument("--s0", type=int, default=None)
    recover.add_argument("--mag-max", type=int, default=100, help="Magnitude bound L")
    recover.add_argument("--seed", type=int, default=0)
    recover.add_argument("--jobs", type=int, default=1)
    recover.add_argument("--report")
    _add_condenser_flags(recover)

    verify = sub.add_parser("verify", help="Check a condenser family")
    verify.add_argument("--condenser", choices=["certified", "guv", "lhl"], default="certified")
    verify.add_argument("--condenser-file")
    verify.add_argument("--n", type=int, default=6)
    verify.add_argument("--r", type=int, default=None)
    verify.add_argument("--D", type=int, default=DEFAULT_SEEDS)
    verify.add_argument("--k", type=int, default=2)
    verify.add_argument("--eps", type=float, default=DEFAULT_CERT_EPS)
    verify.add_argument("--kappa", type=int, default=None, help="GUV min-entropy bits")
    verify.add_argument("--alpha", type=float, default=1.0, help="GUV exponent")
    verify.add_argument("--check", choices=["expansion", "universality"], default="expansion")
    verify.add_argument("--mode", choices=["exhaustive", "sampled"], default="sampled")
    verify.add_argument("--trials", type=int, default=EXPANSION_TRIALS)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--adversarial", action="store_true",
                        help="Repeat one random matrix for every seed")

    bench = sub.add_parser("bench", help="Scaling sweep")
    bench.add_argument("--sweep", choices=SWEEPS, required=True)
    bench.add_argument("--from", dest="start", type=int, required=True)
    bench.add_argument("--to", dest="stop", type=int, required=True)
    bench.add_argument("--step", type=int, default=1)
    bench.add_argument("--n", type=int, default=12)
    bench.add_argument("--k", type=int, default=4)
    bench.add_argument("--D", type=int, default=DEFAULT_SEEDS)
    bench.add_argument("--trials", type=int, default=3)
    bench.add_argument("--noise-l1", type=float, default=0.0)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", help="CSV path")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INFEASIBLE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(levelname)s: %(message)s")
    try:
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "transform":
            return cmd_transform(args)
        if args.command == "sketch":
            return cmd_sketch(args)
        if args.command == "recover":
            return cmd_recover(args, argv)
        if args.command == "verify":
            return cmd_verify(args)
        return cmd_bench(args)
    except (SparseWHTError, ValueError) as exc:
        print(f"✗ {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
