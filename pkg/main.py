#!/usr/bin/env python3
"""
Main application for the proof-producing ReLU network verifier
Provides CLI commands for verifying, checking, evaluating and benchmarking

Exit codes: 0 success, 1 proof rejected, 2 bad input, 3 resource limit.
"""

import argparse
import json
import logging
import math
import os
import sys
import time
from pathlib import Path
from typing import List, Optional, Tuple

from src.errors import (DepthLimit, InvariantViolation, IterationLimit, MalformedProof,
                        ParseError, ShapeMismatch)
from src.lp import NumberField, Query, format_scalar, parse_scalar
from src.lp.scalar import DEFAULT_EPSILON, MODES
from src.lp.simplex import DEFAULT_MAX_ITERS
from src.network import (InstanceGenerator, Network, Property, encode, evaluate, parse_network,
                         parse_property)
from src.proof import ProofChecker, ProofTree, read_proof, write_proof
from src.search import ReluVerifier
from src.utils import BenchmarkTracker, Visualizer

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_BAD_INPUT = 2
EXIT_RESOURCE = 3

logger = logging.getLogger(__name__)


def print_banner(title: str):
    print("\n" + "=" * 60)
    print(title)
    print("=" * 60)


def make_field(args) -> NumberField:
    return NumberField(args.mode, args.epsilon)


def make_delegate(max_iters: int):
    """Decide a leaf query by an exact-mode search"""
    def delegate(query: Query) -> Optional[bool]:
        result = ReluVerifier(NumberField(), max_iters=max_iters, produce_proofs=False).verify(query)
        return result.is_unsat
    return delegate


def run_check(tree: ProofTree, expected: Optional[Query], args) -> int:
    checker = ProofChecker(expected, recover=args.recover,
                           delegate=make_delegate(args.max_iters) if args.recover else None,
                           jobs=args.jobs, max_iters=args.max_iters)
    report = checker.check(tree)

    if args.report == 'json':
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        print_banner("PROOF ACCEPTED" if report.accepted else "PROOF REJECTED")
        stats = report.statistics
        print(f"Nodes: {stats.get('nodes', 0)} | Leaves: {stats.get('leaves', 0)} | "
              f"Depth: {stats.get('depth', 0)} | Lemmas: {stats.get('lemmas', 0)}")
        for path, reason in report.failures:
            print(f"  {path}: {reason}")
        for repair in report.lemma_repairs:
            print(f"  {repair['path']}: lemma {repair['action']}")
        for path, note in report.recovered.items():
            print(f"  {path}: recovered ({note})")
        print(f"Divisions during checking: {report.divisions}")
    return EXIT_OK if report.accepted else EXIT_REJECTED


def cmd_verify(args) -> int:
    """Verify a property; write the proof for UNSAT"""
    net = parse_network(args.network)
    prop = parse_property(args.property)
    query = encode(net, prop)
    verifier = ReluVerifier(make_field(args), max_iters=args.max_iters, jobs=args.jobs,
                            produce_proofs=not args.no_proofs, audit=args.audit)
    result = verifier.verify(query)

    if result.is_sat:
        if args.report == 'json':
            print(json.dumps({'verdict': 'sat',
                              'witness': [format_scalar(v) for v in result.witness],
                              'statistics': result.statistics}, indent=2, sort_keys=True))
        else:
            print_banner("SAT")
            print("Witness: " + " ".join(format_scalar(v) for v in result.witness))
            print("Output:  " + " ".join(format_scalar(v) for v in evaluate(net, result.witness)))
        return EXIT_OK

    tree = result.tree
    if tree is not None:
        tree.network = net.to_dict()
        tree.prop = prop.to_dict()
        if args.proof_out:
            write_proof(tree, args.proof_out)

    if args.report != 'json':
        print_banner("UNSAT")
        if tree is not None:
            stats = tree.statistics()
            print(f"Proof tree: {stats['nodes']} nodes, {stats['leaves']} leaves, "
                  f"depth {stats['depth']}, {stats['lemmas']} lemmas")
        print(f"Pivots: {result.statistics['pivots']} | "
              f"Tightenings: {result.statistics['tightenings']} | "
              f"Time: {result.statistics['seconds']:.3f}s")
        if args.proof_out and tree is not None:
            print(f"Proof written to {args.proof_out}")
    elif not args.check:
        print(json.dumps({'verdict': 'unsat', 'statistics': result.statistics,
                          'tree': tree.statistics() if tree is not None else None},
                         indent=2, sort_keys=True))

    if args.check and tree is not None:
        return run_check(tree, query, args)
    return EXIT_OK


def cmd_check(args) -> int:
    """Check a proof, against re-encoded inputs when given"""
    if len(args.paths) not in (1, 3):
        print("check expects PROOF or NETWORK PROPERTY PROOF", file=sys.stderr)
        return EXIT_BAD_INPUT
    tree = read_proof(args.paths[-1])
    expected = None
    if len(args.paths) == 3:
        expected = encode(parse_network(args.paths[0]), parse_property(args.paths[1]))
    elif tree.network is not None and tree.prop is not None:
        expected = encode(Network.from_dict(tree.network), Property.from_dict(tree.prop))
    return run_check(tree, expected, args)


def cmd_eval(args) -> int:
    """Evaluate the network on one input"""
    net = parse_network(args.network)
    try:
        x = [parse_scalar(value) for value in args.inputs]
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    print(" ".join(format_scalar(v) for v in evaluate(net, x)))
    return EXIT_OK


def cmd_gen(args) -> int:
    """Write a seeded random instance"""
    generator = InstanceGenerator(args.seed, inputs=args.inputs, layers=args.layers,
                                  width=args.width, outputs=args.outputs)
    net_path, prop_path = generator.write(args.out, args.prefix)
    print(f"Wrote {net_path} and {prop_path}")
    return EXIT_OK


def cmd_bench(args) -> int:
    """Time proof-free solving, proof-producing solving and checking on a seeded suite"""
    print_banner(f"BENCHMARK: {args.count} instances (seed {args.seed})")
    tracker = BenchmarkTracker()
    field = make_field(args)

    for index in range(args.count):
        generator = InstanceGenerator(args.seed + index, inputs=args.inputs, layers=args.layers,
                                      width=args.width)
        query = encode(*generator.instance())

        started = time.perf_counter()
        plain = ReluVerifier(field, max_iters=args.max_iters, produce_proofs=False).verify(query)
        solve_seconds = time.perf_counter() - started

        started = time.perf_counter()
        result = ReluVerifier(field, max_iters=args.max_iters).verify(query)
        proof_seconds = time.perf_counter() - started

        record = {'instance': f"seed{args.seed + index}", 'verdict': result.verdict,
                  'solve_seconds': solve_seconds, 'proof_seconds': proof_seconds,
                  'pivots': result.statistics['pivots']}
        if plain.verdict != result.verdict:
            logger.warning("instance %d: verdicts differ with and without proofs", index)
        if result.is_unsat:
            started = time.perf_counter()
            report = ProofChecker(query, recover=not field.exact,
                                  delegate=make_delegate(args.max_iters)).check(result.tree)
            record['check_seconds'] = time.perf_counter() - started
            record['accepted'] = report.accepted
            record.update(result.tree.statistics())
        tracker.add_run(record)
        print(f"Instance {index + 1}/{args.count}: {result.verdict.upper()}")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tracker.save_csv(out / "bench.csv")
    frame = tracker.to_frame()
    visualizer = Visualizer(out)
    visualizer.plot_timings(frame)
    visualizer.plot_tree_sizes([int(v) for v in tracker.unsat_frame()['leaves']])

    summary = tracker.get_summary()
    print_banner("BENCHMARK RESULTS")
    print(f"Instances: {summary['total_instances']} "
          f"(SAT {summary['sat']}, UNSAT {summary['unsat']})")
    print(f"Proofs accepted: {summary['accepted']}/{summary['unsat']}")
    print(f"Proof production overhead: {summary['overhead_percent']:.1f}%")
    print(f"Checking time relative to solving: {summary['relative_check_percent']:.1f}%")
    print(f"Average leaves: {summary['avg_leaves']:.1f} | Max depth: {summary['max_depth']}")
    return EXIT_OK if summary['accepted'] == summary['unsat'] else EXIT_REJECTED


def environment_defaults() -> Tuple[str, float]:
    """
    Read RELUCERT_MODE and RELUCERT_EPSILON

    Raises:
        ValueError: an unknown mode or a non-positive or non-numeric epsilon
    """
    mode = os.environ.get('RELUCERT_MODE', 'exact')
    if mode not in MODES:
        raise ValueError(f"RELUCERT_MODE must be one of {', '.join(MODES)}, got {mode!r}")
    raw = os.environ.get('RELUCERT_EPSILON')
    if raw is None:
        return mode, DEFAULT_EPSILON
    try:
        epsilon = float(raw)
    except ValueError:
        raise ValueError(f"RELUCERT_EPSILON is not a number: {raw!r}") from None
    if not 0 < epsilon < math.inf:
        raise ValueError(f"RELUCERT_EPSILON must be positive and finite, got {raw!r}")
    return mode, epsilon


def build_parser(mode: str = 'exact', epsilon: float = DEFAULT_EPSILON) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--verbose', action='store_true', help='Log at DEBUG level')
    common.add_argument('--mode', choices=MODES, default=mode,
                        help='Arithmetic mode (default: $RELUCERT_MODE or exact)')
    common.add_argument('--epsilon', type=float, default=epsilon,
                        help='Float-mode tolerance (default: $RELUCERT_EPSILON or 1e-9)')
    common.add_argument('--max-iters', type=int, default=DEFAULT_MAX_ITERS,
                        help='Simplex step budget per node')
    common.add_argument('--jobs', type=int, default=1,
                        help='Worker threads for sibling subtrees and leaf checks')

    parser = argparse.ArgumentParser(
        description="Proof-producing ReLU network verifier with an independent checker"
    )
    commands = parser.add_subparsers(dest='command', required=True)

    verify = commands.add_parser('verify', parents=[common], help='Verify a property')
    verify.add_argument('network')
    verify.add_argument('property')
    verify.add_argument('--proof-out', help='Write the UNSAT proof to this .certproof file')
    verify.add_argument('--seed', type=int, default=0,
                        help='Accepted for reproducible scripts; the solver is deterministic')
    verify.add_argument('--check', action='store_true', help='Check the proof right away')
    verify.add_argument('--recover', action='store_true', help='Recover failed leaves when checking')
    verify.add_argument('--no-proofs', action='store_true', help='Skip proof production')
    verify.add_argument('--audit', action='store_true',
                        help='Re-derive every tightened bound from its explanation')
    verify.add_argument('--report', choices=['text', 'json'], default='text')
    verify.set_defaults(handler=cmd_verify)

    check = commands.add_parser('check', parents=[common], help='Check a proof file')
    check.add_argument('paths', nargs='+', metavar='PATH',
                       help='PROOF, or NETWORK PROPERTY PROOF')
    check.add_argument('--recover', action='store_true', help='Repair lemmas and re-solve leaves')
    check.add_argument('--report', choices=['text', 'json'], default='text')
    check.set_defaults(handler=cmd_check)

    evaluate_cmd = commands.add_parser('eval', parents=[common], help='Evaluate a network')
    evaluate_cmd.add_argument('network')
    evaluate_cmd.add_argument('inputs', nargs='+')
    evaluate_cmd.set_defaults(handler=cmd_eval)

    gen = commands.add_parser('gen', parents=[common], help='Generate a random instance')
    gen.add_argument('--seed', type=int, default=0)
    gen.add_argument('--inputs', type=int, default=2)
    gen.add_argument('--layers', type=int, default=2)
    gen.add_argument('--width', type=int, default=2)
    gen.add_argument('--outputs', type=int, default=1)
    gen.add_argument('--out', default='.')
    gen.add_argument('--prefix', default='instance')
    gen.set_defaults(handler=cmd_gen)

    bench = commands.add_parser('bench', parents=[common], help='Benchmark a seeded suite')
    bench.add_argument('--count', type=int, default=20)
    bench.add_argument('--seed', type=int, default=0)
    bench.add_argument('--inputs', type=int, default=2)
    bench.add_argument('--layers', type=int, default=2)
    bench.add_argument('--width', type=int, default=3)
    bench.add_argument('--out', default='bench_results')
    bench.set_defaults(handler=cmd_bench)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the exit code"""
    try:
        mode, epsilon = environment_defaults()
    except ValueError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    args = build_parser(mode, epsilon).parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except (IterationLimit, DepthLimit) as exc:
        print(f"Resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ParseError, InvariantViolation, ShapeMismatch, MalformedProof, OSError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
