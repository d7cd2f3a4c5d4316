"""Command-line entry point: ``snapvar <command> [flags]``.

Exit codes: 0 success, 1 verification or I/O failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import TextIO

import numpy as np

from snapvar import __version__, analytic, experiments, haar, linalg, verify
from snapvar.cost import GateCost, StateCost

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SWEEP_COLUMNS = [
    "cost",
    "regime",
    "d",
    "T",
    "k",
    "nu",
    "n_samples",
    "mean",
    "stderr_mean",
    "variance",
    "stderr_variance",
    "analytic_variance",
    "seed",
]


class UsageError(Exception):
    pass


class MatrixFileError(ValueError):
    def __init__(self, path, line, msg):
        super().__init__(f"{path}:{line}: {msg}" if line else f"{path}: {msg}")
        self.line = line


# -- matrix files ------------------------------------------------------------


def _parse_entry(tok: str) -> complex:
    re_s, sep, im_s = tok.partition(",")
    if not sep:
        raise ValueError(f"entry {tok!r} is not a re,im pair")
    return complex(float(re_s), float(im_s))


def read_matrix_file(path) -> np.ndarray:
    """Parse ``d`` then ``d`` rows of ``re,im`` entries; ``#`` lines are comments."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise MatrixFileError(path, 0, exc.strerror or str(exc)) from exc
    lines = [
        (no, ln.strip())
        for no, ln in enumerate(text.splitlines(), 1)
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if not lines:
        raise MatrixFileError(path, 0, "empty file")
    no, head = lines[0]
    try:
        d = int(head)
    except ValueError:
        raise MatrixFileError(path, no, f"expected integer dimension, got {head!r}") from None
    if d < 1:
        raise MatrixFileError(path, no, f"dimension must be >= 1, got {d}")
    rows = lines[1:]
    if len(rows) != d:
        last = rows[-1][0] if rows else no
        raise MatrixFileError(path, last, f"expected {d} rows, found {len(rows)}")
    out = np.empty((d, d), dtype=np.complex128)
    for r, (no, ln) in enumerate(rows):
        toks = ln.split()
        if len(toks) != d:
            raise MatrixFileError(path, no, f"expected {d} entries, found {len(toks)}")
        for c, tok in enumerate(toks):
            try:
                out[r, c] = _parse_entry(tok)
            except ValueError as exc:
                raise MatrixFileError(path, no, str(exc)) from None
    if not np.all(np.isfinite(out)):
        raise MatrixFileError(path, 0, "non-finite entry")
    return out


def write_matrix_file(path, m, comment: str | None = None) -> None:
    m = linalg.as_matrix(m)
    lines = [f"# {comment}"] if comment else []
    lines.append(str(m.shape[0]))
    for row in m:
        lines.append(" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row))
    Path(path).write_text("\n".join(lines) + "\n")


# -- shared plumbing ---------------------------------------------------------


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int | None
    version: str = __version__
    outputs: list[str] = field(default_factory=list)
    duration_s: float | None = None

    def header_lines(self) -> list[str]:
        """Reproducibility header for CSV output.

        Wall-clock time and output paths are left to the sidecar so that the
        CSV bytes depend only on the resolved configuration.
        """
        return [
            f"# command: {self.command}",
            f"# version: {self.version}",
            f"# seed: {self.seed}",
            "# config: " + json.dumps(self.config, sort_keys=True),
        ]

    def write_sidecar(self, csv_path: Path) -> Path:
        side = csv_path.with_name(csv_path.name + ".manifest.json")
        payload = {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "version": self.version,
            "outputs": self.outputs,
            "duration_s": self.duration_s,
        }
        side.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return side


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def render_csv(manifest: RunManifest, columns, rows) -> str:
    buf = io.StringIO()
    for ln in manifest.header_lines():
        buf.write(ln + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def read_csv(path) -> tuple[list[str], list[dict]]:
    """Return ``(header comment lines, rows)`` of a CSV written by this tool."""
    text = Path(path).read_text()
    comments = [ln for ln in text.splitlines() if ln.startswith("#")]
    body = "\n".join(ln for ln in text.splitlines() if not ln.startswith("#"))
    return comments, list(csv.DictReader(io.StringIO(body)))


def _emit(manifest: RunManifest, text: str, out: str | None, t0: float) -> TextIO:
    """Write CSV text; return the stream for human-readable summaries."""
    manifest.duration_s = round(time.perf_counter() - t0, 3)
    if out is None:
        sys.stdout.write(text)
        return sys.stderr
    path = Path(out)
    manifest.outputs = [str(path)]
    path.write_text(text)
    manifest.write_sidecar(path)
    return sys.stdout


def _int_list(s: str) -> list[int]:
    try:
        vals = [int(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _float_list(s: str) -> list[float]:
    try:
        vals = [float(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _default_seed() -> int:
    env = os.environ.get("SNAPVAR_SEED")
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"SNAPVAR_SEED must be an integer, got {env!r}") from None


def _seed(args) -> int:
    seed = _default_seed() if args.seed is None else args.seed
    if seed < 0:
        raise UsageError("seed must be non-negative")
    return seed


def _observable_template(spec: str) -> experiments.CostTemplate:
    if spec == "fock0":
        return experiments.fock0_cost()
    if spec == "number":
        return experiments.number_cost()
    if spec.startswith("file:"):
        path = spec[5:]
        m = read_matrix_file(path)
        if not linalg.is_hermitian(m):
            raise UsageError(f"{path}: observable is not Hermitian")
        return experiments.fixed_cost(StateCost(m), spec)
    raise UsageError(f"unknown observable {spec!r} (fock0, number or file:<path>)")


def _target_template(spec: str) -> experiments.CostTemplate:
    if spec == "identity":
        return experiments.identity_target()
    if spec.startswith("file:"):
        path = spec[5:]
        m = read_matrix_file(path)
        if not linalg.is_unitary(m):
            raise UsageError(f"{path}: target is not unitary")
        return experiments.fixed_cost(GateCost(m), spec)
    raise UsageError(f"unknown target {spec!r} (identity or file:<path>)")


def _d_range(args, template) -> list[int]:
    if template.dim is not None:
        d = template.dim
        lo = d if args.d_min is None else args.d_min
        hi = d if args.d_max is None else args.d_max
        if (lo, hi) != (d, d):
            raise UsageError(f"{template.label} is {d}-dimensional; d range must be {d}..{d}")
        return [d]
    lo = 2 if args.d_min is None else args.d_min
    hi = lo if args.d_max is None else args.d_max
    if lo < 2:
        raise UsageError("--d-min must be >= 2")
    if hi < lo:
        raise UsageError("--d-max must be >= --d-min")
    return list(range(lo, hi + 1))


# -- commands ----------------------------------------------------------------


def cmd_verify_moments(args) -> int:
    seed = _seed(args)
    dims = args.d or [2, 3, 4]
    if min(dims) < 2:
        raise UsageError("second-moment formulas need d >= 2")
    if max(dims) > haar.MAX_ORACLE_DIM:
        raise UsageError(f"summation oracle limited to d <= {haar.MAX_ORACLE_DIM}")
    if args.mc_samples < 1000:
        raise UsageError("--mc-samples must be >= 1000")
    if args.tuples < 1 or args.queries < 1:
        raise UsageError("--tuples and --queries must be positive")
    streams = haar.SeededRng(seed).child(11)
    ok = True
    print(f"{'check':<36} {'d':>3} {'max deviation':>14}  result")
    for d in dims:
        for c in verify.lemma_checks(d, args.tuples, streams.substream(d)):
            if c.informational:
                status = "info"
            else:
                passed = c.max_abs_dev <= args.tol
                ok &= passed
                status = "pass" if passed else "FAIL"
            print(f"{'lemma ' + c.name:<36} {d:>3} {c.max_abs_dev:>14.3e}  {status}")
    for d in dims:
        checks = verify.moment_checks(d, args.mc_samples, args.queries, streams.substream(100 + d))
        for order in (1, 2):
            sel = [c for c in checks if c.order == order]
            worst = max(c.z for c in sel)
            passed = worst <= args.sigmas
            ok &= passed
            status = "pass" if passed else "FAIL"
            print(f"{f'sampled moment{order} (max z)':<36} {d:>3} {worst:>14.3f}  {status}")
    print("all checks passed" if ok else "verification FAILED")
    return EXIT_OK if ok else EXIT_FAIL


def _sweep_config(args) -> tuple[experiments.SweepConfig, list[int]]:
    if args.cost == "state":
        if args.target is not None:
            raise UsageError("--target applies to --cost gate")
        template = _observable_template(args.observable or "fock0")
    else:
        if args.observable is not None:
            raise UsageError("--observable applies to --cost state")
        template = _target_template(args.target or "identity")
    dims = _d_range(args, template)
    if args.nu > min(dims) - 1:
        raise UsageError(f"--nu {args.nu} exceeds d-1 = {min(dims) - 1}")
    if args.k > min(args.blocks):
        raise UsageError(f"--k {args.k} exceeds the smallest block count {min(args.blocks)}")
    if args.alpha_max < 0:
        raise UsageError("--alpha-max must be non-negative")
    try:
        cfg = experiments.SweepConfig(
            cost=template,
            d_values=tuple(dims),
            t_values=tuple(args.blocks),
            k=args.k,
            nu=args.nu,
            n_samples=args.samples,
            seed=_seed(args),
            regime=experiments.Regime(args.regime),
            alpha_range=(0.0, args.alpha_max),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return cfg, dims


def cmd_variance_sweep(args) -> int:
    t0 = time.perf_counter()
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    cfg, _ = _sweep_config(args)
    rows = experiments.run_sweep(cfg, threads=args.threads)
    manifest = RunManifest("variance-sweep", cfg.describe(), cfg.seed)
    table = [
        (
            r.cost,
            r.regime.value,
            r.d,
            r.t,
            r.k,
            r.nu,
            r.stats.n_samples,
            r.stats.mean,
            r.stats.stderr_mean,
            r.stats.variance,
            r.stats.stderr_variance,
            r.analytic.value,
            r.stats.master_seed,
        )
        for r in rows
    ]
    text = render_csv(manifest, SWEEP_COLUMNS, table)
    try:
        log = _emit(manifest, text, args.out, t0)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    slopes = experiments.sweep_slopes(rows)
    for t, (slope, se) in slopes.items():
        print(f"T={t}: log-log slope of variance vs d = {slope:.4f} +/- {se:.4f}", file=log)
    if len({r.d for r in rows}) >= 2:
        ds = sorted({r.d for r in rows})
        ref = [r.analytic.value for r in rows if r.t == rows[0].t]
        if all(v > 0 for v in ref):
            slope, se = analytic.loglog_slope(ds, ref)
            print(f"analytic column: log-log slope = {slope:.4f} +/- {se:.4f}", file=log)
    print(f"{len(rows)} rows, {manifest.duration_s:.2f} s, threads={args.threads}", file=log)
    return EXIT_OK


def cmd_two_design(args) -> int:
    t0 = time.perf_counter()
    seed = _seed(args)
    if args.d < 2:
        raise UsageError("--d must be >= 2")
    if args.pairs < 1000:
        raise UsageError("--pairs must be >= 1000")
    if not 0 <= args.nu <= args.d - 1:
        raise UsageError(f"--nu must lie in 0..{args.d - 1}")
    rows = experiments.two_design_report(args.d, args.pairs, seed, nu=args.nu)
    cfg = {"d": args.d, "pairs": args.pairs, "nu": args.nu}
    manifest = RunManifest("two-design", cfg, seed)
    columns = ["ensemble", "t", "d", "value", "stderr", "haar_value", "haar_stderr", "ratio", "z"]
    table = [
        (r.ensemble, r.t, args.d, r.value, r.stderr, r.haar_value, r.haar_stderr, r.ratio, r.z)
        for r in rows
    ]
    if args.out is not None:
        try:
            _emit(manifest, render_csv(manifest, columns, table), args.out, t0)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_FAIL
    print(f"frame potentials E|tr(U^+ V)|^(2t), d={args.d}, pairs={args.pairs}, seed={seed}")
    print(f"{'ensemble':<8} {'t':>2} {'value':>12} {'stderr':>10} {'haar':>12} {'stderr':>10} {'ratio':>8} {'z':>7}")
    for r in rows:
        print(
            f"{r.ensemble:<8} {r.t:>2} {r.value:>12.6f} {r.stderr:>10.6f} "
            f"{r.haar_value:>12.6f} {r.haar_stderr:>10.6f} {r.ratio:>8.4f} {r.z:>7.2f}"
        )
    return EXIT_OK


def cmd_compare_qubit_bound(args) -> int:
    t0 = time.perf_counter()
    seed = _seed(args)
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    for a in args.a:
        if not 0 < a < 1:
            raise UsageError(f"decay rate a={a} must lie in (0, 1)")
    template = _observable_template(args.observable)
    dims = _d_range(args, template)
    number = args.observable == "number"
    columns = ["d", "n", "state_variance", "state_variance_haar"]
    curves = {
        "state_variance": lambda d: analytic.state_variance(template.build(d).observable, d),
        "state_variance_haar": lambda d: analytic.state_variance_haar(
            template.build(d).observable, d
        ),
    }
    adjudicated = None
    if number:
        if args.adjudicate_samples < 1000:
            raise UsageError("--adjudicate-samples must be >= 1000")
        names = list(analytic.PARTICLE_NUMBER_CANDIDATES)
        columns += names
        curves.update(analytic.PARTICLE_NUMBER_CANDIDATES)
        _, adjudicated = experiments.adjudicate_particle_number(
            args.adjudicate_d, args.adjudicate_samples, seed, threads=args.threads
        )
    bounds = {f"qubit_bound_a={a:g}": (lambda d, a=a: analytic.qubit_bound(math.log2(d), a)) for a in args.a}
    columns += list(bounds)
    table = []
    for d in dims:
        row = [d, math.log2(d)]
        row += [curves[c](d) for c in columns[2 : len(columns) - len(bounds)]]
        row += [b(d) for b in bounds.values()]
        table.append(row)
    cfg = {
        "observable": args.observable,
        "a": args.a,
        "d_values": dims,
        "adjudicate_d": args.adjudicate_d if number else None,
        "adjudicate_samples": args.adjudicate_samples if number else None,
        "adjudicated": adjudicated,
    }
    manifest = RunManifest("compare-qubit-bound", cfg, seed)
    text = render_csv(manifest, columns, table)
    if any(d & (d - 1) for d in dims):
        text = text.replace(
            "# config:", "# note: n = log2(d) is interpolated for d not a power of two\n# config:", 1
        )
    try:
        log = _emit(manifest, text, args.out, t0)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if number:
        print(f"adjudicated particle-number formula: {adjudicated or 'none (not unique)'}", file=log)
    primary = adjudicated or "state_variance_haar"
    for bname, bound in bounds.items():
        for cname in [primary] + [c for c in curves if c != primary and c in columns]:
            cross = analytic.crossover_dimension(curves[cname], bound, dims)
            tag = " (adjudicated)" if cname == adjudicated else ""
            where = f"d = {cross}" if cross is not None else "none in range"
            print(f"crossover {cname}{tag} vs {bname}: {where}", file=log)
    return EXIT_OK


# -- parser ------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="snapvar", description="SNAP-displacement gradient-variance toolkit")
    p.add_argument("--version", action="version", version=f"snapvar {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def seed_flag(sp):
        sp.add_argument("--seed", type=int, default=None, help="master seed (default $SNAPVAR_SEED or 0)")

    vm = sub.add_parser("verify-moments", help="check moment identities against oracles and sampling")
    vm.add_argument("--d", type=_int_list, default=None, help="dimensions, e.g. 2,3,4")
    vm.add_argument("--mc-samples", type=int, default=20000)
    vm.add_argument("--tuples", type=int, default=20)
    vm.add_argument("--queries", type=int, default=20)
    vm.add_argument("--tol", type=float, default=1e-12)
    vm.add_argument("--sigmas", type=float, default=4.0)
    seed_flag(vm)
    vm.set_defaults(func=cmd_verify_moments)

    vs = sub.add_parser("variance-sweep", help="Monte Carlo gradient statistics over d and T")
    vs.add_argument("--cost", choices=["state", "gate"], default="state")
    vs.add_argument("--observable", default=None, help="fock0 | number | file:<path>")
    vs.add_argument("--target", default=None, help="identity | file:<path>")
    vs.add_argument("--d-min", type=int, default=None)
    vs.add_argument("--d-max", type=int, default=None)
    vs.add_argument("--blocks", type=_int_list, default=[5])
    vs.add_argument("--k", type=int, default=3)
    vs.add_argument("--nu", type=int, default=1)
    vs.add_argument("--samples", type=int, default=10_000)
    vs.add_argument("--regime", choices=[r.value for r in experiments.Regime], default="uniform")
    vs.add_argument("--alpha-max", type=float, default=2 * math.pi)
    vs.add_argument("--threads", type=int, default=1)
    vs.add_argument("--out", default=None, help="CSV path (default stdout)")
    seed_flag(vs)
    vs.set_defaults(func=cmd_variance_sweep)

    td = sub.add_parser("two-design", help="frame potentials of the block ensembles")
    td.add_argument("--d", type=int, default=4)
    td.add_argument("--pairs", type=int, default=20000)
    td.add_argument("--nu", type=int, default=1)
    td.add_argument("--out", default=None)
    seed_flag(td)
    td.set_defaults(func=cmd_two_design)

    cq = sub.add_parser("compare-qubit-bound", help="qudit variance against 2^(-a n)")
    cq.add_argument("--a", type=_float_list, default=[0.5, 0.67])
    cq.add_argument("--observable", default="number")
    cq.add_argument("--d-min", type=int, default=None)
    cq.add_argument("--d-max", type=int, default=None)
    cq.add_argument("--adjudicate-d", type=_int_list, default=[2, 3, 4, 5, 6])
    cq.add_argument("--adjudicate-samples", type=int, default=100_000)
    cq.add_argument("--threads", type=int, default=1)
    cq.add_argument("--out", default=None)
    seed_flag(cq)
    cq.set_defaults(func=cmd_compare_qubit_bound)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, MatrixFileError, linalg.DimensionError) as exc:
        print(f"snapvar: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
