"""
Standalone CLI - Command line interface for local runs
Every subcommand prints one report on stdout; diagnostics and progress go to stderr
"""
import argparse
import logging
import os
import sys

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from adapters.file_adapter import resolve_set, save_windowed_set
from core import __version__
from core.config import (DEFAULT_ENUMERATION_CAP, DEFAULT_MODULI, RunConfig, default_cap_bits,
                         setup_logging)
from core.database import ReportArchive
from core.density_sets import (cover_search, delta1, delta2_g, delta3_count, find_gap_3_14,
                               gap_run_stats, intersection_density, verify_example_3_13,
                               windowed_density)
from core.dynamics import (Circle, Product, check_observable, orbit_average, parse_observable,
                           parse_system, product_recurrence, recurrence_average)
from core.equidistribution import (boshernitzan_probe, geometric_grid, norm_ergodic_probe,
                                   residue_distribution, weyl_sum)
from core.exceptions import ErgoprobeError, IndeterminateResult
from core.folner import (CLOSED_FORM, ENUMERATION, GROUP, SEMIGROUP, HeisBoxPoly, criterion_5_3,
                         folner_defect, heisenberg_quotient_count, parse_family, tempered_ratio,
                         temperedness_scan)
from core.formatters import render_csv, render_json, render_text
from core.semigroups import parse_element
from core.sequences import floor_values, parse_sequence_spec
from core.windowed import DOMAIN_N

# named explicitly so script runs share the package handler
logger = logging.getLogger("standalone.cli")

TOOL = "ergoprobe"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INDETERMINATE = 2

# RunConfig fields and flags without effect on the report; the rest goes into config.options
_RUNTIME_FLAGS = {"command", "handler", "progress", "log_level", "archive",
                  "horizon", "N", "precision_bits", "theta", "falsification", "output", "seed", "cap",
                  "save_set"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; status 2 means 'indeterminate' here"""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


# --- helpers ---

def _require(value, flag: str, command: str):
    if value is None:
        raise UsageError(f"{command} needs {flag}")
    return value


def _values(args, config: RunConfig):
    N = _require(config.N, "--N", config.command)
    spec = parse_sequence_spec(args.seq)
    return floor_values(spec, N, config.policy, progress=args.progress)


def _int_list(text: str):
    return [int(p) for p in text.split(",") if p.strip()]


def _set(args, config: RunConfig):
    return resolve_set(args.set, config.horizon)


def _save(window, path) -> None:
    if path:
        save_windowed_set(window, path)


# --- handlers ---

def cmd_weyl(args, config):
    return weyl_sum(_values(args, config), args.lam)


def cmd_residues(args, config):
    return residue_distribution(_values(args, config), args.m)


def cmd_probe(args, config):
    N = _require(config.N, "--N", config.command)
    return norm_ergodic_probe(args.seq, N, lambdas=args.lam or None, moduli=_int_list(args.moduli),
                              policy=config.policy, thresholds=config.thresholds,
                              progress=args.progress)


def cmd_bosh(args, config):
    try:
        lo, hi, points = args.grid.split(",")
        grid = geometric_grid(float(lo), float(hi), int(points))
    except ValueError as e:
        raise UsageError(f"bad --grid {args.grid!r}: {e}") from e
    return boshernitzan_probe(args.seq, args.degree, args.height, grid)


def cmd_density(args, config):
    S = _set(args, config)
    family = parse_family(args.family)
    if args.shifts:
        return intersection_density(S, _int_list(args.shifts), family, args.n_max, config.thresholds)
    return windowed_density(S, family, args.n_max, config.thresholds)


def cmd_delta(args, config):
    S = _set(args, config)
    if args.kind == 1:
        D = delta1(S)
        _save(D, args.save_set)
        return {"kind": 1, "members": len(D), "set": D}
    if args.kind == 2:
        N = _require(config.N, "--N", config.command)
        seq = _require(args.seq, "--seq", config.command)
        D = delta2_g(S, seq, N, parse_family(args.family), args.n_max, config.thresholds,
                     config.policy, progress=args.progress)
        _save(D, args.save_set)
        return {"kind": 2, "members": len(D), "set": D, "theta": config.theta}
    shift = _require(args.shift, "--shift", config.command)
    return {"kind": 3, "n": shift, "count": delta3_count(S, shift)}


def cmd_gaps(args, config):
    return gap_run_stats(_set(args, config))


def cmd_cover(args, config):
    S = _set(args, config)
    E = delta1(S) if S.domain == DOMAIN_N else S
    return cover_search(E, args.radius, args.l_max)


def cmd_example_3_13(args, config):
    horizon = _require(config.horizon, "--horizon", config.command)
    return verify_example_3_13(horizon, progress=args.progress)


def cmd_example_3_14(args, config):
    return find_gap_3_14(args.run_length, args.bound, progress=args.progress)


def cmd_defect(args, config):
    family = parse_family(args.family)
    g = parse_element(args.element)
    value = folner_defect(family, g, args.n, config.cap)
    return {"family": family.canonical(), "element": g, "n": args.n, "defect": value,
            "approx": float(value)}


def cmd_tempered(args, config):
    family = parse_family(args.family)
    g = parse_element(args.element) if args.element else None
    if args.n_max is not None:
        return temperedness_scan(family, args.n_max, args.C, args.mode, g, config.cap,
                                 progress=args.progress)
    n = _require(args.n, "--n or --n-max", config.command)
    return tempered_ratio(family, n, args.mode, g, args.method, config.cap)


def cmd_criterion_5_3(args, config):
    return criterion_5_3(args.f, args.n_max)


def cmd_heis_count(args, config):
    if bool(args.p) != bool(args.q):
        raise UsageError("heis-count needs both --p and --q")
    family = HeisBoxPoly(args.p, args.q) if args.p else None
    return heisenberg_quotient_count(args.n, config.cap, family)


def cmd_ergodic_avg(args, config):
    system = parse_system(args.system)
    obs = parse_observable(args.obs)
    check_observable(system, obs)
    x0 = args.x0.split("|") if isinstance(system, Product) else args.x0
    return orbit_average(system, x0, obs, _values(args, config), config.policy,
                         strict=not args.lenient, progress=args.progress)


def cmd_recurrence(args, config):
    system = parse_system(args.system)
    obs = parse_observable(args.obs)
    check_observable(system, obs)
    values = _values(args, config)
    if isinstance(system, Circle):
        return recurrence_average(system, obs.single_arc_length(), values)
    if isinstance(system, Product):
        return product_recurrence(list(zip(system.factors, obs)), values)
    return product_recurrence([(system, obs)], values)


# --- parser ---

def _common_flags() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument('--horizon', type=int, help='Window horizon of sets and scans')
    common.add_argument('--N', type=int, help='Number of sequence terms')
    common.add_argument('--precision-bits', type=int, default=default_cap_bits(),
                        help='Precision cap in bits (env ERGOPROBE_PRECISION_CAP)')
    common.add_argument('--theta', type=float, default=1e-3, help='Positive-density threshold')
    common.add_argument('--falsification', type=float, default=0.5,
                        help='Weyl-sum magnitude treated as a violation')
    common.add_argument('--output', choices=['json', 'csv'], default='json', help='Report format')
    common.add_argument('--seed', type=int, default=0, help='Seed echoed into the report config')
    common.add_argument('--cap', type=int, default=DEFAULT_ENUMERATION_CAP,
                        help='Enumeration cap (element products)')
    common.add_argument('--archive', help='SQLite file receiving config and report of the run')
    common.add_argument('--progress', action='store_true', help='Progress bars on stderr')
    common.add_argument('--log-level', help='Log level (env ERGOPROBE_LOG_LEVEL)')
    return common


def build_parser() -> argparse.ArgumentParser:
    formatter = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog=TOOL, description='Finite-horizon probes of ergodic sequences, '
                     'difference sets and Folner families', formatter_class=formatter)
    parser.add_argument('--version', action='version', version=f'{TOOL} {__version__}')
    common = _common_flags()
    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True

    def command(name, handler, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text, formatter_class=formatter)
        p.set_defaults(handler=handler)
        return p

    p = command('weyl', cmd_weyl, 'Weyl sum of lambda [g(n)]')
    p.add_argument('--seq', required=True, help='Sequence, e.g. pow:3/2')
    p.add_argument('--lambda', dest='lam', default='sqrt2-1', help='Frequency, e.g. sqrt2-1')

    p = command('residues', cmd_residues, 'Residue histogram of [g(n)] mod m')
    p.add_argument('--seq', required=True, help='Sequence, e.g. pow:3/2')
    p.add_argument('--m', type=int, required=True, help='Modulus')

    p = command('probe', cmd_probe, 'Norm-ergodicity probe (Weyl sums and residues)')
    p.add_argument('--seq', required=True, help='Sequence, e.g. pow:3/2')
    p.add_argument('--lambda', dest='lam', action='append',
                   help='Frequency (repeatable; default sqrt2-1, (sqrt5-1)/2, pi-3)')
    p.add_argument('--moduli', default=','.join(map(str, DEFAULT_MODULI)), help='Moduli')

    p = command('bosh', cmd_bosh, 'Divergence of (g - p)/log over rational polynomials')
    p.add_argument('--seq', required=True, help='Sequence, e.g. nlogn')
    p.add_argument('--degree', type=int, default=1, help='Polynomial degree bound')
    p.add_argument('--height', type=int, default=2, help='Coefficient height bound')
    p.add_argument('--grid', default='10,1e6,12', help='lo,hi,points of the geometric grid')

    p = command('density', cmd_density, 'Windowed density along a Folner family')
    p.add_argument('--set', required=True, help='mult:k, squares, all, members:..., file:PATH')
    p.add_argument('--family', default='interval', help='Integer Folner family')
    p.add_argument('--n-max', type=int, help='Last family index')
    p.add_argument('--shifts', help='Shifts s_i of S cap (S - s_1) cap ...')

    p = command('delta', cmd_delta, 'Difference sets Delta_1, Delta_2 along [g(n)], Delta_3 counts')
    p.add_argument('--set', required=True, help='mult:k, squares, all, members:..., file:PATH')
    p.add_argument('--kind', type=int, choices=[1, 2, 3], default=1, help='Which Delta set')
    p.add_argument('--seq', help='Sequence for kind 2')
    p.add_argument('--family', default='interval', help='Family for kind 2')
    p.add_argument('--n-max', type=int, help='Last family index for kind 2')
    p.add_argument('--shift', type=int, help='Shift n for kind 3')
    p.add_argument('--save-set', help='Write the Delta set of kind 1 or 2 to PATH (.json: run-length form)')

    p = command('gaps', cmd_gaps, 'Gap and run statistics of a set')
    p.add_argument('--set', required=True, help='mult:k, squares, all, members:..., file:PATH')

    p = command('cover', cmd_cover, 'Fewest translates of E covering [-M, M]')
    p.add_argument('--set', required=True, help='Z set, or N set whose Delta_1 is used')
    p.add_argument('--radius', type=int, required=True, help='Target radius M')
    p.add_argument('--l-max', type=int, default=8, help='Largest number of translates')

    command('example-3-13', cmd_example_3_13, 'No two consecutive n in D_g for g = 2n + 2 sqrt n')

    p = command('example-3-14', cmd_example_3_14, 'Run of non-members of D_g for g = n^(3/2)')
    p.add_argument('--run-length', type=int, required=True, help='Run length R (R+1 terms)')
    p.add_argument('--bound', type=int, default=10 ** 7, help='Largest start M searched')

    p = command('defect', cmd_defect, 'Folner defect |F_n cap gF_n| / |F_n|')
    p.add_argument('--family', required=True, help='e.g. multbox:paper, heisbox, chain:sym')
    p.add_argument('--element', required=True, help='e.g. int:5, natmul:2^3*3, heis:(1,0,2)')
    p.add_argument('--n', type=int, required=True, help='Family index')

    p = command('tempered', cmd_tempered, 'Temperedness ratio or scan')
    p.add_argument('--family', required=True, help='e.g. multbox:paper, heisbox, interval')
    p.add_argument('--n', type=int, help='Single index n >= 2')
    p.add_argument('--n-max', type=int, help='Scan n = 2..n_max')
    p.add_argument('--C', type=float, default=2.0, help='Candidate constant of the scan')
    p.add_argument('--mode', choices=[GROUP, SEMIGROUP], default=GROUP, help='Quotient form')
    p.add_argument('--element', help='Right translate g (semigroup form)')
    p.add_argument('--method', choices=[CLOSED_FORM, ENUMERATION], help='Force a method')

    p = command('criterion-5-3', cmd_criterion_5_3, 'n f(n)/f(n+1) boundedness test')
    p.add_argument('--f', required=True, help='Nondecreasing f, e.g. n^n')
    p.add_argument('--n-max', type=int, default=50, help='Last index')

    p = command('heis-count', cmd_heis_count, 'Exact |F_{n-1}^-1 F_n| for Heisenberg boxes')
    p.add_argument('--n', type=int, required=True, help='Family index n >= 2')
    p.add_argument('--p', help='Box half-width p(n) (default n)')
    p.add_argument('--q', help='Central half-width q(n) (default n^2)')

    p = command('ergodic-avg', cmd_ergodic_avg, 'Orbit average of an indicator along [g(n)]')
    p.add_argument('--system', required=True, help='circle:alpha=..., cyclic:m=..., joined by |')
    p.add_argument('--obs', required=True, help='arc:start,len or residues:..., joined by |')
    p.add_argument('--seq', required=True, help='Sequence, e.g. pow:3/2')
    p.add_argument('--x0', default='0', help='Start point (one per factor, joined by |)')
    p.add_argument('--lenient', action='store_true', help='Skip boundary-ambiguous terms')

    p = command('recurrence', cmd_recurrence, 'Recurrence average mu(A cap T^[g(n)] A)')
    p.add_argument('--system', required=True, help='circle:alpha=..., cyclic:m=..., joined by |')
    p.add_argument('--obs', required=True, help='arc:start,len or residues:..., joined by |')
    p.add_argument('--seq', required=True, help='Sequence, e.g. pow:3/2')

    return parser


def resolve_config(args) -> RunConfig:
    options = {k: v for k, v in sorted(vars(args).items()) if k not in _RUNTIME_FLAGS}
    return RunConfig(command=args.command, horizon=args.horizon, N=args.N,
                     precision_bits=args.precision_bits, theta=args.theta,
                     falsification=args.falsification, output=args.output, seed=args.seed,
                     cap=args.cap, options=options)


def _archive(path: str, config: RunConfig, text: str, code: int) -> None:
    with ReportArchive(path, __version__) as archive:
        run_id = archive.add_run(config.command, config.to_dict(), text, code)
    logger.info("Archived run %s in %s", run_id, path)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    setup_logging()
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_ERROR

    try:
        args = parser.parse_args(argv)
        setup_logging(args.log_level)
        config = resolve_config(args)
    except UsageError as e:
        logger.error("%s", e)
        return EXIT_ERROR
    except ValueError as e:
        logger.error("Invalid arguments: %s", e)
        return EXIT_ERROR

    try:
        report = args.handler(args, config)
        if config.output == "csv":
            text = render_csv(report)
        else:
            text = render_json(TOOL, __version__, config.to_dict(), report)
    except IndeterminateResult as e:
        logger.error("Indeterminate: %s", e)
        return EXIT_INDETERMINATE
    except (UsageError, ErgoprobeError, ValueError, TypeError) as e:
        logger.error("%s", e)
        return EXIT_ERROR
    except Exception as e:
        logger.exception("Internal error: %s", e)
        return EXIT_ERROR

    sys.stdout.write(text)
    sys.stdout.flush()
    logger.info("%s done\n%s", config.command, render_text(report))
    if args.archive:
        _archive(args.archive, config, text, EXIT_OK)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
