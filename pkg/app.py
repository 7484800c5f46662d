"""
Command-line front end.

    python app.py g --t 0.5,1,2
    python app.py locate-zeros 100 --out zeros.txt
    python app.py verify all --zeros zeros_2000.txt --threads 4
    python app.py verify eq302          (equation-style aliases are accepted)
    python app.py sample 1.0 --z 0:50:201 --format csv --out s1.csv

CSV columns
    g:      t, g, g_prime, minus_2g            (g_prime empty at jump points)
    sample: z, re, im, abs, excluded           (excluded rows carry no value)
    verify: check, passed, then check-specific columns

Exit codes: 0 success, 1 a verification failed, 2 usage or configuration
error, 3 file I/O error.
"""
import argparse
import json
import logging
import os
import sys
import warnings

import numpy as np

from config import Config, RunConfig
from utils.errors import (
    ConfigError,
    ExclusionZoneError,
    JumpPointError,
    ScrewLineError,
    TruncatedTableWarning,
    ZeroTableParseError,
)
from utils.file_handler import FileHandler, convert_to_serializable, frame_from_rows, report_stamp
from utils.screwfn import DEFAULT_T_MAX, ScrewContext
from utils.screwline import EXCLUSION_RADIUS, ScrewLineContext, nearest_zero_distance
from utils.verifiers import CHECK_ALIASES, CHECK_NAMES, AcceptanceSuite, resolve_check
from utils.zeros import g_tail_bound, load_zeros, locate_zeros

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


def parse_float_list(text):
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def parse_grid(text):
    """'a:b:n' for n evenly spaced points, otherwise a comma-separated list."""
    if ':' in text:
        try:
            start, stop, count = text.split(':')
            return list(np.linspace(float(start), float(stop), int(count)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected start:stop:count, got {text!r}") from None
    return parse_float_list(text)


def add_common_options(parser, defaults=True):
    """Options accepted before or after the subcommand.

    The subcommand copies are registered with SUPPRESS so they only
    override the top-level value when given.
    """
    def default(value):
        return value if defaults else argparse.SUPPRESS

    parser.add_argument('--zeros', default=default(Config.ZEROS_PATH),
                        help='zero-table file (default: $SCREWLINE_ZEROS or the bundled 100 zeros)')
    parser.add_argument('--t', type=parse_float_list, default=default(None), help='comma-separated t values')
    parser.add_argument('--radius', type=float, default=default(Config.QUAD_RADIUS), help='quadrature radius T')
    parser.add_argument('--tol', type=float, default=default(Config.REL_TOL), help='relative quadrature tolerance')
    parser.add_argument('--threads', type=int, default=default(Config.THREADS))
    parser.add_argument('--seed', type=int, default=default(Config.SEED))
    parser.add_argument('--format', choices=Config.OUTPUT_FORMATS, default=default('table'))
    parser.add_argument('--out', default=default(None), help='output file (default: stdout)')
    parser.add_argument('--verbose', action='store_true', default=default(False))


def parse_check(text):
    if text == 'all':
        return text
    try:
        return resolve_check(text)
    except ConfigError as e:
        raise argparse.ArgumentTypeError(
            f"{e}; choose from {', '.join((*CHECK_NAMES, *CHECK_ALIASES, 'all'))}") from None


def build_parser():
    parser = argparse.ArgumentParser(
        prog='screwline',
        description='Screw function g, the screw line S_t and the explicit-formula identities.',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    add_common_options(parser)
    common = argparse.ArgumentParser(add_help=False)
    add_common_options(common, defaults=False)

    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('g', parents=[common], help='g(t), g\'(t) and -2g(t)')
    locate = sub.add_parser('locate-zeros', parents=[common], help='write a zero table up to a height')
    locate.add_argument('t_max', type=float)
    verify = sub.add_parser('verify', parents=[common], help='run acceptance checks')
    verify.add_argument('which', type=parse_check,
                        metavar='{all,' + ','.join(CHECK_NAMES) + '}')
    sample = sub.add_parser('sample', parents=[common], help='S_t(z) on a grid of real z')
    sample.add_argument('t_value', type=float)
    sample.add_argument('--z', dest='z_grid', type=parse_grid, default=parse_grid('0:50:101'))
    return parser


def run_config_from_args(args):
    config = RunConfig(
        zeros_path=args.zeros,
        t_values=args.t if args.t is not None else list(Config.DEFAULT_T_VALUES),
        quad_radius=args.radius,
        rel_tol=args.tol,
        threads=args.threads,
        output_format=args.format,
        seed=args.seed,
    )
    return config.validate()


def load_table(config):
    table = load_zeros(config.zeros_path)
    if table.source == 'embedded':
        warnings.warn(
            f"using the bundled {len(table)} zeros; zero sums carry tail bounds up to "
            f"{g_tail_bound(table):.2e} per g value",
            TruncatedTableWarning,
        )
    return table


def screw_context_for(t_values):
    t_top = max([abs(t) for t in t_values] + [DEFAULT_T_MAX])
    return ScrewContext(t_max=t_top)


def file_handler_for(out, config):
    """Bare filenames go to the configured output folder."""
    if os.path.dirname(out):
        return FileHandler()
    Config.init_app(config)
    return FileHandler(config.output_folder)


def emit(rows, config, out, meta=None):
    """Write rows in the configured format to ``out`` (or stdout)."""
    if config.output_format == 'json':
        payload = {'schema': SCHEMA_VERSION, 'generated': report_stamp()}
        payload.update(meta or {})
        payload['rows'] = rows
        text = json.dumps(convert_to_serializable(payload), indent=2)
    else:
        df = frame_from_rows(convert_to_serializable(rows))
        text = df.to_csv(index=False) if config.output_format == 'csv' else df.to_string(index=False)
    if out:
        handler = file_handler_for(out, config)
        path = handler.resolve(out)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text if text.endswith('\n') else text + '\n')
        print(f"✓ Written to {path}")
    else:
        print(text)


def cmd_g(config, out=None):
    ctx = screw_context_for(config.t_values)
    rows = []
    for t in config.t_values:
        value = ctx.g(t)
        try:
            slope = ctx.g_prime(t)
        except JumpPointError:
            slope = None
        rows.append({'t': t, 'g': value, 'g_prime': slope, 'minus_2g': -2.0 * value})
    emit(rows, config, out)
    return EXIT_OK


def cmd_locate_zeros(t_max, out, config):
    table = locate_zeros(t_max)
    handler = file_handler_for(out or "zeros.txt", config)
    path = handler.save_zero_table(table.ordinates, out or 'zeros.txt',
                                   note=f"{len(table)} zeros located up to height {t_max:g}")
    print(f"✓ {len(table)} zeros written to {path}")
    return EXIT_OK


def cmd_verify(which, config, out=None):
    names = CHECK_NAMES if which == 'all' else (which,)
    table = load_table(config)
    ctx = ScrewLineContext(screw_context_for(config.t_values))
    suite = AcceptanceSuite(ctx, table, config.options())

    print('=' * 60)
    print(f"VERIFY {which} ({len(table)} zeros, {table.source})")
    print('=' * 60)
    reports = suite.run(names)
    for report in reports:
        mark = '✓' if report['passed'] else '✗'
        print(f"{mark} {report['check']}")
        for row in report.get('rows', []) or report.get('pairs', []):
            detail = ', '.join(f"{k}={v:.6g}" for k, v in row.items()
                               if isinstance(v, float) and k != 'passed')
            print(f"    {'ok ' if row['passed'] else 'FAIL'} {detail}")
        if 'error' in report:
            print(f"    {report['error']}")
    passed = all(r['passed'] for r in reports)
    print('=' * 60)
    print(f"{'ALL PASSED' if passed else 'FAILED'}: "
          f"{sum(r['passed'] for r in reports)}/{len(reports)} checks")
    print('=' * 60)

    if out:
        handler = file_handler_for(out, config)
        path = handler.save_report({'schema': SCHEMA_VERSION, 'generated': report_stamp(),
                                    'zeros': len(table), 'reports': reports}, out)
        print(f"✓ Report written to {path}")
    return EXIT_OK if passed else EXIT_FAIL


def cmd_sample(t, z_grid, config, out=None):
    table = load_table(config)
    ctx = ScrewLineContext(screw_context_for([t]))
    z = np.asarray(z_grid, dtype=np.float64)
    excluded = nearest_zero_distance(z, table.ordinates) < EXCLUSION_RADIUS
    values = np.full(z.size, np.nan, dtype=np.complex128)
    if np.any(~excluded):
        values[~excluded] = ctx.frak_s(t, z[~excluded], table)
    rows = []
    for zi, v, flag in zip(z, values, excluded):
        rows.append({'z': float(zi),
                     're': None if flag else float(v.real),
                     'im': None if flag else float(v.imag),
                     'abs': None if flag else float(abs(v)),
                     'excluded': bool(flag)})
    emit(rows, config, out, meta={'t': t, 'exclusion_radius': EXCLUSION_RADIUS})
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else Config.LOG_LEVEL,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        config = run_config_from_args(args)
        if args.command == 'g':
            return cmd_g(config, args.out)
        if args.command == 'locate-zeros':
            return cmd_locate_zeros(args.t_max, args.out, config)
        if args.command == 'verify':
            return cmd_verify(args.which, config, args.out)
        return cmd_sample(args.t_value, args.z_grid, config, args.out)
    except (OSError, ZeroTableParseError) as e:
        print(f"✗ I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ExclusionZoneError) as e:
        print(f"✗ {e}", file=sys.stderr)
        return EXIT_USAGE
    except ScrewLineError as e:
        print(f"✗ {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
