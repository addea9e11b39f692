#!/usr/bin/env python3
"""
Codim-2 limit cycle bifurcation analysis
Locate LPNS / PDNS / NSNS points, compute their normal forms, classify the
unfolding and validate with Lyapunov exponent sweeps
"""

import argparse
import json
import logging
import math
import re
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from classify import amplitude_portrait, classify, unfolding_quantities, write_portrait_csv
from collocation import Mesh
from config import load_config, parse_assignments
from cycle import floquet, newton_cycle, orbit_from_simulation
from errors import CycleNFError, InvalidInput
from locator import Codim2Point, locate, verify_point
from lyapunov import LyapunovSweep, sweep, transitions, write_sweep_csv
from models import available_models, get_model
from normalform import NormalFormReport, normal_form
from oracles import monodromy_by_integration

logger = logging.getLogger('cyclenf')

SCHEMA_VERSION = 1
REFINE_MAX_DEGREE = 3
# options whose values may start with a minus sign
SIGNED_OPTIONS = ('--mu', '--grid', '--x0')
SIGNED_VALUE = re.compile(r'-\.?\d')


def plain(value):
    """JSON-ready copy: numpy to builtins, complex to [re, im], NaN to null"""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, np.generic):
        return plain(value.item())
    if isinstance(value, complex):
        return [plain(value.real), plain(value.imag)]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_document(doc, path=None):
    text = json.dumps(plain({'schema_version': SCHEMA_VERSION, **doc}), indent=2, sort_keys=True)
    if path:
        Path(path).write_text(text + '\n')
    else:
        print(text)


def read_document(path, what):
    try:
        with open(path, 'r') as f:
            return json.load(f)
    except FileNotFoundError:
        raise InvalidInput(f"{what} file not found: {path}", path=str(path)) from None
    except json.JSONDecodeError as e:
        raise InvalidInput(f"{what} file is not valid JSON: {e}", path=str(path)) from None


def status(message):
    print(message, file=sys.stderr)


def _mesh(config):
    return Mesh(config.ntst, config.ncol)


def _x0(text):
    if not text:
        return None
    try:
        return [float(v) for v in text.split(',')]
    except ValueError:
        raise InvalidInput(f"initial state must be comma separated numbers, got '{text}'") from None


def _system(config):
    if not config.model:
        raise InvalidInput("no model given (use --model or [model] name)", known=available_models())
    return get_model(config.model)


def _load_point(path):
    doc = read_document(path, 'point')
    body = doc.get('point', doc)
    try:
        system = get_model(body['orbit']['model'])
    except (KeyError, TypeError):
        raise InvalidInput("point document has no orbit model", path=str(path)) from None
    return system, Codim2Point.from_dict(body, system)


# --- commands -----------------------------------------------------------------

def cmd_cycle(config, args):
    system = _system(config)
    params = system.param_vector(config.params)
    x0 = _x0(args.x0) or system.meta.get('initial_state')
    orbit = orbit_from_simulation(system, params, x0, mesh=_mesh(config))
    status(f"✓ Cycle of {system.name}: period {orbit.period:.10g}, residual {orbit.converged_residual:.2e}")
    return {'success': True, 'error': None, 'orbit': orbit.to_dict(system)}


def cmd_floquet(config, args):
    if args.point:
        system, point = _load_point(args.point)
        orbit = point.orbit
    else:
        system = _system(config)
        params = system.param_vector(config.params)
        x0 = _x0(args.x0) or system.meta.get('initial_state')
        orbit = orbit_from_simulation(system, params, x0, mesh=_mesh(config))
    spectrum = floquet(system, orbit, config.criticality_tol)
    doc = {'success': True, 'error': None, 'model': system.name, 'period': orbit.period,
           'spectrum': spectrum.to_dict()}
    if args.oracle:
        mu = np.linalg.eigvals(monodromy_by_integration(system, orbit))
        ours = spectrum.multipliers
        deviation = max(float(np.min(np.abs(mu - m))) / max(1.0, abs(m)) for m in ours)
        doc['oracle'] = {'multipliers': mu.tolist(), 'max_relative_deviation': deviation}
        status(f"{'✓' if deviation < 1e-5 else '⚠️ '} variational-equation multipliers agree to {deviation:.2e}")
    status(f"✓ {len(spectrum.multipliers)} multipliers, {len(spectrum.critical)} on the unit circle")
    return doc


def cmd_locate(config, args):
    system = _system(config)
    at = parse_assignments(args.at)
    point = locate(system, args.kind, at, params=config.params, x0=_x0(args.x0), mesh=_mesh(config),
                   tol=config.locator_tol, maxit=config.locator_maxit, newton_tol=config.newton_tol,
                   progress=not args.quiet)
    located = {name: float(point.orbit.params[system.param_names.index(name)]) for name in at}
    status(f"✓ {point.kind} point of {system.name} at {located} after {point.iterations} iterations")
    return {'success': True, 'error': None, 'model': system.name, 'point': point.to_dict(system)}


def _mesh_deltas(system, point, report, config):
    """Change of the order <= 3 coefficients on the doubled mesh, relative above unit size"""
    orbit = newton_cycle(system, point.orbit.params, point.orbit, mesh=point.orbit.mesh.refined(),
                         tol=config.newton_tol, maxit=config.newton_maxit)
    fine = replace(point, orbit=orbit)
    order = min(REFINE_MAX_DEGREE, report.order_computed)
    fine_report, _, _ = normal_form(system, fine, order=order, kernel_ratio=config.kernel_ratio,
                                    condition_limit=config.condition_limit, border_tol=config.border_tol)
    deltas = {}
    for name, value in fine_report.coefficients.items():
        if name in report.coefficients:
            deltas[name] = abs(value - report.coefficients[name]) / max(abs(report.coefficients[name]), 1.0)
    return deltas


def _verdict(quantities):
    try:
        return classify(quantities).to_dict(), None
    except CycleNFError as e:
        logger.warning("no verdict: %s", e.message)
        return None, e.to_dict()


def cmd_nf(config, args):
    system, point = _load_point(args.point)
    residuals = verify_point(system, point, config.criticality_tol)
    status(f"✓ {point.kind} criticality verified: {np.max(np.abs(residuals)):.2e}")
    report, bundle, terms = normal_form(system, point, order=config.order, kernel_ratio=config.kernel_ratio,
                                        condition_limit=config.condition_limit, border_tol=config.border_tol)
    quantities = unfolding_quantities(report)
    verdict, verdict_error = _verdict(quantities)
    diagnostics = {
        'criticality_residuals': residuals,
        'max_border_multiplier': report.diagnostics.get('max_border_multiplier'),
        'verdict_error': verdict_error,
    }
    if args.refine:
        diagnostics['mesh_deltas'] = _mesh_deltas(system, point, report, config)
    status(f"✓ {report.kind} normal form to order {report.order_computed}: {quantities.output_tuple()}")
    if verdict:
        status(f"✓ Verdict: {verdict['case_label']}")
    else:
        status(f"⚠️  No verdict: {verdict_error['message']}")
    return {'success': True, 'error': None, 'model': system.name, 'point': point.to_dict(system),
            'report': report.to_dict(), 'quantities': quantities.to_dict(), 'verdict': verdict,
            'diagnostics': diagnostics}


def _load_report(path):
    doc = read_document(path, 'report')
    return NormalFormReport.from_dict(doc.get('report', doc))


def cmd_classify(config, args):
    report = _load_report(args.report)
    quantities = unfolding_quantities(report)
    verdict = classify(quantities)
    status(f"✓ {report.kind} {verdict.case_label}")
    return {'success': True, 'error': None, 'quantities': quantities.to_dict(), 'verdict': verdict.to_dict()}


def _grid(text):
    try:
        axes = []
        for part in text.split(','):
            lo, hi, n = part.split(':')
            axes.append(np.linspace(float(lo), float(hi), int(n)))
    except ValueError:
        raise InvalidInput(f"grid must read lo:hi:n,lo:hi:n, got '{text}'") from None
    if len(axes) != 2:
        raise InvalidInput("grid needs two axes", grid=text)
    return [(float(a), float(b)) for a in axes[0] for b in axes[1]]


def cmd_amplitude(config, args):
    report = _load_report(args.report)
    quantities = unfolding_quantities(report)
    if args.grid:
        rows = amplitude_portrait(quantities, None, None, grid=_grid(args.grid))
    else:
        mu = [float(v) for v in args.mu.split(',')]
        if len(mu) != 2:
            raise InvalidInput("--mu needs two values", mu=args.mu)
        rows = amplitude_portrait(quantities, *mu)
    output = config.output or 'portrait.csv'
    write_portrait_csv(rows, output, with_params=bool(args.grid))
    status(f"✓ {len(rows)} equilibria written to {output}")
    return None


def cmd_lyapunov(config, args):
    system = _system(config)
    params = {**config.params, **parse_assignments(args.fix)}
    spec = LyapunovSweep.parse(system.name, params, args.sweep, direction=args.direction, x0=_x0(args.x0),
                               t_transient=config.t_transient, t_total=config.t_total,
                               renorm_dt=config.renorm_dt, step=config.step,
                               zero_threshold=config.zero_threshold, follow=not args.independent,
                               workers=args.workers)
    samples = sweep(system, spec, progress=not args.quiet)
    output = config.output or 'sweep.csv'
    write_sweep_csv(samples, output, spec.name)
    found = transitions(samples)
    if args.transitions:
        write_document({'success': True, 'error': None, 'model': system.name, 'parameter': spec.name,
                        'direction': spec.direction, 'transitions': found}, args.transitions)
    status(f"✓ {len(samples)} spectra written to {output}, {len(found)} zero-count transitions")
    for t in found:
        status(f"   {spec.name} ≈ {t['param']:.6g}: {t['from']} → {t['to']} zero exponents")
    return None


COMMANDS = {
    'cycle': cmd_cycle,
    'floquet': cmd_floquet,
    'locate': cmd_locate,
    'nf': cmd_nf,
    'classify': cmd_classify,
    'amplitude': cmd_amplitude,
    'lyapunov': cmd_lyapunov,
}


def build_parser():
    parser = argparse.ArgumentParser(
        description="Normal forms of codim-2 bifurcations of limit cycles",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s locate --model laser --kind lpns --at Omega_p=3.411,Delta_cav=-1.819 -o point.json
  %(prog)s nf point.json --order high -o report.json
  %(prog)s classify report.json
  %(prog)s amplitude report.json --mu -0.01,-0.02 -o portrait.csv
  %(prog)s lyapunov --model preypredator --fix b2=0.261 --sweep eps:0.45:0.6:31 -o sweep.csv
  %(prog)s floquet --model hopfcircle --oracle
        """
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='INI-style config file with [model] [mesh] [tol] [run] [lyapunov]')
    common.add_argument('--model', help=f'Model name ({", ".join(available_models())})')
    common.add_argument('--set', action='append', default=[], metavar='NAME=VALUE[,...]',
                        help='Parameter overrides (repeatable)')
    common.add_argument('--ntst', type=int, help='Mesh intervals (default: 40)')
    common.add_argument('--ncol', type=int, help='Collocation points per interval (default: 4)')
    common.add_argument('-o', '--output', help='Output file (default: stdout for JSON)')
    common.add_argument('-v', '--verbose', action='store_true', help='Debug logging')
    common.add_argument('-q', '--quiet', action='store_true', help='Warnings only, no progress bars')

    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('cycle', parents=[common], help='Converge a periodic orbit from simulation')
    p.add_argument('--x0', help='Initial state, comma separated (default: model initial state)')

    p = sub.add_parser('floquet', parents=[common], help='Floquet multipliers of a cycle')
    p.add_argument('--x0', help='Initial state, comma separated (default: model initial state)')
    p.add_argument('--point', help='Take the cycle from a point file instead')
    p.add_argument('--oracle', action='store_true', help='Compare with variational-equation integration')

    p = sub.add_parser('locate', parents=[common], help='Locate a codim-2 point')
    p.add_argument('--kind', required=True, choices=['lpns', 'pdns', 'nsns', 'LPNS', 'PDNS', 'NSNS'])
    p.add_argument('--at', required=True, metavar='P1=V1,P2=V2', help='The two free parameters and start values')
    p.add_argument('--x0', help='Initial state for the seeding simulation')

    p = sub.add_parser('nf', parents=[common], help='Normal form coefficients of a located point')
    p.add_argument('point', help='Point file written by locate')
    p.add_argument('--order', choices=['low', 'high'], help='low: 2 (LPNS) / 3; high: 3 (LPNS) / 5 (default: low)')
    p.add_argument('--refine', action='store_true', help='Report coefficient changes on a doubled mesh')

    p = sub.add_parser('classify', parents=[common], help='Classify a normal-form report')
    p.add_argument('report', help='Report file written by nf')

    p = sub.add_parser('amplitude', parents=[common], help='Equilibria of the amplitude system as CSV')
    p.add_argument('report', help='Report file written by nf')
    p.add_argument('--mu', default='-0.01,-0.01', help='Unfolding parameters mu1,mu2 (default: -0.01,-0.01)')
    p.add_argument('--grid', metavar='LO:HI:N,LO:HI:N', help='Grid of unfolding parameters')

    p = sub.add_parser('lyapunov', parents=[common], help='Lyapunov spectra along a parameter sweep')
    p.add_argument('--fix', metavar='NAME=VALUE[,...]', help='Fixed parameter values')
    p.add_argument('--sweep', required=True, metavar='NAME:LO:HI:N', help='Swept parameter and grid')
    p.add_argument('--direction', choices=['up', 'down'], default='up', help='Sweep direction (default: up)')
    p.add_argument('--independent', action='store_true',
                   help='Start every sample from x0 instead of following the attractor')
    p.add_argument('--workers', type=int, default=1, help='Worker processes for independent samples (default: 1)')
    p.add_argument('--x0', help='Initial state (default: model initial state)')
    p.add_argument('--transitions', help='Also write detected zero-count transitions to this JSON file')
    return parser


def setup_logging(verbose=False, quiet=False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s',
                        stream=sys.stderr)


def attach_signed_values(argv):
    """Rewrite '--mu -0.01,-0.02' as '--mu=-0.01,-0.02' so argparse does not read the value as a flag"""
    out, i = [], 0
    while i < len(argv):
        if argv[i] in SIGNED_OPTIONS and i + 1 < len(argv) and SIGNED_VALUE.match(argv[i + 1]):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(attach_signed_values(sys.argv[1:] if argv is None else list(argv)))
    setup_logging(args.verbose, args.quiet)

    try:
        params = {}
        for item in args.set:
            params.update(parse_assignments(item))
        config = load_config(args.config, model=args.model, params=params, ntst=args.ntst, ncol=args.ncol,
                             order=getattr(args, 'order', None), output=args.output)
        doc = COMMANDS[args.command](config, args)
    except CycleNFError as e:
        status(f"✗ {type(e).__name__}: {e.message}")
        write_document({'success': False, 'error': e.to_dict()}, args.output if args.command in
                       ('cycle', 'floquet', 'locate', 'nf', 'classify') else None)
        return 2 if isinstance(e, InvalidInput) else 1

    if doc is not None:
        write_document(doc, config.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
