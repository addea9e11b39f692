#!/usr/bin/env python3
"""
Report viewer for cyclenf
Displays point, normal-form report and error documents in a human-friendly format
"""

import json
import sys
from pathlib import Path


def format_value(value, digits=6):
    """Format a number, an [re, im] pair or a not-computed marker"""
    if value is None:
        return 'NaN (not computed)'
    if isinstance(value, (list, tuple)) and len(value) == 2:
        re, im = value
        if im == 0:
            return f"{re:.{digits}g}"
        return f"{re:.{digits}g} {'+' if im >= 0 else '-'} {abs(im):.{digits}g}i"
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    return str(value)


def format_multiplier(pair):
    re, im = pair
    modulus = (re * re + im * im) ** 0.5
    return f"{format_value(pair)}  |mu| = {modulus:.8f}"


def show_point(point):
    orbit = point['orbit']
    print(f"📍 {point['kind']} point of {orbit['model']}")
    print("-" * 70)
    for name in point.get('free_params', []):
        print(f"  {name} = {orbit['params'][name]:.10g}")
    print(f"  Period: {orbit['period']:.10g}")
    print(f"  Mesh: {orbit['mesh']['ntst']} intervals x {orbit['mesh']['ncol']} points")
    print(f"  Frequencies: {', '.join(format_value(w) for w in point['omega'])}")
    residuals = point.get('test_residuals', [])
    if residuals:
        worst = max(abs(g) for g in residuals)
        print(f"  Test functions: {'✓' if worst < 1e-6 else '⚠️ '} max |g| = {worst:.2e}")
    print("  Multipliers:")
    for pair in point.get('multipliers', []):
        print(f"     {format_multiplier(pair)}")
    print()


def show_coefficients(report):
    print(f"🧮 Normal form to order {report['order_computed']}")
    print("-" * 70)
    for name in sorted(report['coefficients'], key=lambda n: (n.rstrip('0123456789'), n)):
        print(f"  {name:>10} = {format_value(report['coefficients'][name])}")
    border = report.get('diagnostics', {}).get('max_border_multiplier')
    if border is not None:
        print(f"  Border multipliers: {'✓' if border < 1e-8 else '⚠️ '} max {border:.2e}")
    print()


def show_quantities(quantities, verdict):
    print("📐 Unfolding")
    print("-" * 70)
    for key, value in quantities.items():
        if key in ('kind', 'order'):
            continue
        print(f"  {key:>8} = {format_value(value)}")
    print()
    if verdict is None:
        print("⚠️  No verdict")
        print()
        return
    print(f"🏷️  Verdict: {verdict['kind']} {verdict['case_label']}")
    if verdict.get('swapped'):
        print("     (theta and delta swapped)")
    for item in verdict.get('torus_inventory', []):
        print(f"     {item}")
    for note in verdict.get('notes', []):
        print(f"     Note: {note}")
    print()


def show_error(error):
    print(f"❌ {error['code']}: {error['message']}")
    for key, value in error.get('details', {}).items():
        print(f"     {key}: {value}")
    return 1


def show_report(path):
    """Display one cyclenf document"""
    if not Path(path).exists():
        print("❌ Report file not found")
        print(f"   Expected: {path}")
        return 1
    try:
        with open(path, 'r') as f:
            doc = json.load(f)
    except Exception as e:
        print(f"❌ Error reading report file: {e}")
        return 1

    print(f"Cyclenf document {path}")
    print("=" * 70)
    if not doc.get('success', True):
        return show_error(doc['error'])
    if 'point' in doc:
        show_point(doc['point'])
    elif 'orbit' in doc and 'kind' in doc:
        show_point(doc)
    if 'report' in doc:
        show_coefficients(doc['report'])
    if 'quantities' in doc:
        show_quantities(doc['quantities'], doc.get('verdict'))
    deltas = doc.get('diagnostics', {}).get('mesh_deltas')
    if deltas:
        worst = max(deltas.values())
        print(f"🔍 Mesh doubling: {'✓' if worst < 1e-5 else '⚠️ '} max relative change {worst:.2e}")
    print("=" * 70)
    return 0


def main():
    import argparse

    parser = argparse.ArgumentParser(
        description="View cyclenf point and report files",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s point.json           # Located point and multipliers
  %(prog)s report.json          # Coefficients, unfolding and verdict
        """
    )
    parser.add_argument('files', nargs='+', help='JSON documents written by cyclenf')
    args = parser.parse_args()
    return max(show_report(path) for path in args.files)


if __name__ == '__main__':
    sys.exit(main())
