"""Command-line front end; one subcommand per reproducible artifact.

Sweep flags take inclusive ranges ``start:stop:step`` (``0:4:0.5``).
CSV artifacts use ',' as separator, '.' as decimal mark and '#'-prefixed
header lines carrying the tool version and the full configuration, so
re-running a command reproduces its artifact byte for byte.  Grid sweeps
honor ``--jobs`` (default from RAINBOW_LAB_JOBS) with order-independent
assembly.

Exit codes: 0 success, 2 usage or domain error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .continuum import analytic_wavefunction, validity_map
from .entanglement import (
    EntropyCurve,
    EntropyPoint,
    block_correlation,
    boundary_blocks,
    brute_force_block_entropy,
    correlation_matrix,
    entanglement_spectrum,
    entropy_scan,
    ground_state_correlation,
    renyi_entropies,
    vn_entropy,
)
from .lattice import (
    build_lattice_2d,
    build_rainbow_profile,
    hopping_matrix_1d,
    hopping_matrix_2d,
    profile_from_z,
)
from .qubism import render, slater_amplitudes, write_ppm
from .sdrg import bond_state_orbitals, rainbow_bonds, render_arcs, sdrg_entropy, sdrg_run
from .spectra import (
    NumericsError,
    diagonalize,
    fermi_velocity,
    fermi_velocity_fit,
    occupied_orbitals,
    save_orbitals,
    site_occupations,
    spectrum_rows,
)

_FLOAT_FMT = ".12g"


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, _FLOAT_FMT)
    return str(x)


def parse_range(text: str, integer: bool = False) -> list:
    """Inclusive start:stop:step range, or a single value."""
    parts = text.split(":")
    conv = int if integer else float
    if len(parts) == 1:
        return [conv(parts[0])]
    if len(parts) != 3:
        raise ValueError(f"range must be start:stop:step, got {text!r}")
    start, stop, step = (float(p) for p in parts)
    if step <= 0:
        raise ValueError(f"range step must be positive, got {step}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    vals = [start + i * step for i in range(n)]
    if integer:
        out = [int(round(v)) for v in vals]
        if any(abs(v - o) > 1e-9 for v, o in zip(vals, out)):
            raise ValueError(f"non-integer value in integer range {text!r}")
        return out
    return vals


def _profile_for(L: int, args) -> object:
    given = [name for name in ("alpha", "h", "z") if getattr(args, name) is not None]
    if len(given) != 1:
        raise ValueError("give exactly one of --alpha, --h, --z")
    name = given[0]
    value = getattr(args, name)
    if isinstance(value, list):
        raise ValueError(f"--{name} must be a single value for this command")
    if name == "alpha":
        return build_rainbow_profile(L, value)
    if name == "h":
        return profile_from_z(L, value * L)
    return profile_from_z(L, value)


def _geometry_values(args) -> tuple:
    """(flag name, list of its values) for whichever geometry flag was given."""
    given = [name for name in ("alpha", "h", "z") if getattr(args, name) is not None]
    if len(given) != 1:
        raise ValueError("give exactly one of --alpha, --h, --z")
    return given[0], getattr(args, given[0])


def _mapper(jobs: int):
    if jobs <= 1:
        return map, None
    pool = ThreadPoolExecutor(max_workers=jobs)
    return pool.map, pool


def _provenance(args) -> dict:
    config = {
        k: v for k, v in sorted(vars(args).items())
        if k not in ("func",) and v is not None
    }
    return {"tool": "rainbow-lab", "version": __version__, "config": config}


def _csv_header(args, columns) -> list:
    prov = _provenance(args)
    return [
        f"# rainbow-lab {__version__}",
        f"# command: {prov['config'].get('command')}",
        f"# config: {json.dumps(prov['config'], default=str)}",
        f"# columns: {','.join(columns)}",
    ]


def _write_csv(path, header_lines, rows) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for line in header_lines:
            fh.write(line + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _write_json(path, args, payload) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump({"provenance": _provenance(args), "data": payload}, fh, indent=1)
        fh.write("\n")


# ----------------------------------------------------------------- commands

def cmd_spectrum(args) -> int:
    profile = _profile_for(args.L, args)
    spec = diagonalize(hopping_matrix_1d(profile))
    rows = list(spectrum_rows(spec))
    _write_csv(args.out, _csv_header(args, ("m", "energy")), rows)
    if args.orbitals:
        save_orbitals(spec, args.orbitals)
    return 0


def cmd_wavefunction(args) -> int:
    profile = _profile_for(args.L, args)
    spec = diagonalize(hopping_matrix_1d(profile))
    m = args.m
    exact = spec.orbitals[:, args.L + m]
    ana = analytic_wavefunction(m, profile.h, args.L).components
    if exact @ ana < 0:  # global eigenvector sign is arbitrary; align for plots
        exact = -exact
    labels = profile.labels()
    rows = [(labels[i], float(exact[i]), float(ana[i])) for i in range(2 * args.L)]
    header = _csv_header(args, ("site", "exact", "analytic"))
    header.insert(-1, f"# overlap: {abs(np.dot(exact, ana)):.12g}")
    _write_csv(args.out, header, rows)
    return 0


def cmd_velocity_scan(args) -> int:
    L = args.L

    def one(z):
        spec = diagonalize(hopping_matrix_1d(profile_from_z(L, z)))
        est = fermi_velocity(spec, L, z)
        fit = fermi_velocity_fit(spec, L, z)
        return (z, est.a_numeric, fit.a_numeric, est.a_analytic)

    run, pool = _mapper(args.jobs)
    try:
        rows = list(run(one, args.z))
    finally:
        if pool:
            pool.shutdown()
    _write_csv(
        args.out,
        _csv_header(args, ("z", "a_numeric", "a_fit4", "a_analytic")),
        rows,
    )
    return 0


def cmd_validity_map(args) -> int:
    run, pool = _mapper(args.jobs)
    try:
        vm = validity_map(args.L, args.z, executor_map=run)
    finally:
        if pool:
            pool.shutdown()
    rows = [
        (L, z, float(vm.overlaps[i, j]))
        for i, L in enumerate(vm.L_values)
        for j, z in enumerate(vm.z_values)
    ]
    _write_csv(args.out, _csv_header(args, ("L", "z", "overlap")), rows)
    contour_path = args.contour_out or _derived_path(args.out, "_contours")
    _write_csv(
        contour_path,
        _csv_header(args, ("L", "z_at_0.90", "z_at_0.95")),
        vm.contours,
    )
    return 0


def _derived_path(path: str, suffix: str, ext: str | None = None) -> str:
    stem, own = os.path.splitext(path)
    return stem + suffix + (ext or own or ".csv")


def cmd_entropy_scan(args) -> int:
    name, values = _geometry_values(args)
    orders = args.orders

    if args.blocks == "boundary":
        if len(args.L) != 1 or len(values) != 1:
            raise ValueError("boundary scans need a single geometry")

    def one(point):
        L, value = point
        z = {"alpha": lambda v: -2 * math.log(v) * L, "h": lambda v: v * L,
             "z": lambda v: v}[name](value)
        profile = profile_from_z(L, z)
        curve = entropy_scan(profile, args.blocks, orders)
        return [
            (L, profile.alpha, profile.h, profile.z, p.size, p.order, p.value)
            for p in curve.points
        ]

    points = [(L, v) for L in args.L for v in values]
    run, pool = _mapper(args.jobs)
    try:
        chunks = list(run(one, points))
    finally:
        if pool:
            pool.shutdown()
    rows = [row for chunk in chunks for row in chunk]
    header = _csv_header(args, ("L", "alpha", "h", "z", "block", "n", "S"))
    if len(points) == 1:
        L, value = points[0]
        z = {"alpha": lambda v: -2 * math.log(v) * L, "h": lambda v: v * L,
             "z": lambda v: v}[name](value)
        header.insert(-1, f"# profile: {profile_from_z(L, z).to_json()}")
    _write_csv(args.out, header, rows)
    return 0


def cmd_renyi_fit(args) -> int:
    from .fitting import fit_renyi_halfchain

    sizes = args.L
    if len(sizes) < 6:
        raise ValueError("need at least 6 sizes for the three-parameter fit")
    if len({L % 2 for L in sizes}) < 2:
        raise ValueError("sizes must mix even and odd L for the oscillation term")
    orders = args.orders

    def nu_for(point):
        L, z = point
        spec = diagonalize(hopping_matrix_1d(profile_from_z(L, z)))
        occ = occupied_orbitals(spec)
        return correlation_matrix(occ, range(L))

    points = [(L, z) for L in sizes for z in args.z]
    run, pool = _mapper(args.jobs)
    try:
        mats = dict(zip(points, run(nu_for, points)))
    finally:
        if pool:
            pool.shutdown()

    rows = []
    fits = []
    for z in args.z:
        for n in orders:
            curve = EntropyCurve(
                points=[renyi_entropies(mats[(L, z)], [n])[0] for L in sizes]
            )
            fit = fit_renyi_halfchain(curve, n=n, z=z)
            fits.append({"n": n, "z": z, **fit.coefficients,
                         "chi2": fit.chi2, "condition": fit.condition})
            rows.append((n, z, fit["c_n"], fit["d_n"], fit["f_n"],
                         fit.chi2, fit.condition))
    if args.format == "json":
        _write_json(args.out, args, fits)
    else:
        _write_csv(
            args.out,
            _csv_header(args, ("n", "z", "c_n", "d_n", "f_n", "chi2", "condition")),
            rows,
        )
    return 0


def cmd_es_collapse(args) -> int:
    def one(point):
        L, z = point
        spec = diagonalize(hopping_matrix_1d(profile_from_z(L, z)))
        occ = occupied_orbitals(spec)
        es = entanglement_spectrum(correlation_matrix(occ, range(L)))
        eps = es.finite_eps()
        neg = np.sort(eps[eps < 0])[::-1][: args.levels]  # closest to 0 first
        pos = np.sort(eps[eps > 0])[: args.levels]
        out = []
        for k, e in enumerate(neg):
            out.append((L, z, -(k + 0.5), float(e)))
        for k, e in enumerate(pos):
            out.append((L, z, k + 0.5, float(e)))
        return [
            (L, z, p, 1.0 / (1.0 + math.exp(e)), e, e * z / (2 * math.pi**2))
            for (L, z, p, e) in sorted(out, key=lambda r: r[2])
        ]

    points = [(L, z) for L in args.L for z in args.z]
    run, pool = _mapper(args.jobs)
    try:
        chunks = list(run(one, points))
    finally:
        if pool:
            pool.shutdown()
    rows = [row for chunk in chunks for row in chunk]
    _write_csv(
        args.out,
        _csv_header(args, ("L", "z", "p", "nu", "eps", "eps_scaled")),
        rows,
    )
    return 0


def cmd_sdrg(args) -> int:
    if args.couplings:
        couplings = [float(t) for t in args.couplings.split(",")]
        bonds = sdrg_run(couplings)
    else:
        if args.L is None or args.alpha is None:
            raise ValueError("need --couplings, or --L with --alpha")
        bonds = sdrg_run(build_rainbow_profile(args.L, args.alpha))
    if args.arcs:
        print(render_arcs(bonds))
    with open(args.out, "w", encoding="ascii") as fh:
        payload = json.loads(bonds.to_json())
        json.dump({"provenance": _provenance(args), **payload}, fh, indent=1)
        fh.write("\n")
    return 0


def cmd_entropy_2d(args) -> int:
    from .fitting import fit_2d

    def one(point):
        alpha, L = point
        lat = build_lattice_2d(L, alpha)
        spec = diagonalize(hopping_matrix_2d(lat))
        c_full = ground_state_correlation(spec, zero_modes="half")
        S = vn_entropy(block_correlation(c_full, lat.left_half()))
        return (alpha, L, S, S / L)

    points = [(alpha, L) for alpha in args.alpha for L in args.L]
    run, pool = _mapper(args.jobs)
    try:
        rows = list(run(one, points))
    finally:
        if pool:
            pool.shutdown()
    _write_csv(
        args.out,
        _csv_header(args, ("alpha", "L", "S", "s_per_L")),
        rows,
    )
    fits = []
    for alpha in args.alpha:
        curve = EntropyCurve(
            points=[EntropyPoint(L, 1, S / L) for (a, L, S, _) in rows if a == alpha]
        )
        fit = fit_2d(curve)
        fits.append({
            "alpha": alpha, **fit.coefficients, "chi2": fit.chi2,
            # same data normalized per full side in log2 units
            "A_bits_per_side": fit["A"] / (4 * math.log(2.0)),
        })
    fit_path = args.fit_out or _derived_path(args.out, "_fits", ext=".json")
    _write_json(fit_path, args, fits)
    return 0


def cmd_qubism(args) -> int:
    n = args.sites
    if n % 2:
        raise ValueError(f"qubism needs an even site count, got {n}")
    profile = build_rainbow_profile(n // 2, args.alpha)
    spec = diagonalize(hopping_matrix_1d(profile))
    amps = slater_amplitudes(occupied_orbitals(spec), n)
    img = render(amps)
    write_ppm(img, args.out)
    # PPM headers are pinned byte for byte, so provenance rides sidecar
    with open(args.out + ".provenance.json", "w", encoding="ascii") as fh:
        json.dump(_provenance(args), fh, indent=1)
        fh.write("\n")
    if args.amplitudes:
        _write_csv(
            args.amplitudes,
            _csv_header(args, ("bitstring", "amplitude")),
            amps.rows(),
        )
    return 0


def cmd_validate(args) -> int:
    failures = 0

    def check(label: str, ok: bool) -> None:
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {label}")
        if not ok:
            failures += 1

    # oracle equivalence: correlation-matrix vs brute-force entropies
    orders = [1, 2, 3, 4]
    for twoL in (4, 6, 8):
        for alpha in (0.01, 0.3, 1.0):
            profile = build_rainbow_profile(twoL // 2, alpha)
            spec = diagonalize(hopping_matrix_1d(profile))
            occ = occupied_orbitals(spec)
            amps = slater_amplitudes(occ, twoL)
            worst = 0.0
            for block in boundary_blocks(twoL):
                a = renyi_entropies(correlation_matrix(occ, block), orders)
                b = brute_force_block_entropy(amps, block, orders)
                worst = max(worst, max(abs(x.value - y.value) for x, y in zip(a, b)))
            check(f"oracle equivalence 2L={twoL} alpha={alpha} (dev {worst:.2e})",
                  worst <= 1e-10)

    # occupations at half filling
    for (L, alpha) in ((10, 0.6), (25, 0.9)):
        spec = diagonalize(hopping_matrix_1d(build_rainbow_profile(L, alpha)))
        occs = site_occupations(occupied_orbitals(spec))
        dev = float(np.max(np.abs(occs - 0.5)))
        check(f"site occupations 1/2 L={L} alpha={alpha} (dev {dev:.2e})", dev <= 1e-10)

    # SDRG against the analytic rainbow matching
    for L in (3, 5, 8):
        got = sdrg_run(build_rainbow_profile(L, 0.05))
        want = rainbow_bonds(L)
        check(f"sdrg matches rainbow matching L={L}", got.bonds == want.bonds)

    # bond-state entropies count crossing bonds
    bonds = rainbow_bonds(6)
    occ = bond_state_orbitals(bonds)
    dev = abs(vn_entropy(correlation_matrix(occ, range(6))) - 6 * math.log(2))
    check(f"bond-state half-chain entropy 6 ln 2 (dev {dev:.2e})", dev <= 1e-10)
    check("sdrg entropy equals bond crossings",
          abs(sdrg_entropy(bonds, range(6)) - 6 * math.log(2)) == 0.0)

    # pure-state complement symmetry
    profile = build_rainbow_profile(6, 0.4)
    spec = diagonalize(hopping_matrix_1d(profile))
    occ = occupied_orbitals(spec)
    worst = 0.0
    for l in range(1, 12):
        a = vn_entropy(correlation_matrix(occ, range(l)))
        b = vn_entropy(correlation_matrix(occ, range(l, 12)))
        worst = max(worst, abs(a - b))
    check(f"complement symmetry 2L=12 (dev {worst:.2e})", worst <= 1e-8)

    print(f"{failures} failure(s)")
    return 3 if failures else 0


# -------------------------------------------------------------------- parser

def _add_geometry(p, sweep_z=False):
    p.add_argument("--alpha", type=float, help="decay parameter in (0, 1]")
    p.add_argument("--h", type=float, help="decay rate h = -2 ln(alpha)")
    if sweep_z:
        p.add_argument("--z", type=lambda t: parse_range(t), help="z value or range start:stop:step")
    else:
        p.add_argument("--z", type=float, help="deformation z = h L")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rainbow-lab",
        description="rainbow free-fermion chains: spectra, entanglement, fits",
    )
    ap.add_argument("--version", action="version", version=f"rainbow-lab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def new(name, helptext, func):
        p = sub.add_parser(name, help=helptext)
        p.set_defaults(func=func)
        p.add_argument(
            "--jobs",
            type=int,
            default=int(os.environ.get("RAINBOW_LAB_JOBS", "1")),
            help="worker threads for sweeps (default RAINBOW_LAB_JOBS or 1)",
        )
        return p

    p = new("spectrum", "single-particle levels of one chain", cmd_spectrum)
    p.add_argument("--L", type=int, required=True)
    _add_geometry(p)
    p.add_argument("--out", required=True)
    p.add_argument("--orbitals", help="optional binary orbital dump path")
    p.add_argument("--format", choices=["csv"], default="csv")

    p = new("wavefunction", "exact vs analytic wavefunction of one level", cmd_wavefunction)
    p.add_argument("--L", type=int, required=True)
    _add_geometry(p)
    p.add_argument("--m", type=int, default=0, help="level index from the Fermi point")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv"], default="csv")

    p = new("velocity-scan", "Fermi velocity a(z) vs the closed form", cmd_velocity_scan)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--z", type=lambda t: parse_range(t), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv"], default="csv")

    p = new("validity-map", "many-body overlap of the continuum state", cmd_validity_map)
    p.add_argument("--L", type=lambda t: parse_range(t, integer=True), required=True)
    p.add_argument("--z", type=lambda t: parse_range(t), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--contour-out")
    p.add_argument("--format", choices=["csv"], default="csv")

    p = new("entropy-scan", "Renyi entropies over blocks or grids", cmd_entropy_scan)
    p.add_argument("--L", type=lambda t: parse_range(t, integer=True), required=True)
    p.add_argument("--alpha", type=lambda t: parse_range(t))
    p.add_argument("--h", type=lambda t: parse_range(t))
    p.add_argument("--z", type=lambda t: parse_range(t))
    p.add_argument("--blocks", choices=["half", "boundary"], default="half")
    p.add_argument("--orders", type=lambda t: [float(x) for x in t.split(",")],
                   default=[1.0])
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv"], default="csv")

    p = new("renyi-fit", "fit the half-chain Renyi ansatz per (n, z)", cmd_renyi_fit)
    p.add_argument("--L", type=lambda t: parse_range(t, integer=True), required=True)
    p.add_argument("--z", type=lambda t: parse_range(t), required=True)
    p.add_argument("--orders", type=lambda t: [float(x) for x in t.split(",")],
                   default=[1.0, 2.0, 3.0, 4.0])
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = new("es-collapse", "entanglement spectrum rescaled by z/(2 pi^2)", cmd_es_collapse)
    p.add_argument("--L", type=lambda t: parse_range(t, integer=True), required=True)
    p.add_argument("--z", type=lambda t: parse_range(t), required=True)
    p.add_argument("--levels", type=int, default=5)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv"], default="csv")

    p = new("sdrg", "decimate a chain into its bond matching", cmd_sdrg)
    p.add_argument("--L", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--couplings", help="comma-separated signed couplings")
    p.add_argument("--arcs", action="store_true", help="print an ASCII arc diagram")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["json"], default="json")

    p = new("entropy-2d", "left-half entropy of the 2D lattice vs size", cmd_entropy_2d)
    p.add_argument("--L", type=lambda t: parse_range(t, integer=True), required=True)
    p.add_argument("--alpha", type=lambda t: parse_range(t), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--fit-out")
    p.add_argument("--format", choices=["csv"], default="csv")

    p = new("qubism", "qubism PPM image of the many-body state", cmd_qubism)
    p.add_argument("--sites", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--amplitudes", help="optional CSV dump (bitstring, amplitude)")
    p.add_argument("--format", choices=["ppm"], default="ppm")

    new("validate", "run the oracle-equivalence and invariant suites", cmd_validate)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except (NumericsError, np.linalg.LinAlgError, RuntimeError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
