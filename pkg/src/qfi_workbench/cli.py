"""Command-line interface.

Subcommands: ``sweep-time``, ``sweep-g``, ``scaling``, ``report``, ``validate``
and ``simulate``. Grid sweeps write CSV by default, reports JSON. Exit status
is 0 on success, 1 when a check or experiment fails, 2 on usage/config errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import generator as gen
from . import metrology, qfi
from .errors import ConfigError, IdentifiabilityError, InapplicableBoundError, ModelError, WorkbenchError
from .model import random_model, random_rotation_model, resolve_model, tensor_power
from .operators import eigendecompose, evolution_operator, max_norm, random_state
from .parallel import ordered_map

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2

VALIDATION_DIMS = (2, 3, 4, 6)
ROUTE_TOL = 1e-6
HERMITIAN_TOL = 1e-8
SUPEROP_HERMITIAN_TOL = 1e-10
SUPEROP_SPECTRUM_TOL = 1e-8
BOUND_SLACK = 1e-8
SLD_TOL = 1e-7
BOUND_GRID = (0.0, 10.0, 50)


@dataclass
class RunConfig:
    model: str
    g: float = 0.0
    t: float = 1.0
    t_range: tuple | None = None
    g_range: tuple | None = None
    route: str = "auto"
    N: tuple = (1,)
    nu: int = 10_000
    reps: int = 200
    seed: int = 0
    count: int = 50
    out: str | None = None
    format: str | None = None


def parse_range(text: str) -> tuple:
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise ConfigError(f"range must look like lo:hi:n, got {text!r}") from exc
    if n < 1 or hi < lo or (n > 1 and hi == lo):
        raise ConfigError(f"empty sweep range {text!r}")
    return lo, hi, n


def _fmt(x):
    if x is None:
        return ""
    return format(float(x), ".17g")


def _emit(text: str, out: str | None):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def rows_to_text(columns, rows, fmt) -> str:
    if fmt == "json":
        return json.dumps([dict(zip(columns, r)) for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _ceiling_or_none(spec, g):
    try:
        return qfi.bound_eigenvalue_independent_ceiling(spec, g)
    except InapplicableBoundError:
        return None


def sweep_time_rows(spec, g, ts, route="auto"):
    ceiling = _ceiling_or_none(spec, g)

    def row(t):
        h = gen.compute_generator(spec, g, t, route).h
        r = [t, qfi.qfi_max(h).qfi, qfi.bound_spectral(spec, g, t), qfi.bound_hilbert_schmidt(h)]
        return r + [ceiling] if ceiling is not None else r

    columns = ["t", "qfi_max", "bound_spectral", "bound_hilbert_schmidt"]
    if ceiling is not None:
        columns.append("ceiling")
    return columns, ordered_map(row, ts)


def cmd_sweep_time(cfg: RunConfig) -> int:
    if cfg.t_range is None:
        raise ConfigError("sweep-time needs --t-range lo:hi:n")
    spec = resolve_model(cfg.model)
    columns, rows = sweep_time_rows(spec, cfg.g, np.linspace(*cfg.t_range), cfg.route)
    _emit(rows_to_text(columns, rows, cfg.format or "csv"), cfg.out)
    return EXIT_OK


def cmd_sweep_g(cfg: RunConfig) -> int:
    if cfg.g_range is None:
        raise ConfigError("sweep-g needs --g-range lo:hi:n")
    spec = resolve_model(cfg.model)

    def row(g):
        h = gen.compute_generator(spec, g, cfg.t, cfg.route).h
        return [g, qfi.qfi_max(h).qfi, qfi.bound_spectral(spec, g, cfg.t), qfi.bound_hilbert_schmidt(h)]

    rows = ordered_map(row, np.linspace(*cfg.g_range))
    columns = ["g", "qfi_max", "bound_spectral", "bound_hilbert_schmidt"]
    _emit(rows_to_text(columns, rows, cfg.format or "csv"), cfg.out)
    return EXIT_OK


def scaling_rows(spec, g, t, Ns, route="auto"):
    for N in Ns:
        tensor_power(spec, N)  # validate the dimension cap before any work
    single = qfi.tensor_power_qfi(spec, g, t, 1, route)
    rows = []
    for N in Ns:
        value = single if N == 1 else qfi.tensor_power_qfi(spec, g, t, N, route)
        rows.append([N, value, value / N**2])
    return ["N", "qfi_max", "ratio_to_N2"], rows


def cmd_scaling(cfg: RunConfig) -> int:
    spec = resolve_model(cfg.model)
    columns, rows = scaling_rows(spec, cfg.g, cfg.t, cfg.N, cfg.route)
    _emit(rows_to_text(columns, rows, cfg.format or "csv"), cfg.out)
    return EXIT_OK


def cmd_report(cfg: RunConfig) -> int:
    spec = resolve_model(cfg.model)
    report = qfi.qfi_report(spec, cfg.g, cfg.t, route=cfg.route).to_dict()
    report["model"] = spec.label
    _emit(json.dumps(report, indent=1) + "\n", cfg.out)
    return EXIT_OK


# --- validation -------------------------------------------------------------


def validation_instance(seed: int, index: int):
    """Deterministic random instance: every fifth one has a g-independent spectrum."""
    rng = np.random.default_rng([seed, index])
    if index % 5 == 4:
        d = (2, 4, 6)[(index // 5) % 3]
        spec = random_rotation_model(rng, d)
        kind = "rotation"
    else:
        d = VALIDATION_DIMS[index % len(VALIDATION_DIMS)]
        spec = random_model(rng, d)
        kind = "generic"
    g = float(rng.uniform(-1.0, 1.0))
    t = float(rng.uniform(0.5, 3.0))
    probe = random_state(rng, d)
    return spec, kind, g, t, probe


def validate_instance(seed: int, index: int) -> dict:
    spec, kind, g, t, probe = validation_instance(seed, index)
    cv = gen.cross_validate(spec, g, t)
    H, dH = gen.hamiltonian_and_derivative(spec, g)
    dec = eigendecompose(H)
    sop = gen.build_superoperator(spec, g)
    diffs = np.sort((dec.eigenvalues[:, None] - dec.eigenvalues[None, :]).reshape(-1))
    spectrum_error = float(np.max(np.abs(np.sort(sop.eigenvalues) - diffs)))
    superop_defect = max_norm(sop.matrix - sop.matrix.conj().T)
    tr_dh2 = float(np.real(np.trace(dH @ dH)))
    parseval_error = abs(float(np.sum(np.abs(sop.coefficients) ** 2)) - tr_dh2)

    ts = np.linspace(*BOUND_GRID)
    qmax = []
    spectral_ok = hs_ok = True
    for tt in ts:
        h = gen.generator_spectral(spec, g, tt).h
        q = qfi.qfi_max(h).qfi
        qmax.append(q)
        spectral_ok &= q <= qfi.bound_spectral(spec, g, tt) + BOUND_SLACK
        hs_ok &= q <= qfi.bound_hilbert_schmidt(h) + BOUND_SLACK
    ceiling = _ceiling_or_none(spec, g)
    ceiling_ok = None if ceiling is None else bool(max(qmax) <= ceiling + BOUND_SLACK)

    h = cv["results"]["spectral"].h
    U = evolution_operator(dec, t)
    psi = U @ probe
    rho = np.outer(psi, psi.conj())
    drho = -1j * (h @ rho - rho @ h)
    sld_error = abs(qfi.sld_qfi(rho, drho) - qfi.qfi_pure(h, probe, U))
    best = qfi.qfi_max(h)
    optimal_error = abs(qfi.qfi_pure(h, best.state) - best.qfi)

    checks = {
        "route_equivalence": cv["max_distance"] <= ROUTE_TOL,
        "hermiticity": max(cv["hermiticity_defects"].values()) <= HERMITIAN_TOL,
        "superoperator_hermitian": superop_defect <= SUPEROP_HERMITIAN_TOL,
        "superoperator_spectrum": spectrum_error <= SUPEROP_SPECTRUM_TOL,
        "parseval": parseval_error <= 1e-8 * max(1.0, tr_dh2),
        "bound_spectral": bool(spectral_ok),
        "bound_hilbert_schmidt": bool(hs_ok),
        "sld_consistency": sld_error <= SLD_TOL,
        "optimal_probe": optimal_error <= SLD_TOL,
    }
    if ceiling_ok is not None:
        checks["ceiling"] = ceiling_ok
    return {
        "index": index,
        "kind": kind,
        "dim": spec.dim,
        "terms": len(spec.terms),
        "g": g,
        "t": t,
        "route_distances": cv["distances"],
        "max_route_distance": cv["max_distance"],
        "hermiticity_defects": cv["hermiticity_defects"],
        "superoperator_hermiticity_defect": superop_defect,
        "superoperator_spectrum_error": spectrum_error,
        "parseval_error": parseval_error,
        "sld_error": sld_error,
        "max_qfi_on_grid": max(qmax),
        "ceiling": ceiling,
        "checks": checks,
        "passed": all(checks.values()),
    }


def validation_report(seed: int, count: int) -> dict:
    if count < 1:
        raise ConfigError("--count must be at least 1")
    instances = ordered_map(lambda i: validate_instance(seed, i), range(count))
    return {
        "seed": seed,
        "count": count,
        "tolerances": {
            "route_distance": ROUTE_TOL,
            "hermiticity": HERMITIAN_TOL,
            "superoperator_hermitian": SUPEROP_HERMITIAN_TOL,
            "superoperator_spectrum": SUPEROP_SPECTRUM_TOL,
            "bound_slack": BOUND_SLACK,
            "sld": SLD_TOL,
        },
        "bound_t_grid": list(BOUND_GRID),
        "instances": instances,
        "failed": [inst["index"] for inst in instances if not inst["passed"]],
        "passed": all(inst["passed"] for inst in instances),
    }


def cmd_validate(cfg: RunConfig) -> int:
    report = validation_report(cfg.seed, cfg.count)
    _emit(json.dumps(report, indent=1) + "\n", cfg.out)
    return EXIT_OK if report["passed"] else EXIT_CHECK_FAILED


def cmd_simulate(cfg: RunConfig) -> int:
    spec = resolve_model(cfg.model)
    config = {"model": cfg.model, "g": cfg.g, "t": cfg.t, "nu": cfg.nu, "reps": cfg.reps, "seed": cfg.seed}
    try:
        report = qfi.qfi_report(spec, cfg.g, cfg.t, route=cfg.route)
        probe = report.optimal_probe
        meas = metrology.sld_measurement(spec, probe, cfg.g, cfg.t)
        est = metrology.crb_experiment(spec, probe, meas, cfg.g, cfg.t, cfg.nu, cfg.reps, cfg.seed)
    except IdentifiabilityError as exc:
        out = {"error": {"type": "identifiability", "message": str(exc)}, "config": config}
        _emit(json.dumps(out, indent=1) + "\n", cfg.out)
        return EXIT_CHECK_FAILED
    out = {"report": est.to_dict(), "config": config}
    _emit(json.dumps(out, indent=1) + "\n", cfg.out)
    return EXIT_OK


COMMANDS = {
    "sweep-time": cmd_sweep_time,
    "sweep-g": cmd_sweep_g,
    "scaling": cmd_scaling,
    "report": cmd_report,
    "validate": cmd_validate,
    "simulate": cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qfi-workbench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--model", default="spin_direction",
                       help="builtin (e.g. spin_direction:B=1, spin_amplitude:B=g^2) or model-file path")
        p.add_argument("--g", type=float, default=0.0)
        p.add_argument("--t", type=float, default=1.0)
        p.add_argument("--t-range", dest="t_range")
        p.add_argument("--g-range", dest="g_range")
        p.add_argument("--route", default="auto", choices=["fd", "quad", "super", "spectral", "auto"])
        p.add_argument("--N", default="1", help="comma-separated copy numbers")
        p.add_argument("--nu", type=int, default=10_000)
        p.add_argument("--reps", type=int, default=200)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--count", type=int, default=50)
        p.add_argument("--out")
        p.add_argument("--format", choices=["csv", "json"])
    return parser


def config_from_args(args) -> RunConfig:
    try:
        Ns = tuple(int(x) for x in args.N.split(","))
    except ValueError as exc:
        raise ConfigError(f"--N must be comma-separated integers, got {args.N!r}") from exc
    if any(n < 1 for n in Ns):
        raise ConfigError("--N values must be >= 1")
    if args.nu < 1 or args.reps < 1:
        raise ConfigError("--nu and --reps must be positive")
    return RunConfig(
        model=args.model, g=args.g, t=args.t,
        t_range=parse_range(args.t_range) if args.t_range else None,
        g_range=parse_range(args.g_range) if args.g_range else None,
        route=args.route, N=Ns, nu=args.nu, reps=args.reps, seed=args.seed,
        count=args.count, out=args.out, format=args.format,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](cfg)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WorkbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
