"""Command-line front end.

    sqz kernel    --model m.json
    sqz verify-t1 --model m.json [--grid t0,t1,npts] [--xi local|uniform] [--init +-+-] [--out f.csv]
    sqz verify-t2 --model m.json --field h [--grid l0,l1,npts] [...]
    sqz sweep     --model m.json --vary jy:0:2:21 [--out sweep.csv]
    sqz oracle    --model m.json

Exit codes: 0 success / within tolerance, 1 tolerance failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import adiabatic, dynamics, generalize
from .kernel import kernel_at_zero, maximize_I, maximize_R, squeezing_threshold
from .model import SpinConfig
from .modelfile import ModelFileError, emit_plotdata, load_model_doc, spec_from_dict, vary_parameter
from .squeezing import CSV_COLUMNS

log = logging.getLogger("bilinear_squeezing")

EXIT_OK, EXIT_TOL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _dump(doc):
    print(json.dumps(doc, indent=2, sort_keys=True))


def _grid(text):
    if text is None:
        return None
    try:
        lo, hi, npts = text.split(",")
        lo, hi, npts = float(lo), float(hi), int(npts)
    except ValueError as exc:
        raise InputError(f"--grid: expected 'start,stop,npts', got {text!r}") from exc
    if not (0 < lo < hi) or npts < 3:
        raise InputError("--grid: need 0 < start < stop and at least 3 points")
    return np.geomspace(lo, hi, npts)


def _threads():
    try:
        return max(1, int(os.environ.get("SQZ_THREADS", "")))
    except ValueError:
        return os.cpu_count() or 1


def kernel_summary(spec, seed):
    out = {}
    for label, diag in (("kernel", None), ("active", False)):
        k0 = kernel_at_zero(spec, diag)
        imax = maximize_I(spec, include_diagonal=diag, seed=seed)
        rmax = maximize_R(spec, include_diagonal=diag, seed=seed)
        out[label] = {
            "R0": k0.real,
            "I0": k0.imag,
            "I_max": imax.value,
            "I_max_angles": imax.angles.tolist(),
            "R_max": rmax.value,
            "R_max_angles": rmax.angles.tolist(),
            "converged": bool(imax.converged and rmax.converged),
        }
    active = out["active"]
    out["include_diagonal_in_kernel"] = spec.include_diagonal_in_kernel
    out["verdict"] = {
        "dynamical_squeezing": bool(active["I_max"] > squeezing_threshold(spec)),
        "adiabatic_squeezing": bool(active["R_max"] > squeezing_threshold(spec)),
    }
    return out


def cmd_kernel(args, spec, doc):
    out = {"command": "kernel", "model_hash": spec.digest(), "n_sites": spec.n_sites, "seed": args.seed}
    out.update(kernel_summary(spec, args.seed))
    _dump(out)
    return EXIT_OK


def _verify(args, spec, which):
    config = SpinConfig.from_string(args.init) if args.init else None
    if config is not None and config.n_sites != spec.n_sites:
        raise InputError(f"--init: {config.n_sites} spins given for a {spec.n_sites}-site model")
    grid = _grid(args.grid)
    if which == "t1":
        if config is None:
            res = dynamics.short_time_slope(spec, args.xi, grid, seed=args.seed)
        else:
            res = generalize.verify_generalized_t1(spec, config, grid, which_xi=args.xi, seed=args.seed)
        rate_key = "i_max"
    else:
        if not args.field > 0:
            raise InputError("--field must be positive")
        if config is None:
            res = adiabatic.adiabatic_slope(spec, args.field, args.xi, grid, seed=args.seed)
        else:
            res = generalize.verify_generalized_t2(spec, config, args.field, grid, which_xi=args.xi, seed=args.seed)
        rate_key = "r_max"
    ok = res.within(args.tol)
    squeezing = dynamics.slope_verdict(res.slope_estimate)
    out = {
        "command": f"verify-{which}",
        "model_hash": spec.digest(),
        "n_sites": spec.n_sites,
        "seed": args.seed,
        "init": str(config) if config else None,
        "which_xi": args.xi,
        "grid": res.t_grid.tolist(),
        "slope": res.slope_estimate,
        "slope_stderr": res.slope_stderr,
        "predicted_slope": res.predicted_slope,
        "relative_error": res.relative_error,
        "other_xi_slope": res.extra["other_slope"],
        rate_key: res.extra[rate_key],
        "verdict": "first-order squeezing" if squeezing else "no first-order squeezing",
        "verdict_matches_kernel": bool(squeezing == res.extra["squeezes"]),
        "reliable": res.reliable,
        "notes": res.notes,
        "tolerance": args.tol,
        "within_tolerance": bool(ok),
    }
    if which == "t2":
        out["field"] = args.field
        out["min_gap"] = res.extra["min_gap"]
    if args.out:
        header = {
            "command": out["command"],
            "seed": args.seed,
            "model_hash": out["model_hash"],
            "grid": args.grid or "default",
            "which_xi": args.xi,
            "slope": repr(res.slope_estimate),
            "predicted_slope": repr(res.predicted_slope),
        }
        rows = [r.csv_row(x) for x, r in zip(res.t_grid, res.extra["reports"])]
        _write_csv(args.out, CSV_COLUMNS, rows, header)
    _dump(out)
    return EXIT_OK if ok and out["verdict_matches_kernel"] else EXIT_TOL


def _write_csv(path, columns, rows, header):
    try:
        emit_plotdata(path, columns, rows, header)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc


def cmd_verify_t1(args, spec, doc):
    return _verify(args, spec, "t1")


def cmd_verify_t2(args, spec, doc):
    return _verify(args, spec, "t2")


SWEEP_COLUMNS = ["index", "value", "R0", "I0", "I_max", "R_max", "t1_slope_pred", "t2_slope_pred"]


def _parse_vary(text):
    try:
        name, lo, hi, npts = text.split(":")
        return name, np.linspace(float(lo), float(hi), int(npts))
    except ValueError as exc:
        raise InputError(f"--vary: expected name:start:stop:count, got {text!r}") from exc


def cmd_sweep(args, spec, doc):
    name, values = _parse_vary(args.vary)
    docs = [vary_parameter(doc, name, float(v)) for v in values]
    specs = [spec_from_dict(d) for d in docs]

    def point(i):
        s = specs[i]
        k0 = kernel_at_zero(s, False)
        imax = maximize_I(s, include_diagonal=False, seed=args.seed)
        rmax = maximize_R(s, include_diagonal=False, seed=args.seed)
        row = [i, float(values[i]), k0.real, k0.imag, imax.value, rmax.value,
               -4 * imax.value / s.n_sites, -2 * rmax.value / (args.field * s.n_sites)]
        if args.fit:
            row.append(dynamics.short_time_slope(s, args.xi, seed=args.seed).slope_estimate)
        return row

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = list(pool.map(point, range(len(specs))))
    columns = SWEEP_COLUMNS + (["t1_slope_fit"] if args.fit else [])
    header = {
        "command": "sweep",
        "seed": args.seed,
        "model_hash": spec.digest(),
        "grid": args.vary,
        "field": args.field,
    }
    if args.out:
        _write_csv(args.out, columns, rows, header)
    _dump({"command": "sweep", "model_hash": spec.digest(), "seed": args.seed, "vary": args.vary,
           "columns": columns, "rows": rows})
    return EXIT_OK


def cmd_oracle(args, spec, doc):
    n = spec.n_sites
    if n > 6:
        raise InputError("oracle: dense checks need n_sites <= 6")
    rng = np.random.default_rng(args.seed)
    comm_dev = 0.0
    elem_dev = 0.0
    for _ in range(args.samples):
        th = rng.uniform(0, 2 * np.pi, n)
        got = dynamics.commutator_oracle(spec, th)
        comm_dev = max(comm_dev, abs(got - dynamics.commutator_prediction(spec, th)))
        for i in range(n):
            for j in range(n):
                if i != j:
                    got = adiabatic.matrix_element_oracle(th, i, j, n)
                    elem_dev = max(elem_dev, abs(got - adiabatic.matrix_element_prediction(th, i, j)))
    pair_ok = dynamics.pair_commutator_check(min(n, 3))
    ok = comm_dev <= 1e-10 and elem_dev <= 1e-12 and pair_ok
    _dump({
        "command": "oracle",
        "model_hash": spec.digest(),
        "seed": args.seed,
        "samples": args.samples,
        "commutator_max_deviation": comm_dev,
        "matrix_element_max_deviation": elem_dev,
        "pair_commutator_identity": pair_ok,
        "passed": bool(ok),
    })
    return EXIT_OK if ok else EXIT_TOL


def build_parser():
    p = argparse.ArgumentParser(prog="sqz", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--model", required=True, help="JSON model file")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float, default=1e-2, help="relative slope tolerance")

    sp = sub.add_parser("kernel", help="kernel sums, maxima and squeezing verdict")
    common(sp)
    sp.set_defaults(func=cmd_kernel)

    for name, func in (("verify-t1", cmd_verify_t1), ("verify-t2", cmd_verify_t2)):
        sp = sub.add_parser(name)
        common(sp)
        sp.add_argument("--grid", help="geometric grid 'start,stop,npts'")
        sp.add_argument("--xi", choices=("local", "uniform"), default="local")
        sp.add_argument("--init", help="initial product state, e.g. '++-+' or '1,-1,1'")
        sp.add_argument("--out", help="CSV output path")
        sp.add_argument("--field", type=float, default=1.0)
        sp.set_defaults(func=func)

    sp = sub.add_parser("sweep", help="kernel quantities along one parameter")
    common(sp)
    sp.add_argument("--vary", required=True, help="name:start:stop:count")
    sp.add_argument("--field", type=float, default=1.0)
    sp.add_argument("--fit", action="store_true", help="also fit the dynamical slope at each point")
    sp.add_argument("--xi", choices=("local", "uniform"), default="local")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("oracle", help="dense-matrix checks of the first-order identities")
    common(sp)
    sp.add_argument("--samples", type=int, default=20)
    sp.set_defaults(func=cmd_oracle)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        doc = load_model_doc(args.model)
        spec = spec_from_dict(doc)
        return args.func(args, spec, doc)
    except (ModelFileError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except adiabatic.GapCollapseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOL


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
