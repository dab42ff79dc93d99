"""Command-line interface.

Exit codes: 0 success, 1 usage/parse/physics-input error, 2 numerical
failure. Matrices are written as JSON, row-major, each element an
``[re, im]`` pair; series as CSV with columns ``x,re,im``.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys as _sys
from pathlib import Path

import numpy as np

from . import core
from .dsl import parse_program, program_system_path
from .errors import InputError, NumericalError, SpinlabError
from .grover import MARKS, grover_run
from .readout import DEFAULT_DT, DEFAULT_DURATION, DEFAULT_ZERO_FILL, simulate_fid, spectrum
from .sequences import IDEAL, Acquire, PulseSequence, labeling_capacity, labeling_sequence, load_error_model, run_sequence
from .system import bromotrifluoroethylene, load_system
from .tomography import deviation_error_norm, tomography_of_state


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(_sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def matrix_to_json(M: np.ndarray) -> list:
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def matrix_from_json(data) -> np.ndarray:
    if isinstance(data, dict):
        if "deviation" not in data:
            raise InputError("reference JSON object has no 'deviation' entry")
        data = data["deviation"]
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError):
        raise InputError("reference matrix must be rows of [re, im] pairs") from None
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise InputError(f"reference matrix must be square with [re, im] entries, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _dump(obj, out):
    text = json.dumps(obj, indent=1) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        _sys.stdout.write(text)


def write_series_csv(path, x, y):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "re", "im"])
        for xi, yi in zip(x, y):
            w.writerow([repr(float(xi)), repr(float(yi.real)), repr(float(yi.imag))])


def _system(args):
    if getattr(args, "system", None):
        return load_system(args.system)
    return bromotrifluoroethylene()


def _errors(args):
    return load_error_model(args.errors) if getattr(args, "errors", None) else IDEAL


def _check_a(a):
    if not 0 <= a < 1:
        raise InputError(f"--a must lie in [0, 1), got {a}")


def _populations(rho, sys):
    return {core.basis_label(i, sys.n): float(np.real(rho[i, i])) for i in range(sys.dim)}


# -- subcommands ----------------------------------------------------------------


def cmd_thermal(args):
    sys = _system(args)
    _check_a(args.a)
    rho = core.thermal_state(sys, args.a)
    _dump({"a": args.a, "populations": _populations(rho, sys)}, args.out)


def cmd_label(args):
    sys = _system(args)
    _check_a(args.a)
    rho0 = core.thermal_state(sys, args.a)
    seq = labeling_sequence(sys, args.label)
    res = run_sequence(seq, sys, rho0, errors=_errors(args))
    blk = core.subspace_block(res.rho, sys, args.label, 0).block
    eff = core.effective_pure_state(blk)
    _dump(
        {
            "a": args.a,
            "label": args.label,
            "before": _populations(rho0, sys),
            "after": _populations(res.rho, sys),
            "effective_pure_block": matrix_to_json(eff),
            "duration_s": seq.total_duration,
        },
        args.out,
    )


def cmd_grover(args):
    sys = _system(args)
    _check_a(args.a)
    variant = args.variant if args.variant == "auto" else int(args.variant)
    run = grover_run(
        sys,
        args.x0,
        args.iterations,
        pulse_mode=args.pulses,
        with_dephasing=args.dephasing,
        errors=_errors(args),
        a=args.a,
        label=args.label,
        variant=variant,
    )
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / f"populations_{args.x0}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", f"population({args.x0})"])
            for k, p in enumerate(run.populations):
                w.writerow([k, repr(float(p))])
        spins = tuple(s for s in sys.labels if s != sys.labels[sys.index(args.label)])
        fid = simulate_fid(run.rho, sys, run.frame, spins, args.duration, args.dt, readout=True)
        spec = spectrum(fid, args.zero_fill)
        for s in spins:
            write_series_csv(out / f"spectrum_{s}.csv", spec.freqs, spec.channel(s))
    print(f"iterations = {args.iterations}")
    print(f"pulses = {run.pulses}")
    print(f"duration_s = {run.duration:.6f}")
    print(f"population({args.x0}) = {run.final_population:.6f}")


def _split_acquire(seq: PulseSequence):
    events = list(seq.events)
    acq = [i for i, e in enumerate(events) if isinstance(e, Acquire)]
    if not acq:
        return seq, None
    if acq != [len(events) - 1]:
        raise InputError("acquire must be the last statement of a program")
    return PulseSequence(events[:-1], seq.name, seq.frame, seq.system_path), events[-1]


def cmd_run(args):
    path = Path(args.program)
    if not path.exists():
        raise InputError(f"{path}: no such program file")
    text = path.read_text(encoding="utf-8")
    header = program_system_path(text)
    if args.system:
        sys = load_system(args.system)
    elif header:
        sys = load_system(path.parent / header)
    else:
        sys = bromotrifluoroethylene()
    try:
        seq, acquire = _split_acquire(parse_program(text, sys))
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None
    _check_a(args.a)
    errors = _errors(args)
    res = run_sequence(seq, sys, core.thermal_state(sys, args.a), errors=errors, dephasing=args.dephasing)

    report = {
        "program": str(path),
        "a": args.a,
        "duration_s": seq.total_duration,
        "frame_hz": [float(v) for v in res.frame.delta_hz],
    }
    if args.tomography == "full":
        tomo = tomography_of_state(res.rho, sys, res.frame, errors, jobs=args.jobs)
        report["condition"] = tomo.condition
        report["experiments"] = tomo.experiments
        deviation = tomo.deviation
    else:
        deviation = core.deviation(res.rho)
    report["deviation"] = matrix_to_json(deviation)

    if args.reference:
        if args.reference == "theory":
            ref = run_sequence(seq, sys, core.thermal_state(sys, args.a)).rho
        else:
            ref_path = Path(args.reference)
            if not ref_path.exists():
                raise InputError(f"{ref_path}: no such reference file")
            try:
                ref = matrix_from_json(json.loads(ref_path.read_text()))
            except json.JSONDecodeError as exc:
                raise InputError(f"{ref_path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
            if ref.shape != deviation.shape:
                raise InputError(f"{ref_path}: reference is {ref.shape[0]}x{ref.shape[0]}, expected {sys.dim}x{sys.dim}")
        report["error_norm"] = deviation_error_norm(deviation, ref)

    if acquire is not None and args.spectra:
        out = Path(args.spectra)
        out.mkdir(parents=True, exist_ok=True)
        fid = simulate_fid(res.rho, sys, res.frame, acquire.spins, acquire.duration, acquire.dt)
        spec = spectrum(fid, DEFAULT_ZERO_FILL)
        for s in fid.spins:
            write_series_csv(out / f"spectrum_{s}.csv", spec.freqs, spec.channel(s))
    _dump(report, args.out)


def cmd_capacity(args):
    k, k_int = labeling_capacity(args.n)
    print(json.dumps({"k": round(k, 2), "k_int": k_int}))


# -- entry point -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spinlab", description="Labeled-NMR quantum computation simulator.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, a=True):
        sp.add_argument("--system", help="spin system INI file (default: bundled 3-spin molecule)")
        if a:
            sp.add_argument("--a", type=float, default=1e-5, help="thermal polarization (default 1e-5)")
        sp.add_argument("--out", help="write JSON here instead of stdout")

    sp = sub.add_parser("thermal", help="thermal populations")
    common(sp)
    sp.set_defaults(func=cmd_thermal)

    sp = sub.add_parser("label", help="populations before and after logical labeling")
    common(sp)
    sp.add_argument("--label", default="A")
    sp.add_argument("--errors", help="error-model INI file")
    sp.set_defaults(func=cmd_label)

    sp = sub.add_parser("grover", help="Grover search on the labeled subspace")
    sp.add_argument("--system")
    sp.add_argument("--a", type=float, default=1e-5)
    sp.add_argument("--x0", required=True, choices=MARKS)
    sp.add_argument("--iterations", type=int, default=1)
    sp.add_argument("--pulses", choices=("ideal", "shaped"), default="ideal")
    sp.add_argument("--errors", help="error-model INI file")
    sp.add_argument("--dephasing", action="store_true", help="apply T2 decay during delays")
    sp.add_argument("--variant", default="0", choices=("0", "1", "2", "3", "auto"))
    sp.add_argument("--label", default="A")
    sp.add_argument("--out", help="directory for the population and spectrum CSV files")
    sp.add_argument("--duration", type=float, default=DEFAULT_DURATION, help="acquisition time in s")
    sp.add_argument("--dt", type=float, default=DEFAULT_DT, help="sample interval in s")
    sp.add_argument("--zero-fill", type=int, default=DEFAULT_ZERO_FILL)
    sp.set_defaults(func=cmd_grover)

    sp = sub.add_parser("run", help="run a pulse program from the thermal state")
    sp.add_argument("program")
    common(sp)
    sp.add_argument("--errors", help="error-model INI file")
    sp.add_argument("--dephasing", action="store_true")
    sp.add_argument("--tomography", choices=("none", "full"), default="none")
    sp.add_argument("--reference", help="JSON deviation matrix, or 'theory' for the ideal-pulse run")
    sp.add_argument("--jobs", type=int, default=1, help="concurrent tomography experiments")
    sp.add_argument("--spectra", help="directory for spectra of a final acquire statement")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("capacity", help="qubits extractable by labeling n spins")
    sp.add_argument("--n", type=int, required=True)
    sp.set_defaults(func=cmd_capacity)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be at least 1")
    try:
        args.func(args)
    except NumericalError as exc:
        print(f"spinlab {args.command}: numerical failure: {exc}", file=_sys.stderr)
        return 2
    except (SpinlabError, ValueError, OSError) as exc:
        print(f"spinlab {args.command}: error: {exc}", file=_sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
