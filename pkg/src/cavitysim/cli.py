"""Command-line entry point: ``cavitysim <subcommand> [options]``.

Exit codes: 0 ok, 1 invalid input, 2 numerical failure, 3 audit failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io, oracle
from .config import RunConfig, load_config
from .dynamics import SWEEP_AXES, IntegratorConfig, evolve, sweep
from .errors import NumericalError, SmallCouplingError, SweepError, ValidationError
from .fock import SUBSYSTEMS, StateVector, build_sector, subsystem_index
from .hamiltonian import CouplingSchedule, SystemParams, plateau_window
from .quantify import entropy_timeline

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_AUDIT = 0, 1, 2, 3

AUDIT_THRESHOLDS = {
    "integrator_vs_closed_form": 1e-6,
    "closed_form_vs_eigen_solve": 1e-9,
    "quadrature_vs_laplace_image": 1e-4,
}
AUDIT_S_VALUES = (1.0, 0.5 + 2j, 2 - 1j)
SINGLE_EXCITATION_KETS = ((1, 0, 0, 0, 0), (0, 1, 0, 0, 0), (0, 0, 0, 1, 0), (0, 0, 0, 0, 1))


def _bundle(out_dir, command, config: RunConfig, **extra):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return io.OutputBundle(out, command, config.to_dict(), extra=extra)


def cmd_simulate(config: RunConfig, out_dir, svg: bool = False) -> io.OutputBundle:
    space = config.space()
    tl = evolve(space, config.params(), config.schedule(), config.initial(space),
                config.integrator())
    sz1, sz2, drift = tl.sigma_z("q1"), tl.sigma_z("q2"), tl.norm_drift
    header = ["t_ns", "sz_q1", "sz_q2", "norm_drift"]
    cols = [tl.times, sz1, sz2, drift]
    if config.probabilities:
        probs = tl.probabilities()
        header += ["p_" + "".join(map(str, lab)) for lab in space.labels]
        cols += list(probs.T)
    bundle = _bundle(out_dir, "simulate", config)
    comment = io.manifest_comment("simulate", config.to_dict())
    bundle.add("timeline.csv", io.csv_text(header, zip(*cols), comment))
    bundle.add("timeline.json", json.dumps(
        {name: np.asarray(c, dtype=float).tolist() for name, c in zip(header, cols)}) + "\n")
    if svg:
        bundle.add("inversion.svg", io.line_chart_svg(
            tl.times, {"qubit 1": sz1, "qubit 2": sz2},
            title=f"population inversion, psi(0) = {config.initial_state}",
            ylabel="<sigma_z>", ylim=(-1, 1)))
    bundle.write_manifest()
    return bundle


def parse_range(spec: str) -> np.ndarray:
    """``min:max:count`` -> evenly spaced values (a single value is allowed)."""
    parts = spec.split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except (ValueError, IndexError):
        raise ValidationError(f"range {spec!r} must look like min:max:count") from None
    if len(parts) != 3 or count < 1:
        raise ValidationError(f"range {spec!r} must look like min:max:count with count >= 1")
    return np.linspace(lo, hi, count)


def cmd_sweep(config: RunConfig, axis: str, values, out_dir, svg: bool = False,
              workers=None) -> io.OutputBundle:
    if axis not in SWEEP_AXES:
        raise ValidationError(f"axis must be one of {', '.join(SWEEP_AXES)}")
    space = config.space()
    error = None
    try:
        res = sweep(space, config.params(), config.schedule(), config.initial(space),
                    config.integrator(), axis, values, workers=workers)
    except SweepError as exc:
        res, error = exc.result, exc
    rows = (
        (v, t, a, b)
        for v, r1, r2 in zip(res.axis_values, res.sz_q1, res.sz_q2)
        for t, a, b in zip(res.times, r1, r2)
    )
    bundle = _bundle(out_dir, "sweep", config, sweep={"axis": axis,
                                                      "values": [float(v) for v in res.axis_values]})
    comment = io.manifest_comment("sweep", config.to_dict())
    bundle.add("sweep.csv", io.csv_text(["axis_value", "t_ns", "sz_q1", "sz_q2"], rows, comment))
    if svg:
        for q, z in (("q1", res.sz_q1), ("q2", res.sz_q2)):
            bundle.add(f"sweep_{q}.svg", io.heatmap_svg(
                res.times, res.axis_values, z, title=f"<sigma_z> of {q} vs {axis}", ylabel=axis))
    bundle.write_manifest()
    if error is not None:
        raise error
    return bundle


def parse_pairs(spec) -> list[tuple[str, str]]:
    if spec in (None, ""):
        return []
    if spec == "all":
        return [(a, b) for i, a in enumerate(SUBSYSTEMS) for b in SUBSYSTEMS[i + 1:]]
    pairs = []
    for item in spec.split(","):
        bits = item.strip().split(":")
        if len(bits) != 2:
            raise ValidationError(f"pair {item!r} must look like q1:q2")
        for b in bits:
            subsystem_index(b)
        pairs.append((bits[0], bits[1]))
    return pairs


def parse_subsystems(spec) -> list[str]:
    if spec in (None, "", "all"):
        return list(SUBSYSTEMS)
    out = [s.strip() for s in spec.split(",")]
    for s in out:
        subsystem_index(s)
    return out


def cmd_entropy(config: RunConfig, subsystems, pairs, out_dir, svg: bool = False,
                every: int = 1) -> io.OutputBundle:
    for s in subsystems:
        subsystem_index(s)
    space = config.space()
    tl = evolve(space, config.params(), config.schedule(), config.initial(space),
                config.integrator())
    records = entropy_timeline(tl, subsystems, pairs, every=every)
    keyed = [tuple(sorted(p, key=SUBSYSTEMS.index)) for p in pairs]
    header = ["t_ns"] + [f"S_{s}" for s in subsystems] + [f"I_{a}_{b}" for a, b in keyed]
    rows = [[r.time] + [r.entropy[s] for s in subsystems] + [r.mutual[k] for k in keyed]
            for r in records]
    bundle = _bundle(out_dir, "entropy", config, subsystems=list(subsystems),
                     pairs=[list(k) for k in keyed])
    comment = io.manifest_comment("entropy", config.to_dict())
    bundle.add("entropy.csv", io.csv_text(header, rows, comment))
    if svg:
        t = [r.time for r in records]
        bundle.add("entropy.svg", io.line_chart_svg(
            t, {f"S({s})": [r.entropy[s] for r in records] for s in subsystems},
            title="von Neumann entropy", ylabel="S (bits)"))
        if keyed:
            bundle.add("mutual_information.svg", io.line_chart_svg(
                t, {f"I({a}:{b})": [r.mutual[(a, b)] for r in records] for a, b in keyed},
                title="mutual information", ylabel="I (bits)"))
    bundle.write_manifest()
    return bundle


def cmd_plateau(omegas, fraction: float = 0.1, cycles: int = 1) -> list[tuple]:
    """Rows ``(Omega, t_enter, t_zero, t_exit)`` for cycles ``0..cycles-1``."""
    rows = []
    for om in omegas:
        sched = CouplingSchedule("harmonic", 1.0, float(om))
        for m in range(cycles):
            w = plateau_window(sched, fraction, m)
            rows.append((float(om), w.t_enter, w.t_zero, w.t_exit))
    return rows


def plateau_csv(rows) -> str:
    return io.csv_text(["Omega", "t_enter_ns", "t_zero_ns", "t_exit_ns"], rows)


def cmd_oracle_audit(config: RunConfig, t_max: float = 500.0, dt: float = 1.0) -> dict:
    """Cross-check integrator, closed forms, eigen solution and Laplace images."""
    lam, J = config.lam, config.J
    times = np.arange(int(round(t_max / dt)) + 1) * dt
    space = build_sector(1, 0, 1)
    init = np.array([1, 0, 0, 0], dtype=complex)
    amps = np.zeros(space.dim, dtype=complex)
    amps[space.index_of[SINGLE_EXCITATION_KETS[0]]] = 1.0
    params = SystemParams.resonant(config.omega, lam, J)
    cfg = IntegratorConfig(config.rel_tol, config.abs_tol, sample_times=times)
    tl = evolve(space, params, CouplingSchedule("constant", 0.0, 0.0), StateVector(amps, space), cfg)
    order = [space.index_of[k] for k in SINGLE_EXCITATION_KETS]
    p_int = tl.probabilities()[:, order].T
    p_eig = np.abs(oracle.eigen_solve(times, J, lam, init)) ** 2

    report = {"lambda": lam, "J": J, "t_max": t_max, "checks": {}}
    checks = report["checks"]
    try:
        p_cf = oracle.closed_form_probs(times, J, lam)
    except SmallCouplingError as exc:
        report["closed_form"] = f"skipped: {exc}"
        checks["integrator_vs_eigen_solve"] = float(np.abs(p_int - p_eig).max())
    else:
        checks["integrator_vs_closed_form"] = float(np.abs(p_int - p_cf).max())
        checks["closed_form_vs_eigen_solve"] = float(np.abs(p_cf - p_eig).max())
    checks["quadrature_vs_laplace_image"] = oracle.quadrature_laplace_check(
        J, lam, init, AUDIT_S_VALUES)
    thresholds = dict(AUDIT_THRESHOLDS, integrator_vs_eigen_solve=1e-6)
    report["pass"] = {k: v <= thresholds[k] for k, v in checks.items()}
    report["thresholds"] = {k: thresholds[k] for k in checks}
    report["ok"] = all(report["pass"].values())
    return report


def _format_audit(report) -> str:
    lines = [f"oracle audit (lambda={report['lambda']!r}, J={report['J']!r}, "
             f"t in [0, {report['t_max']!r}] ns)"]
    if "closed_form" in report:
        lines.append(f"  closed form {report['closed_form']}")
    for name, dev in report["checks"].items():
        status = "PASS" if report["pass"][name] else "FAIL"
        lines.append(f"  {status} {name}: {dev:.3e} (threshold {report['thresholds'][name]:g})")
    return "\n".join(lines)


def _parse_set(items):
    out = {}
    for item in items or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ValidationError(f"--set expects key=value, got {item!r}")
        try:
            out[key.strip()] = json.loads(raw)
        except json.JSONDecodeError:
            out[key.strip()] = raw
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cavitysim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config field (value parsed as JSON)")
        if out:
            sp.add_argument("--out", required=True, help="output directory")
            sp.add_argument("--svg", action="store_true", help="also write SVG charts")

    common(sub.add_parser("simulate", help="single trajectory of <sigma_z>"))
    sp = sub.add_parser("sweep", help="<sigma_z> over a grid of k0, delta or Omega")
    common(sp)
    sp.add_argument("--axis", required=True, choices=SWEEP_AXES)
    sp.add_argument("--range", required=True, dest="range_spec", metavar="MIN:MAX:COUNT")
    sp.add_argument("--workers", type=int, default=None)
    sp = sub.add_parser("entropy", help="entropies and mutual information along a trajectory")
    common(sp)
    sp.add_argument("--subsystems", default="all", help="comma list from q1,f1,fb,q2,f2")
    sp.add_argument("--pairs", default="", help="comma list like q1:q2,f1:f2, or 'all'")
    sp.add_argument("--every", type=int, default=1, help="use every n-th sample")
    sp = sub.add_parser("plateau", help="windows where k(t) dips below fraction*k0")
    sp.add_argument("--Omega", type=float, nargs="+", required=True)
    sp.add_argument("--fraction", type=float, default=0.1)
    sp.add_argument("--cycles", type=int, default=1)
    sp.add_argument("--out", help="also write plateau.csv here")
    sp = sub.add_parser("oracle-audit", help="integrator vs analytic single-excitation solutions")
    common(sp, out=False)
    sp.add_argument("--t-max", type=float, default=500.0)
    sp = sub.add_parser("self-verify", help="check an output directory against its manifest")
    sp.add_argument("--out", required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def _dispatch(args) -> int:
    if args.command == "plateau":
        if any(om == 0 for om in args.Omega):
            raise ValidationError(
                "Omega = 0 gives constant coupling k = k0, which never vanishes: no plateau")
        text = plateau_csv(cmd_plateau(args.Omega, args.fraction, args.cycles))
        sys.stdout.write(text)
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            (Path(args.out) / "plateau.csv").write_text(text)
        return EXIT_OK
    if args.command == "self-verify":
        problems = io.verify_bundle(args.out)
        for line in problems:
            print(line, file=sys.stderr)
        print("ok" if not problems else f"{len(problems)} problem(s)")
        return EXIT_OK if not problems else EXIT_AUDIT

    config = load_config(args.config, _parse_set(args.set))
    if args.command == "simulate":
        bundle = cmd_simulate(config, args.out, args.svg)
    elif args.command == "sweep":
        bundle = cmd_sweep(config, args.axis, parse_range(args.range_spec), args.out, args.svg,
                           args.workers)
    elif args.command == "entropy":
        bundle = cmd_entropy(config, parse_subsystems(args.subsystems), parse_pairs(args.pairs),
                             args.out, args.svg, args.every)
    elif args.command == "oracle-audit":
        report = cmd_oracle_audit(config, args.t_max)
        print(_format_audit(report))
        return EXIT_OK if report["ok"] else EXIT_AUDIT
    for name in sorted(bundle.files):
        print(bundle.out_dir / name)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
