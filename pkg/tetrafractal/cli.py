"""
The command line interface ``tetrafractal``.

Exit codes: 0 on success, 2 on invalid inputs, 3 if ``verify-all`` finds a failing check, and 64 on usage errors.
"""

import argparse
import json
import numpy as np
import sys
import warnings

from . import (
    __version__,
    assembly_dynamics,
    configs,
    dynamics,
    export,
    faults,
    geometry,
    inertia,
    sim,
    truss,
)
from .defaults import CLI, FAULTS, GEOMETRY, SIMULATION, TRUSS
from .verify import run_checks

EXIT_OK, EXIT_INVALID, EXIT_FAILED, EXIT_USAGE = 0, 2, 3, 64

class ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")

def _params(args):
    if getattr(args, "params", None) is None:
        return dynamics.TetracopterParams.from_dict({})
    return dynamics.TetracopterParams.from_file(args.params)

def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        export.to_file(out, text)
        print(f"Wrote {out}")

def _read_matrix(path):
    with open(path) as f:
        try:
            value = json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"{path}:{e.lineno}:{e.colno}: {e.msg}")
    if isinstance(value, dict):
        missing = [ k for k in [ "shape", "data" ] if k not in value ]
        if len(missing) > 0:
            raise ValueError(f"{path}: a matrix object needs the keys \"shape\" and \"data\", missing {', '.join(missing)}")
        return np.reshape(value["data"], value["shape"])
    return np.array(value, dtype=float)

def default_body(mass, edge_length):
    """The elementary module as four point masses at the centers of its sub-tetrahedra."""
    geom = geometry.make_tetrahedron(edge_length)
    return inertia.RigidBodyParams(
        mass,
        inertia.point_mass_inertia(mass / 4, geometry.elementary_rotors(geom))
    )

# reports

def geometry_report(depth, edge_length):
    geom = geometry.make_tetrahedron(edge_length)
    asm = geometry.generate_assembly(geom, depth)
    disks = geometry.rotor_disk_report(asm)
    dims = geometry.derive_dimensions(edge_length)
    return {
        "depth": depth,
        "edge_length": edge_length,
        "circumradius": geom.circumradius,
        "n_modules": len(asm.module_poses),
        "n_rotors": disks.n_rotors,
        "module_poses": asm.module_poses,
        "rotor_positions": asm.rotor_positions,
        "rotor_spins": asm.rotor_spins,
        "rotor_radius": asm.rotor_radius,
        "total_disk_area": disks.total_disk_area,
        "base_area": disks.base_area,
        "ratio": disks.ratio,
        "overlap_found": disks.overlap_found,
        "min_center_distance": disks.min_center_distance,
        "hex_packing_bound": disks.hex_packing_bound,
        "dimensions": {
            "a": dims.a, "x": dims.x, "d": dims.d, "h": dims.h, "R": dims.R,
            "r_in": dims.r_in, "phi": dims.phi, "phi_is_advisory": dims.phi_is_advisory,
        },
    }

def inertia_report(n, body0, edge_length):
    r = geometry.make_tetrahedron(edge_length).circumradius
    inertia.check_body(body0)
    closed = inertia.assembly_body(body0, r, n)
    recursive = inertia.recursive_body(body0, r, n)
    error = np.linalg.norm(closed.inertia - recursive.inertia) / np.linalg.norm(recursive.inertia)
    return {
        "n": n,
        "mass": closed.mass,
        "inertia": closed.inertia,
        "check": { "recursion_vs_closed_form_error": error },
    }

def assembly_maps_report(n, p):
    geom = geometry.make_tetrahedron(p.a)
    M0 = assembly_dynamics.elementary_maps(dynamics.linearize(p), p, geom=geom)
    maps = assembly_dynamics.assembly_sequence(M0, geom, max(n, 2))
    closed = assembly_dynamics.closed_form_maps(M0, geom, n)
    M = maps[n]
    error = max(
        np.max(np.abs(getattr(closed, k) - getattr(M, k))) / max(np.max(np.abs(getattr(M, k))), 1e-300)
        for k in [ "Ma", "Mb", "Mc" ]
    )
    growth = assembly_dynamics.growth_report(
        maps,
        body0 = inertia.RigidBodyParams(p.m, p.I_q),
        r = geom.circumradius
    )
    return {
        "n": n,
        "u0": M.u0,
        "Ma": M.Ma,
        "Mb": M.Mb,
        "Mc": M.Mc,
        "Md": M.Md,
        "Q": assembly_dynamics.q_matrix(M0.Ma, geom),
        "closed_form_error": error,
        "growth": {
            "n": growth.n,
            "norm_a": growth.norm_a,
            "norm_b": growth.norm_b,
            "ratio_a": growth.ratio_a,
            "ratio_b": growth.ratio_b,
            "time_constant_ratio": growth.time_constant_ratio,
        },
    }

def linearize_report(p):
    model = dynamics.linearize(p)
    A_fd, B_fd, E_fd = dynamics.finite_difference_jacobians(p)
    return {
        "A": model.A,
        "B": model.B,
        "E": model.E,
        "omega0": model.omega0,
        "state_names": model.state_names,
        "input_names": model.input_names,
        "params": p.to_dict(),
        "finite_difference_error": max(
            np.max(np.abs(model.A - A_fd)) / np.max(np.abs(model.A)),
            np.max(np.abs(model.B - B_fd)) / np.max(np.abs(model.B)),
            np.max(np.abs(model.E - E_fd)) / max(np.max(np.abs(model.E)), 1e-300),
        ),
    }

def faults_report(mass, bounds, max_card, *, sweep=True):
    layout = faults.rotor_layout()
    lb, ub = faults.default_bounds(layout)
    if bounds == "inf":
        ub = np.inf
    elif bounds != "auto":
        ub = float(bounds)
    problem = faults.build_allocation(layout, mass, lb=lb, ub=ub)
    symmetries = faults.layout_symmetries(layout)
    r = faults.min_failures(problem, max_card, symmetries=symmetries)
    report = {
        "mass": mass,
        "weight": problem.B_target[3],
        "D": problem.D,
        "B_target": problem.B_target,
        "bounds": { "lb": lb, "ub": ub },
        "layout": {
            "r_x": layout.r_x, "r_y": layout.r_y, "spins": layout.spins, "k": layout.k, "b": layout.b,
            "orientations": list(FAULTS["module_orientations"]),
        },
        "minimum": r.cardinality,
        "lower_bound": r.lower_bound,
        "witness": None if r.witness is None else list(r.witness),
        "counts": { str(c): { "feasible": f, "infeasible": i } for c, (f, i) in r.counts.items() },
        "n_symmetries": len(symmetries),
    }
    if sweep:
        report["sensitivity"] = [
            {
                "multiplier": "auto" if multiplier is None else multiplier,
                "ub": ub_k,
                "minimum": s.cardinality,
                "lower_bound": s.lower_bound,
                "witness": None if s.witness is None else list(s.witness),
            }
            for multiplier, ub_k, s in faults.bound_sensitivity(layout, mass, max_card, symmetries=symmetries)
        ]
    return report

def configs_report(*, n_samples=100, seed=CLI["seed"]):
    all_configs = configs.enumerate_all()
    filtered = configs.filter_equilibrium(all_configs)
    classes = configs.reduce_symmetry(filtered.survivors)
    probe = configs.probe_converse(n_samples, seed=seed)
    return {
        "counts": {
            "all": len(all_configs),
            "after_torque": filtered.n_after_torque,
            "after_force": filtered.n_after_force,
            "per_spin_class": sum(all(s == configs.CCW for s in x.config.spins) for x in filtered.survivors),
            "classes": len(classes),
        },
        "classes": [
            {
                "label": c.label,
                "representative": { "directions": c.representative.directions, "spins": c.representative.spins },
                "class_size": c.class_size,
                "outward_count": c.outward_count,
                "lift_factor": c.lift_factor,
                "attitude": c.attitude,
            }
            for c in classes
        ],
        "converse_probe": { "n_samples": probe.n_samples, "counterexamples": probe.counterexamples },
    }

def _parse_perturbation(text):
    perturbation = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, sep, value = item.partition("=")
        if sep != "=":
            raise ValueError(f"perturbation items must look like \"p=0.5\", got {item!r}")
        try:
            perturbation[key.strip()] = float(value)
        except ValueError:
            raise ValueError(f"perturbation value of {key.strip()!r} must be a number, got {value!r}")
    return perturbation

def _parse_sweep(text):
    try:
        start, stop, step = (float(s) for s in text.split(":"))
    except ValueError:
        raise ValueError(f"sweep must look like \"start:stop:step\", got {text!r}")
    if not step > 0 or stop < start:
        raise ValueError(f"sweep needs step > 0 and stop >= start, got {text!r}")
    return np.arange(start, stop + step / 2, step)

# subcommands

def cmd_geometry(args):
    _emit(export.to_json(geometry_report(args.depth, args.edge)), args.out)
    return EXIT_OK

def cmd_inertia(args):
    body0 = default_body(args.mass, args.edge)
    if args.inertia is not None:
        body0 = inertia.RigidBodyParams(args.mass, _read_matrix(args.inertia))
    _emit(export.to_json(inertia_report(args.n, body0, args.edge)), args.out)
    return EXIT_OK

def cmd_assembly_maps(args):
    _emit(export.to_json(assembly_maps_report(args.n, _params(args))), args.out)
    return EXIT_OK

def cmd_linearize(args):
    _emit(export.to_json(linearize_report(_params(args))), args.out)
    return EXIT_OK

def cmd_truss(args):
    options = { "length_factor": args.K } if args.K is not None else {}
    as_json = args.out is not None and args.out.endswith(".json")
    if args.sweep is not None:
        payloads = _parse_sweep(args.sweep)
        kinds = [ "top", "bottom3" ] if args.scenario == "rest" else [ args.scenario ]
        columns, rows = [ "payload_kg" ], [ payloads ]
        for kind in kinds:
            s = truss.payload_sweep(kind, args.n, payloads, options=options)
            columns += [ f"{kind}_max_compression_N", f"{kind}_max_tension_N" ]
            rows += [ s.max_compression, s.max_tension ]
        if as_json:
            _emit(export.to_json({ "n": args.n, "sweep": dict(zip(columns, rows)) }), args.out)
        else:
            _emit(export.to_csv(np.column_stack(rows), columns), args.out)
        return EXIT_OK
    solution, summary, t = truss.scenario(args.scenario, args.n, args.payload, options=options)
    buckling = truss.buckling_check(t, solution, args.K)
    if as_json:
        _emit(export.to_json({
            "kind": summary.kind,
            "n": summary.n,
            "payload": summary.payload,
            "payload_ratio": summary.payload_ratio,
            "max_compression": summary.max_compression,
            "max_tension": summary.max_tension,
            "max_displacement": summary.max_displacement,
            "displacement_bound": (TRUSS | options)["displacement_bound"],
            "displacement_bound_met": summary.displacement_bound_met,
            "thrust_exceeded": summary.thrust_exceeded,
            "reaction_ratio": summary.reaction_ratio,
            "equilibrium_residual": solution.equilibrium_residual,
            "n_members": t.n_members,
            "n_joints": t.n_joints,
            "E": t.E,
            "I_section": t.I_section,
            "area": t.area,
            "calibrated": summary.calibrated,
            "n_flagged": int(np.sum(buckling.flagged)),
            "min_margin": np.min(buckling.margin),
        }), args.out)
    else:
        _emit(export.to_csv(truss.member_table(t, solution, buckling), truss.MEMBER_COLUMNS), args.out)
    return EXIT_OK

def cmd_faults(args):
    _emit(export.to_json(faults_report(args.mass, args.bounds, args.max_card, sweep=not args.no_sweep)), args.out)
    return EXIT_OK

def cmd_configs(args):
    _emit(export.to_json(configs_report(seed=args.seed)), args.out)
    return EXIT_OK

def cmd_sim(args):
    gains = {}
    if args.gains is not None:
        with open(args.gains) as f:
            try:
                gains = json.load(f)
            except json.JSONDecodeError as e:
                raise ValueError(f"{args.gains}:{e.lineno}:{e.colno}: {e.msg}")
    r = sim.hover_trial(_parse_perturbation(args.perturb), gains, args.t, params=_params(args), dt=args.dt)
    if args.out is not None and args.out.endswith(".json"):
        _emit(export.to_json({
            "stable": r.stable,
            "reason": r.reason,
            "settling_time": r.settling_time,
            "duration": r.t[-1],
            "final_state": r.states[-1],
        }), args.out)
    else:
        columns = [ "t" ] + dynamics.STATE_NAMES + [ f"omega_{j}" for j in range(1, 5) ]
        _emit(export.to_csv(np.column_stack((r.t, r.states, r.commands)), columns), args.out)
    if not r.stable:
        print(f"Unstable run: {r.reason}", file=sys.stderr)
    return EXIT_OK

def cmd_verify_all(args):
    results = run_checks(seed=args.seed)
    width = max(len(name) for name, _, _ in results)
    for name, passed, detail in results:
        print(f"{name.ljust(width)}  {'PASS' if passed else 'FAIL'}  {detail}")
    if args.out is not None:
        export.to_file(args.out, export.to_json({
            "checks": [ { "name": n, "passed": p, "detail": d } for n, p, d in results ],
            "passed": all(p for _, p, _ in results),
            "seed": args.seed,
        }))
    return EXIT_OK if all(p for _, p, _ in results) else EXIT_FAILED

def build_parser():
    parser = ArgumentParser(prog="tetrafractal", description="Analyses of Tetracopters and their fractal assemblies.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    p = subparsers.add_parser("geometry", help="assembly poses, rotor disks, and dimensions")
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--edge", type=float, default=GEOMETRY["edge_length"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_geometry)

    p = subparsers.add_parser("inertia", help="mass and inertia of the n-assembly")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--mass", type=float, default=dynamics.TetracopterParams.from_dict({}).m)
    p.add_argument("--edge", type=float, default=GEOMETRY["edge_length"])
    p.add_argument("--inertia", help="JSON file with the 3x3 inertia of the elementary module")
    p.add_argument("--out")
    p.set_defaults(func=cmd_inertia)

    p = subparsers.add_parser("assembly-maps", help="linearized force and moment maps of the n-assembly")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--params")
    p.add_argument("--out")
    p.set_defaults(func=cmd_assembly_maps)

    p = subparsers.add_parser("linearize", help="linear model of the Tetracopter at hover")
    p.add_argument("--params")
    p.add_argument("--out")
    p.set_defaults(func=cmd_linearize)

    p = subparsers.add_parser("truss", help="member forces and buckling margins")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--scenario", choices=truss.SCENARIOS, default="top")
    p.add_argument("--payload", type=float, default=0.)
    p.add_argument("--sweep", help="payload range start:stop:step [kg]")
    p.add_argument("--K", type=float, default=None, help=f"length factor, defaults to {TRUSS['length_factor']}")
    p.add_argument("--out")
    p.set_defaults(func=cmd_truss)

    p = subparsers.add_parser("faults", help="minimum number of inoperable rotor failures")
    p.add_argument("--mass", type=float, default=FAULTS["mass"])
    p.add_argument("--bounds", default="auto", help="\"auto\", \"inf\", or an upper bound on omega^2")
    p.add_argument("--max-card", type=int, default=8)
    p.add_argument("--no-sweep", action="store_true", help="skip the bound sensitivity sweep")
    p.add_argument("--out")
    p.set_defaults(func=cmd_faults)

    p = subparsers.add_parser("configs", help="propeller configurations of a 4-propeller module")
    p.add_argument("--seed", type=int, default=CLI["seed"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_configs)

    p = subparsers.add_parser("sim", help="rate-stabilized hover simulation")
    p.add_argument("--perturb", default="p=0.5")
    p.add_argument("--gains")
    p.add_argument("--params")
    p.add_argument("--dt", type=float, default=SIMULATION["dt"])
    p.add_argument("--t", type=float, default=SIMULATION["duration"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_sim)

    p = subparsers.add_parser("verify-all", help="run all acceptance checks")
    p.add_argument("--seed", type=int, default=CLI["seed"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify_all)
    return parser

def dispatch(argv=None):
    """Run the command line ``argv`` and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            return args.func(args)
    except (ValueError, export.ExportException, OSError) as e:
        print(f"tetrafractal: error: {e}", file=sys.stderr)
        return EXIT_INVALID

def main():
    sys.exit(dispatch())
