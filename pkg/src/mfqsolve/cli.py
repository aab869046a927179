"""Command-line entry point.

Every subcommand resolves its parameters as built-in defaults, then an
optional JSON ``--config`` file, then explicit flags. The resolved set is
echoed in the metadata sidecar whenever files are written. Without an
output directory, tabular results go to stdout and nothing is written.

Exit codes: 0 success, 1 usage or invalid parameters, 2 runtime/resource error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .baselines import EnsembleSpec, baseline_csv, ensemble_mean, euler, euler_maruyama, fmt
from .copysolver import solve_history, sample_readout
from .errors import ConfigurationError, DomainError, MfqError, ValidationError
from .experiments import ExperimentConfig, run
from .ode import OdeSpec
from .rng import generator
from . import qubit
from . import resources as res

OUTDIR_ENV = "MFQSOLVE_OUTDIR"

ODE_DEFAULTS = dict(alpha=2.0, dt=0.05, steps=30, x0=0.1, linear=1.0)

DEFAULTS = {
    "bell": dict(seed=0),
    "measure": dict(state="bell", shots=1000, seed=0),
    "solve": dict(ODE_DEFAULTS, copies=15, copy_index=0, shots=None, seed=0),
    "baseline": dict(ODE_DEFAULTS, seed=0),
    "ensemble": dict(ODE_DEFAULTS, size=100, sigma=0.05, noise_sigma=None, seed=0),
    "resources": dict(vars=3, steps=100, ancilla=100, depth=1e29, gate_time=1e-9, seed=0),
    "fig2-left": dict(seed=0),
    "fig2-right": dict(seed=0),
    "fig3": dict(size=100, sigma=0.05, seed=0),
    "error-growth": dict(ns=[5, 10, 15], seed=0),
}

# experiment flag -> key in the experiment's locked parameter set
OVERRIDE_KEYS = dict(alpha="cubic_coeff", dt="dt", steps="steps", x0="x0", linear="linear_coeff",
                     copies="n_copies", ns="ns")

STATES = {
    "zero": lambda: qubit.basis_state(1, 0),
    "one": lambda: qubit.basis_state(1, 1),
    "plus": qubit.plus_state,
    "minus": qubit.minus_state,
    "bell": qubit.bell_circuit,
}


@dataclass
class CliConfig:
    subcommand: str
    params: dict = field(default_factory=dict)
    outdir: str | None = None
    fmt: str = "both"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CliConfig":
        return cls(d["subcommand"], dict(d.get("params", {})), d.get("outdir"), d.get("fmt", "both"))


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _float(s: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}")


def _int(s: str) -> int:
    """Integer flag that also accepts scientific notation such as 1e3."""
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}")
    if v != int(v):
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}")
    return int(v)


def _ns(s: str) -> list[int]:
    return [_int(p) for p in s.split(",") if p.strip()]


def _add_common(p: argparse.ArgumentParser, figure: bool = False):
    p.add_argument("--seed", type=_int, help="64-bit RNG seed (default 0)")
    p.add_argument("--config", help="JSON file of parameters (or a metadata sidecar); flags override it")
    p.add_argument("--outdir", help=f"output directory (default ${OUTDIR_ENV}"
                                    + (", else ./results)" if figure else "; else print to stdout)"))
    if figure:
        p.add_argument("--format", dest="fmt", choices=["csv", "svg", "both"], help="outputs to write")


def _add_ode(p: argparse.ArgumentParser):
    p.add_argument("--alpha", type=_float, help="cubic coefficient")
    p.add_argument("--dt", type=_float, help="time step")
    p.add_argument("--steps", type=_int, help="number of steps T")
    p.add_argument("--x0", type=_float, help="initial value")
    p.add_argument("--linear", type=_float, help="linear coefficient (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mfqsolve", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("bell", help="prepare the two-qubit Bell state and dump it as CSV")
    _add_common(p)

    p = sub.add_parser("measure", help="Born-rule sampling of a named state")
    p.add_argument("--state", choices=sorted(STATES))
    p.add_argument("--shots", type=_int)
    _add_common(p)

    p = sub.add_parser("solve", help="run the multi-copy solver, print step,t,x_quantum")
    _add_ode(p)
    p.add_argument("--copies", type=_int, help="number of copies N")
    p.add_argument("--copy-index", dest="copy_index", type=_int, help="copy to read out")
    p.add_argument("--shots", type=_int, help="also emit a sampled |x| estimate per step")
    _add_common(p)

    p = sub.add_parser("baseline", help="Euler, RK4 and closed-form solution")
    _add_ode(p)
    _add_common(p)

    p = sub.add_parser("ensemble", help="perturbed initial-condition ensemble mean")
    _add_ode(p)
    p.add_argument("--size", type=_int)
    p.add_argument("--sigma", type=_float)
    p.add_argument("--noise-sigma", dest="noise_sigma", type=_float,
                   help="add an Euler-Maruyama column with this noise amplitude")
    _add_common(p)

    p = sub.add_parser("resources", help="hardware resource estimate table")
    p.add_argument("--vars", type=_int, help="number of dynamical variables")
    p.add_argument("--steps", type=_int, help="integration steps T")
    p.add_argument("--ancilla", type=_int)
    p.add_argument("--depth", type=_float, help="circuit depth in gates")
    p.add_argument("--gate-time", dest="gate_time", type=_float, help="seconds per gate")
    _add_common(p)

    for name in ("fig2-left", "fig2-right", "fig3"):
        p = sub.add_parser(name, help=f"reproduce {name} (locked parameters; flags override)")
        _add_ode(p)
        p.add_argument("--copies", type=_int)
        if name == "fig3":
            p.add_argument("--size", type=_int, help="ensemble size")
            p.add_argument("--sigma", type=_float, help="initial-condition spread")
        _add_common(p, figure=True)

    p = sub.add_parser("error-growth", help="deviation from Euler per step for several N")
    _add_ode(p)
    p.add_argument("--ns", type=_ns, help="comma-separated copy counts, e.g. 5,10,15")
    _add_common(p, figure=True)
    return parser


def _load_config_file(path: str, subcommand: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path} is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise UsageError(f"{path} must hold a JSON object")
    if "cli_config" in data:
        data = data["cli_config"]
    if "subcommand" in data:
        if data["subcommand"] != subcommand:
            raise UsageError(f"config file is for {data['subcommand']!r}, not {subcommand!r}")
        data = data.get("params", {})
    allowed = set(DEFAULTS[subcommand])
    if subcommand in EXPERIMENT_OF:
        allowed |= set(OVERRIDE_KEYS)
    elif subcommand in ("solve", "baseline", "ensemble"):
        allowed |= set(ODE_DEFAULTS)
    unknown = set(data) - allowed
    if unknown:
        raise UsageError(f"unknown parameters in {path}: {sorted(unknown)}")
    return data


def resolve(args: argparse.Namespace) -> tuple[CliConfig, set[str]]:
    """Merge defaults, config file and flags; return the config and the explicitly set keys."""
    cmd = args.subcommand
    params = dict(DEFAULTS[cmd])
    explicit = set()
    if args.config:
        from_file = _load_config_file(args.config, cmd)
        params.update(from_file)
        explicit |= set(from_file)
    for k, v in vars(args).items():
        if k in ("subcommand", "config", "outdir", "fmt") or v is None:
            continue
        params[k] = v
        explicit.add(k)
    figure = cmd in ("fig2-left", "fig2-right", "fig3", "error-growth")
    outdir = args.outdir or os.environ.get(OUTDIR_ENV) or ("results" if figure else None)
    fmt_ = getattr(args, "fmt", None) or "both"
    return CliConfig(cmd, params, outdir, fmt_), explicit


def _write_outputs(cfg: CliConfig, files: dict[str, str], extra: dict | None = None):
    out = Path(cfg.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        with open(out / name, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    meta = {"cli_config": cfg.to_dict(), "outputs": sorted(files), "version": __version__}
    if extra:
        meta.update(extra)
    with open(out / f"{cfg.subcommand}.meta.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _emit(cfg: CliConfig, name: str, text: str, extra: dict | None = None):
    if cfg.outdir:
        _write_outputs(cfg, {name: text}, extra)
    else:
        sys.stdout.write(text)


def _ode_from(p: dict) -> OdeSpec:
    return OdeSpec(cubic_coeff=p["alpha"], dt=p["dt"], steps=p["steps"], x0=p["x0"], linear_coeff=p["linear"])


def _table(header: list[str], rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) if isinstance(v, float) else str(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"


def cmd_bell(cfg: CliConfig, _explicit):
    psi = qubit.bell_circuit()
    _emit(cfg, "bell.csv", psi.to_csv(), {"product_test": qubit.product_test(psi)})
    if not cfg.outdir:
        sys.stderr.write(f"product_test = {qubit.product_test(psi)!r}\n")


def cmd_measure(cfg: CliConfig, _explicit):
    p = cfg.params
    rec = qubit.measure(STATES[p["state"]](), p["shots"], p["seed"])
    rows = sorted(rec.counts.items())
    _emit(cfg, "measure.csv", _table(["index", "count"], rows))


def cmd_solve(cfg: CliConfig, _explicit):
    p = cfg.params
    ode = _ode_from(p)
    hist = solve_history(ode, p["copies"])
    xq = hist.x_est(p["copy_index"])
    t = hist.times()
    if p["shots"]:
        sampled = [sample_readout(b, p["copy_index"], p["shots"], _sub_seed(p["seed"], k))
                   for k, b in enumerate(hist.blocks)]
        rows = [(k, float(t[k]), float(xq[k]), sampled[k]) for k in range(len(xq))]
        header = ["step", "t", "x_quantum", "x_sampled_abs"]
    else:
        rows = [(k, float(t[k]), float(xq[k])) for k in range(len(xq))]
        header = ["step", "t", "x_quantum"]
    _emit(cfg, "solve.csv", _table(header, rows))


def _sub_seed(seed: int, k: int) -> int:
    # one independent stream per step, derived from (seed, step)
    return int(generator(seed, k).integers(0, 2**63))


def cmd_baseline(cfg: CliConfig, _explicit):
    _emit(cfg, "baseline.csv", baseline_csv(_ode_from(cfg.params)))


def cmd_ensemble(cfg: CliConfig, _explicit):
    p = cfg.params
    ode = _ode_from(p)
    e = euler(ode)
    m = ensemble_mean(ode, EnsembleSpec(p["size"], p["sigma"], p["seed"]))
    header = ["step", "t", "x_euler", "x_ensemble"]
    cols = [e.x, m.x]
    if p["noise_sigma"] is not None:
        header.append("x_euler_maruyama")
        cols.append(euler_maruyama(ode, p["noise_sigma"], p["seed"]).x)
    rows = [(k, float(e.t[k]), *(float(c[k]) for c in cols)) for k in range(len(e))]
    _emit(cfg, "ensemble.csv", _table(header, rows))


def cmd_resources(cfg: CliConfig, _explicit):
    p = cfg.params
    args = (p["vars"], p["steps"], p["ancilla"], p["depth"], p["gate_time"])
    est = res.estimate(*args)
    rows = res.report(est, lorenz=res.is_lorenz(*args))
    sys.stdout.write(res.format_table(rows))
    if cfg.outdir:
        _write_outputs(cfg, {"resources.csv": res.report_csv(rows)}, {"estimate": est.to_dict()})


EXPERIMENT_OF = {"fig2-left": "fig2_left", "fig2-right": "fig2_right", "fig3": "fig3",
                 "error-growth": "error_growth"}


def cmd_experiment(cfg: CliConfig, explicit: set[str]):
    p = cfg.params
    overrides = {OVERRIDE_KEYS[k]: p[k] for k in sorted(explicit) if k in OVERRIDE_KEYS}
    ens = EnsembleSpec(p.get("size", 100), p.get("sigma", 0.05), p["seed"])
    config = ExperimentConfig(EXPERIMENT_OF[cfg.subcommand], cfg.outdir, overrides, ens, p["seed"],
                              cfg.fmt, echo=cfg.to_dict())
    result = run(config)
    for kind, path in result.paths.items():
        sys.stdout.write(f"{kind}: {path}\n")


COMMANDS = {
    "bell": cmd_bell,
    "measure": cmd_measure,
    "solve": cmd_solve,
    "baseline": cmd_baseline,
    "ensemble": cmd_ensemble,
    "resources": cmd_resources,
    "fig2-left": cmd_experiment,
    "fig2-right": cmd_experiment,
    "fig3": cmd_experiment,
    "error-growth": cmd_experiment,
}


def main(argv: list[str] | None = None) -> int:
    reconfigure = getattr(sys.stdout, "reconfigure", None)
    if reconfigure is not None:
        try:
            reconfigure(line_buffering=True)
        except (ValueError, OSError):
            pass
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg, explicit = resolve(args)
        COMMANDS[cfg.subcommand](cfg, explicit)
    except (UsageError, ConfigurationError, DomainError, ValidationError) as exc:
        sys.stderr.write(f"mfqsolve {args.subcommand}: error: {exc}\n")
        return 1
    except (MfqError, OSError) as exc:
        sys.stderr.write(f"mfqsolve {args.subcommand}: runtime error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
