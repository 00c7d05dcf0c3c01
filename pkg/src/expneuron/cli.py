"""Command-line front end.

Every subcommand writes ``<tag>.csv`` (data) and ``<tag>.json`` (manifest and
scalar results) into the output directory and echoes the JSON document on
stdout.  ``--plot`` additionally renders ``<tag>.png``.

Exit codes: 0 success, 1 usage error, 2 domain or validity error.

Parameters are resolved flag > ``--config`` file > built-in default.  The
config file is either ``key = value`` lines or a JSON document written by an
earlier run, whose manifest parameters are reused, so

    expneuron sweep --config out/sweep.json --out rerun

reproduces a previous sweep exactly.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import __version__
from .bif_ns import (CurveClass, detect_invariant_curve, detect_period, ns_analysis,
                     ns_threshold, predict_curve_radius)
from .bif_pd import find_period2, pd_coefficient, reduced_map
from .equilibria import classify_multiplier, fixed_point_A, fixed_points_m0, linear_data
from .errors import ExpNeuronError, NoCycleFoundError
from .map_core import MapParams, State
from .serialize import RunManifest, read_json, write_csv, write_json
from .sim_engine import (DEFAULT_OSC_TOLERANCE, DEFAULT_SPIKE_THRESHOLD, SimConfig,
                         classify_regime, detect_spikes, simulate, subthreshold_band, sweep)
from .stochastic import (GENERATOR_VERSION, NoiseConfig, NoiseTarget, noise_response,
                         simulate_noisy)

OUTPUT_DIR_ENV = "EXPNEURON_OUTPUT_DIR"

_REQUIRED = object()


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with status 1."""

    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _float_list(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


@dataclass(frozen=True)
class Opt:
    name: str
    type: Callable[[Any], Any]
    default: Any = _REQUIRED
    help: str = ""
    choices: Optional[Sequence[str]] = None
    switch: bool = False

    @property
    def dest(self) -> str:
        return self.name.replace("-", "_")


def _model(a=_REQUIRED, s=_REQUIRED, m=_REQUIRED):
    return [Opt("a", float, a, "map parameter a"),
            Opt("s", float, s, "map parameter s"),
            Opt("m", float, m, "slow-time rate m")]


def _run_opts(transient=10_000, record=10_000):
    return [Opt("transient", int, transient, "steps discarded before recording"),
            Opt("record", int, record, "steps recorded"),
            Opt("x0", float, None, "initial x (default: fixed point nudged by 0.01)"),
            Opt("y0", float, None, "initial y"),
            Opt("with-y", _bool, False, "also record y", switch=True)]


_SPIKE_OPTS = [Opt("spike-threshold", float, DEFAULT_SPIKE_THRESHOLD, "spike crossing level"),
               Opt("osc-tolerance", float, DEFAULT_OSC_TOLERANCE, "x range counted as silence")]

_TARGETS = [t.value for t in NoiseTarget]

COMMANDS: dict[str, tuple[str, list[Opt]]] = {
    "simulate": ("iterate the full map",
                 _model() + _run_opts() + _SPIKE_OPTS),
    "sweep": ("bifurcation diagram over one parameter",
              [Opt("axis", str, _REQUIRED, "parameter to vary", choices=("a", "s", "m")),
               Opt("lo", float, _REQUIRED, "first value"),
               Opt("hi", float, _REQUIRED, "last value"),
               Opt("n", int, _REQUIRED, "number of values")]
              + _model(None, None, None) + _run_opts() + _SPIKE_OPTS),
    "fixed-points": ("fixed points for m = 0 and the point A with its multipliers",
                     [Opt("a", float, _REQUIRED, "map parameter a"),
                      Opt("Y0", float, None, "frozen slow variable for the m = 0 analysis"),
                      Opt("s", float, None, "map parameter s (for A)"),
                      Opt("m", float, None, "slow-time rate m (for A)")]),
    "pd": ("period-doubling analysis", [
        Opt("a", float, _REQUIRED, "map parameter a"),
        Opt("s", float, _REQUIRED, "map parameter s"),
        Opt("m", float, None, "evaluate the reduced map and search a 2-cycle at this m"),
        Opt("radius", float, None, "seed distance for the 2-cycle search")]),
    "ns": ("Neimark-Sacker analysis", [
        Opt("s", float, _REQUIRED, "map parameter s"),
        Opt("m", float, _REQUIRED, "slow-time rate m"),
        Opt("a", float, None, "predict the curve radius at this a")]),
    "curve": ("detect the invariant curve of the shifted map",
              _model() + [Opt("transient", int, 100_000, "steps discarded"),
                          Opt("sample", int, 10_000, "steps kept"),
                          Opt("x0", float, 0.01, "initial shifted x"),
                          Opt("y0", float, 0.0, "initial shifted y")]),
    "noise": ("iterate the map with Gaussian noise",
              _model() + [Opt("sigma", float, _REQUIRED, "noise amplitude"),
                          Opt("seed", int, 0, "generator seed"),
                          Opt("target", str, NoiseTarget.SLOW_ONLY.value, "perturbed equation",
                              choices=_TARGETS)]
              + _run_opts() + _SPIKE_OPTS),
    "noise-response": ("spike statistics versus noise level",
                       _model() + [Opt("sigmas", _float_list, _REQUIRED, "comma-separated sigmas"),
                                   Opt("n-seeds", int, 20, "seeds per sigma"),
                                   Opt("seed", int, 0, "master seed"),
                                   Opt("target", str, NoiseTarget.SLOW_ONLY.value,
                                       "perturbed equation", choices=_TARGETS)]
                       + _run_opts() + _SPIKE_OPTS),
}

_PARALLEL = {"sweep", "noise-response"}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="expneuron",
                     description="Dynamics and bifurcation analysis of the exponential-branch neuron map.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    for name, (doc, opts) in COMMANDS.items():
        sp = sub.add_parser(name, help=doc, description=doc)
        for o in opts:
            flag = f"--{o.name}"
            shown = "required" if o.default is _REQUIRED else f"default {o.default}"
            if o.switch:
                sp.add_argument(flag, dest=o.dest, action="store_const", const=True,
                                default=None, help=f"{o.help}")
            else:
                sp.add_argument(flag, dest=o.dest, type=o.type, choices=o.choices,
                                default=None, help=f"{o.help} ({shown})")
        sp.add_argument("--config", type=Path, help="key=value file or earlier JSON output")
        sp.add_argument("--out", type=Path, default=None,
                        help=f"output directory (default ${OUTPUT_DIR_ENV} or the current one)")
        sp.add_argument("--tag", default=None, help="output file stem (default: command name)")
        sp.add_argument("--plot", action="store_true", help="also write a PNG figure")
        if name in _PARALLEL:
            sp.add_argument("--jobs", type=int, default=None,
                            help="worker threads (default: all cores)")
    return parser


def read_config(path: Path) -> dict[str, Any]:
    """Parameters from a ``key = value`` file or from a previous JSON output."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        manifest, _ = read_json(path)
        return dict(manifest.params)
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def resolve_params(command: str, ns: argparse.Namespace) -> dict[str, Any]:
    """Merge defaults, config file and flags (in increasing priority)."""
    opts = COMMANDS[command][1]
    known = {o.dest: o for o in opts}
    params = {o.dest: o.default for o in opts}
    if ns.config is not None:
        for k, v in read_config(ns.config).items():
            o = known.get(k)
            if o is None:
                raise UsageError(f"unknown key {k!r} in {ns.config}")
            try:
                params[k] = None if v is None else o.type(v)
            except (TypeError, ValueError) as exc:
                raise UsageError(f"bad value for {k!r} in {ns.config}: {exc}") from None
            if o.choices and params[k] is not None and params[k] not in o.choices:
                raise UsageError(f"{k!r} must be one of {', '.join(o.choices)}")
    for o in opts:
        v = getattr(ns, o.dest, None)
        if v is not None:
            params[o.dest] = v
    missing = [f"--{o.name}" for o in opts if params[o.dest] is _REQUIRED]
    if missing:
        raise UsageError(f"missing required option(s): {' '.join(missing)}")
    return params


def _initial(params) -> Optional[State]:
    x0, y0 = params.get("x0"), params.get("y0")
    if x0 is None and y0 is None:
        return None
    if x0 is None or y0 is None:
        raise UsageError("--x0 and --y0 must be given together")
    return State(x0, y0)


def _sim_config(params) -> SimConfig:
    return SimConfig(initial=_initial(params), n_transient=params["transient"],
                     n_record=params["record"], record_y=bool(params["with_y"]))


@dataclass
class Output:
    header: list[str]
    rows: Any
    results: dict
    seeds: list
    generator: Optional[str] = None
    plot: Optional[Callable[[Path], Any]] = None


def _trajectory_output(t, params, results, seeds=(), generator=None, title=""):
    first = params["transient"] + 1
    steps = np.arange(first, first + len(t))
    if t.ys is not None:
        header, rows = ["step", "x", "y"], zip(steps, t.xs, t.ys)
    else:
        header, rows = ["step", "x"], zip(steps, t.xs)
    train = detect_spikes(t, params["spike_threshold"])
    results.update(
        regime=classify_regime(t, params["spike_threshold"], params["osc_tolerance"]),
        escaped=t.escaped,
        n_recorded=len(t),
        x_min=float(t.xs.min()) if len(t) else None,
        x_max=float(t.xs.max()) if len(t) else None,
        n_spikes=len(train),
        n_bursts=int(np.sum(train.crossings >= 2)),
        spike_steps=(train.spike_indices + first).tolist(),
    )

    def plot(path):
        from .plotting import plot_series
        plot_series(path, steps, t.xs, title)

    return Output(header, rows, results, list(seeds), generator, plot)


def _cmd_simulate(params, jobs):
    p = MapParams(params["a"], params["s"], params["m"])
    t = simulate(p, _sim_config(params))
    return _trajectory_output(t, params, {}, title=f"a={p.a} s={p.s} m={p.m}")


def _cmd_sweep(params, jobs):
    axis = params["axis"]
    base = {k: params[k] for k in ("a", "s", "m")}
    base[axis] = params["lo"] if base[axis] is None else base[axis]
    missing = [f"--{k}" for k, v in base.items() if v is None]
    if missing:
        raise UsageError(f"missing required option(s): {' '.join(missing)}")
    p = MapParams(**base)
    res = sweep(p, axis, params["lo"], params["hi"], params["n"], _sim_config(params),
                jobs=jobs, spike_threshold=params["spike_threshold"],
                osc_tolerance=params["osc_tolerance"])
    counts: dict[str, int] = {}
    for r in res.regimes:
        counts[r.value] = counts.get(r.value, 0) + 1
    band = subthreshold_band(res)
    results = {"subthreshold_band": list(band) if band else None,
               "regime_counts": counts, "n_escaped": int(res.escaped.sum())}

    def plot(path):
        from .plotting import plot_sweep
        plot_sweep(path, axis, res.values, res.x_min, res.x_max)

    rows = zip(res.values, res.x_min, res.x_max, res.regimes)
    return Output([axis, "x_min", "x_max", "regime"], rows, results, [], None, plot)


def _cmd_fixed_points(params, jobs):
    a, Y0, s, m = params["a"], params["Y0"], params["s"], params["m"]
    if Y0 is None and (s is None or m is None):
        raise UsageError("give --Y0, or both --s and --m")
    header = ["point", "x", "y", "multiplier_re", "multiplier_im", "stability"]
    rows, results = [], {}
    if Y0 is not None:
        rep = fixed_points_m0(a, Y0)
        results["m0"] = rep
        for i, fp in enumerate(rep.points, 1):
            rows.append([f"X{i}", fp.X, Y0, fp.multiplier, 0.0, fp.stability])
    if s is not None and m is not None:
        p = MapParams(a, s, m)
        A = fixed_point_A(p)
        lin = linear_data(p)
        results["A"] = A
        results["linear"] = lin
        for name, lam in (("A:lambda_plus", lin.lambda_plus), ("A:lambda_minus", lin.lambda_minus)):
            lam = complex(lam)
            rows.append([name, A.x, A.y, lam.real, lam.imag, classify_multiplier(abs(lam))])
    return Output(header, rows, results, [])


def _cmd_pd(params, jobs):
    a, s, m = params["a"], params["s"], params["m"]
    pa = pd_coefficient(a, s)
    cm = pa.center_manifold
    table = [("m0", pa.m0), ("lambda3", pa.lambda3), ("sign_s", pa.sign_s),
             ("c0_cm", pa.c0_cm), ("c0_inv", pa.c0_inv), ("dbeta_dm_at_m0", pa.dbeta_dm_at_m0),
             ("b1", cm.b1), ("b2", cm.b2), ("b3", cm.b3),
             ("c1", cm.c1), ("c2", cm.c2), ("c3", cm.c3)]
    results: dict[str, Any] = {"analysis": pa}
    if m is not None:
        rm = reduced_map(a, s, m)
        b = pa.beta(m)
        table += [("m", m), ("sigma1", rm.sigma1), ("sigma2", rm.sigma2),
                  ("sigma3", rm.sigma3), ("beta", b)]
        results.update(m=m, reduced_map=rm, beta=b)
        try:
            cyc = find_period2(MapParams(a, s, m), params["radius"])
            results["period2"] = cyc
            table += [("period2_x1", cyc.x1.x), ("period2_y1", cyc.x1.y),
                      ("period2_x2", cyc.x2.x), ("period2_y2", cyc.x2.y),
                      ("period2_amplitude", cyc.amplitude)]
        except NoCycleFoundError as exc:
            results["period2"] = None
            results["period2_error"] = str(exc)
    return Output(["name", "value"], table, results, [])


def _cmd_ns(params, jobs):
    s, m, a = params["s"], params["m"], params["a"]
    an = ns_analysis(s, m)
    results: dict[str, Any] = {
        "a_ns": an.a_ns, "d0": an.d0, "d0_alt": an.d0_alt, "theta0": an.theta0,
        "nondegenerate": an.nondegenerate, "analysis": an}
    rows = [("a_ns", an.a_ns, 0.0), ("theta0", an.theta0, 0.0), ("h0", an.h0, 0.0),
            ("omega0", an.omega0, 0.0), ("mu0", an.mu0.real, an.mu0.imag)]
    for name in ("g20", "g11", "g02", "g21", "c1_0"):
        v = getattr(an, name)
        if v is not None:
            rows.append((name, complex(v).real, complex(v).imag))
    for name in ("d0", "d0_alt"):
        v = getattr(an, name)
        if v is not None:
            rows.append((name, v, 0.0))
    if a is not None:
        r = predict_curve_radius(s, m, a)
        results["a"] = a
        results["predicted_radius"] = r
        rows.append(("predicted_radius", r, 0.0))
    return Output(["name", "re", "im"], rows, results, [])


def _cmd_curve(params, jobs):
    p = MapParams(params["a"], params["s"], params["m"])
    c = detect_invariant_curve(p, params["transient"], params["sample"],
                               State(params["x0"], params["y0"]))
    a_ns = ns_threshold(p.s, p.m).a_ns
    results = {"classification": c.classification, "mean_radius": c.mean_radius,
               "rotation_number": c.rotation_number, "a_ns": a_ns,
               "offset": p.a - a_ns, "n_sampled": int(c.xs.size)}
    if c.classification is CurveClass.CLOSED_CURVE:
        results["period"] = detect_period(c)
    first = params["transient"] + 1
    rows = zip(np.arange(first, first + c.xs.size), c.xs, c.ys)

    def plot(path):
        from .plotting import plot_phase
        plot_phase(path, c.xs, c.ys, f"{c.classification.value} a={p.a}")

    return Output(["step", "x", "y"], rows, results, [], None, plot)


def _cmd_noise(params, jobs):
    p = MapParams(params["a"], params["s"], params["m"])
    nz = NoiseConfig(params["sigma"], params["seed"], NoiseTarget(params["target"]))
    t = simulate_noisy(p, nz, _sim_config(params))
    return _trajectory_output(t, params, {"noise_draws": t.noise_draws}, [params["seed"]],
                              GENERATOR_VERSION, f"sigma={nz.sigma} seed={params['seed']}")


def _cmd_noise_response(params, jobs):
    p = MapParams(params["a"], params["s"], params["m"])
    nr = noise_response(p, params["sigmas"], params["n_seeds"], _sim_config(params),
                        master_seed=params["seed"], target=NoiseTarget(params["target"]),
                        spike_threshold=params["spike_threshold"],
                        osc_tolerance=params["osc_tolerance"], jobs=jobs)
    results = {"regime": nr.regime, "spike_rate": nr.spike_rate,
               "burst_fraction": nr.burst_fraction, "spike_counts": nr.spike_counts,
               "seed_regimes": nr.seed_regimes,
               "seed_derivation": "SeedSequence(seed, spawn_key=(sigma_index, seed_index))"}
    rows = zip(nr.sigmas, nr.spike_rate, nr.regime, nr.burst_fraction)

    def plot(path):
        from .plotting import plot_noise_response
        plot_noise_response(path, nr.sigmas, nr.spike_rate, nr.burst_fraction)

    return Output(["sigma", "spike_rate", "regime", "burst_fraction"], rows, results,
                  [params["seed"]], GENERATOR_VERSION, plot)


_HANDLERS = {
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "fixed-points": _cmd_fixed_points,
    "pd": _cmd_pd,
    "ns": _cmd_ns,
    "curve": _cmd_curve,
    "noise": _cmd_noise,
    "noise-response": _cmd_noise_response,
}


def _output_dir(ns) -> Path:
    if ns.out is not None:
        return ns.out
    return Path(os.environ.get(OUTPUT_DIR_ENV) or ".")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    command = ns.command
    try:
        params = resolve_params(command, ns)
        jobs = getattr(ns, "jobs", None)
        out = _HANDLERS[command](params, jobs)
    except UsageError as exc:
        print(f"expneuron {command}: error: {exc}", file=sys.stderr)
        return 1
    except ExpNeuronError as exc:
        print(f"expneuron {command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2

    outdir = _output_dir(ns)
    tag = ns.tag or command
    manifest = RunManifest(command=command, params=params, seeds=out.seeds,
                           generator=out.generator)
    write_csv(outdir / f"{tag}.csv", out.header, out.rows)
    jpath = write_json(outdir / f"{tag}.json", manifest, out.results)
    if ns.plot and out.plot is not None:
        out.plot(outdir / f"{tag}.png")
    sys.stdout.write(jpath.read_text(encoding="utf-8"))
    return 0


def run() -> None:
    sys.exit(main())
