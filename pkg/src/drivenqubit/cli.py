"""Command-line front end.

Subcommands: simulate, spectrum, plateau, sweep, compare. Every run is driven
by a flat ``key = value`` config file whose keys may be overridden by flags of
the same name (``--a-over-omega 19``). Times are written as omega*t and
frequencies as nu/omega.
"""

import argparse
import configparser
import csv
import math
import os
import re
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import cdt, chrw, plateau, spectrum
from .errors import ConvergenceError, DomainError, PreconditionError
from .special import bessel_j
from .exact import METHODS, BlochTrajectory, DEFAULT_K, DriveParams, propagate

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Invalid configuration; the message names the offending field."""


# --- config ---------------------------------------------------------------

_NUM = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*(\*?\s*pi)?\s*$")


def parse_number(text, name):
    """Float from text; accepts a trailing ``pi`` factor as in ``6.75pi``."""
    m = _NUM.match(str(text))
    if not m or (m.group(1) is None and m.group(2) is None):
        raise UsageError(f"{name}: cannot parse number {text!r}")
    value = float(m.group(1)) if m.group(1) is not None else 1.0
    return value * math.pi if m.group(2) else value


def parse_values(text, name):
    """Comma list of numbers, or ``start:stop:count`` for an inclusive linear range."""
    text = str(text).strip()
    if not text:
        raise UsageError(f"{name}: empty value")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"{name}: range must be start:stop:count")
        start, stop = parse_number(parts[0], name), parse_number(parts[1], name)
        try:
            count = int(parts[2])
        except ValueError:
            raise UsageError(f"{name}: range count must be an integer") from None
        if count < 1:
            raise UsageError(f"{name}: range count must be >= 1")
        return [float(v) for v in np.linspace(start, stop, count)]
    return [parse_number(p, name) for p in text.split(",") if p.strip()]


@dataclass
class RunConfig:
    delta_over_omega: list = field(default_factory=lambda: [1.0])
    a_over_omega: list = field(default_factory=lambda: [10.0])
    t_end_periods: float = 10.0
    samples_per_period: int = 256
    methods: list = field(default_factory=lambda: ["exact", "chrw2"])
    xi_mode: object = "solved"
    output_dir: str = "out"
    k_max: int = 2
    integrator_k: int = DEFAULT_K
    omega_over_delta: list = None
    jobs: int = 1

    def validate(self, single_point=True):
        if self.samples_per_period < 64:
            raise UsageError("samples_per_period: must be >= 64")
        if not self.t_end_periods > 0:
            raise UsageError("t_end_periods: must be > 0")
        if not self.methods:
            raise UsageError("methods: must be non-empty")
        for m in self.methods:
            if m not in METHODS:
                raise UsageError(f"methods: unknown method {m!r}")
        if not self.a_over_omega:
            raise UsageError("a_over_omega: empty grid")
        if any(a < 0 for a in self.a_over_omega):
            raise UsageError("a_over_omega: must be >= 0")
        if not self.delta_over_omega:
            raise UsageError("delta_over_omega: empty grid")
        if any(d < 0 for d in self.delta_over_omega):
            raise UsageError("delta_over_omega: must be >= 0")
        if self.omega_over_delta is not None and any(v <= 0 for v in self.omega_over_delta):
            raise UsageError("omega_over_delta: must be > 0")
        if self.k_max < 1:
            raise UsageError("k_max: must be >= 1")
        if self.integrator_k < 200:
            raise UsageError("integrator_k: must be >= 200")
        if self.jobs < 1:
            raise UsageError("jobs: must be >= 1")
        if single_point and (len(self.a_over_omega) != 1 or len(self.delta_over_omega) != 1):
            raise UsageError("a_over_omega/delta_over_omega: this command takes a single point")
        if self.xi_mode != "solved" and not (0 < self.xi_mode <= 1.5):
            raise UsageError("xi: fixed value must lie in (0, 1.5]")
        return self

    def xi_value(self):
        return None if self.xi_mode == "solved" else float(self.xi_mode)

    def params(self):
        return DriveParams(self.delta_over_omega[0], self.a_over_omega[0], 1.0)


# config key -> (attribute, parser)
def _int(name):
    def parse(text):
        try:
            return int(str(text).strip())
        except ValueError:
            raise UsageError(f"{name}: expected an integer, got {text!r}") from None
    return parse


def _xi(text):
    text = str(text).strip()
    return "solved" if text == "solved" else parse_number(text, "xi")


def _methods(text):
    return [m.strip() for m in str(text).split(",") if m.strip()]


CONFIG_KEYS = {
    "delta_over_omega": ("delta_over_omega", lambda v: parse_values(v, "delta_over_omega")),
    "a_over_omega": ("a_over_omega", lambda v: parse_values(v, "a_over_omega")),
    "omega_over_delta": ("omega_over_delta", lambda v: parse_values(v, "omega_over_delta")),
    "t_end_periods": ("t_end_periods", lambda v: parse_number(v, "t_end_periods")),
    "samples_per_period": ("samples_per_period", _int("samples_per_period")),
    "methods": ("methods", _methods),
    "xi": ("xi_mode", _xi),
    "out": ("output_dir", str),
    "output_dir": ("output_dir", str),
    "k_max": ("k_max", _int("k_max")),
    "integrator_k": ("integrator_k", _int("integrator_k")),
    "jobs": ("jobs", _int("jobs")),
}


def read_config_file(path):
    """Flat key=value file; an optional [section] header is ignored."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"config: cannot read {path}: {exc.strerror}") from None
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    if not re.search(r"^\s*\[", text, re.M):
        text = "[run]\n" + text
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise UsageError(f"config: {exc}") from None
    values = {}
    for section in parser.sections():
        values.update(parser[section])
    return values


def build_config(args):
    raw = read_config_file(args.config) if args.config else {}
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            raw[key] = flag
    cfg = RunConfig()
    for key, text in raw.items():
        if key not in CONFIG_KEYS:
            raise UsageError(f"{key}: unknown config key")
        attr, parse = CONFIG_KEYS[key]
        setattr(cfg, attr, parse(text))
    return cfg


# --- output helpers -------------------------------------------------------

def _fmt(v):
    return f"{v:.12g}"


def _write_rows(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _write_text(path, text):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)


def _sample_times(cfg):
    dt = 2.0 * math.pi / cfg.samples_per_period
    t_end = cfg.t_end_periods * 2.0 * math.pi
    return np.arange(int(math.floor(t_end / dt + 1e-9)) + 1) * dt, t_end


def run_method(params, method, cfg):
    """Trajectory for one method on the config's sample grid (omega = 1)."""
    times, t_end = _sample_times(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if method == "exact":
            return propagate(params, t_end, cfg.samples_per_period, k=cfg.integrator_k)
        if method in ("rwa", "chrw1", "chrw2", "even-harmonic"):
            return chrw.analytic_trajectory(params, method, times, xi=cfg.xi_value())
        return cdt.cdt_trajectory(params, method, times)


def _point_tag(a, d):
    return f"A{a:.6g}_D{d:.6g}".replace(".", "p")


# --- commands -------------------------------------------------------------

def cmd_simulate(cfg):
    cfg.validate()
    params = cfg.params()
    os.makedirs(cfg.output_dir, exist_ok=True)
    trajs = {}
    for method in cfg.methods:
        traj = run_method(params, method, cfg)
        trajs[method] = traj
        with open(os.path.join(cfg.output_dir, f"traj_{method}.csv"), "w", newline="",
                  encoding="utf-8") as fh:
            traj.write_csv(fh)
    lines = [f"a_over_omega={_fmt(params.a_over_omega)} delta_over_omega="
             f"{_fmt(params.delta_over_omega)} samples={len(next(iter(trajs.values())))}"]
    if len(trajs) > 1:
        first = next(iter(trajs.values()))
        header = ["t"] + [f"z_{m}" for m in trajs]
        rows = zip(first.times, *[t.z for t in trajs.values()])
        _write_rows(os.path.join(cfg.output_dir, "comparison.csv"), header, rows)
        if "exact" in trajs:
            ref = trajs["exact"].z
            lines.append("method,max_abs_dz_vs_exact,rms_dz_vs_exact")
            for m, t in trajs.items():
                if m != "exact":
                    d = t.z - ref
                    lines.append(f"{m},{_fmt(np.max(np.abs(d)))},{_fmt(np.sqrt(np.mean(d * d)))}")
    if "exact" in trajs:
        lines.append(f"exact_norm_drift={_fmt(trajs['exact'].norm_drift)}")
    _write_text(os.path.join(cfg.output_dir, "summary.txt"), "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_spectrum(cfg):
    cfg.validate()
    params = cfg.params()
    os.makedirs(cfg.output_dir, exist_ok=True)
    armchair = plateau.plateau_pattern(params) == "armchair"
    regime = "cdt" if armchair else "even"
    rp = None if armchair else chrw.renormalize(params, cfg.xi_value())
    predicted = spectrum.predicted_peaks(rp, regime, cfg.k_max)
    _write_rows(os.path.join(cfg.output_dir, "predicted_peaks.csv"), ["nu_over_omega"],
                [[p] for p in predicted])
    for method in cfg.methods:
        spectral = spectrum.fourier_spectrum(run_method(params, method, cfg))
        with open(os.path.join(cfg.output_dir, f"spectrum_{method}.csv"), "w", newline="",
                  encoding="utf-8") as fh:
            spectral.write_csv(fh)
        report = spectrum.match_peaks(spectral, predicted, tol_bins=2)
        _write_text(os.path.join(cfg.output_dir, f"match_{method}.txt"),
                    f"method {method} regime {regime}\n" + report.to_text())
    return EXIT_OK


def _plateau_point(params, cfg, out_dir, tag):
    pattern = plateau.plateau_pattern(params)
    xi = cfg.xi_value()
    if xi is None:
        xi = chrw.solve_xi(params) if params.delta > 0 and params.amplitude > 0 else 1.0
    detected = {}
    for method in cfg.methods:
        traj = run_method(params, method, cfg)
        report = plateau.detect_plateaus(traj, params, xi=xi)
        detected[method] = report
        with open(os.path.join(out_dir, f"plateau_{method}{tag}.csv"), "w", newline="",
                  encoding="utf-8") as fh:
            report.write_csv(fh)
    times, _ = _sample_times(cfg)
    if pattern == "armchair":
        levels = cdt.stair_levels(params)
        phi = cdt.phase_phi2(params, times)
        parity = np.rint(times / math.pi).astype(int) % 2
        overlay = np.where(parity == 0, levels.l1_corrected, levels.l2_corrected)
        _write_rows(os.path.join(out_dir, f"phase{tag}.csv"), ["t", "phi2", "level"],
                    zip(times, phi, overlay))
        kind, xi_bound = "odd", 1.0
    else:
        phi = chrw.phase_phi1(params, xi, times)
        delta_tilde = params.delta * bessel_j(0, params.amplitude * xi)
        anchor = delta_tilde * np.rint(times / math.pi) * math.pi
        _write_rows(os.path.join(out_dir, f"phase{tag}.csv"), ["t", "phi1", "anchor"],
                    zip(times, phi, anchor))
        kind, xi_bound = "even", xi
    offsets = np.linspace(-0.5 * math.pi, 0.5 * math.pi, 1001)[1:-1]
    g = plateau.deviation_g(params, xi_bound, kind, offsets)
    q = (plateau.envelope_bound(params, xi_bound, kind, offsets)
         if params.amplitude > 0 else np.full_like(offsets, np.inf))
    _write_rows(os.path.join(out_dir, f"envelope{tag}.csv"), ["t_offset", "g", "q", "inside"],
                [(o, gv, qv, str(bool(abs(gv) < qv or gv == qv == 0.0)).lower()) for o, gv, qv in zip(offsets, g, q)])
    return pattern, detected


def _mode(values):
    if not values:
        return ""
    vals, counts = np.unique(values, return_counts=True)
    return int(vals[np.argmax(counts)])


def cmd_plateau(cfg):
    cfg.validate(single_point=False)
    os.makedirs(cfg.output_dir, exist_ok=True)
    grid = [(a, d) for a in cfg.a_over_omega for d in cfg.delta_over_omega]
    rows = []
    for a, d in grid:
        params = DriveParams(d, a, 1.0)
        tag = "" if len(grid) == 1 else "_" + _point_tag(a, d)
        pattern, detected = _plateau_point(params, cfg, cfg.output_dir, tag)
        row = [a, d, plateau.predicted_oscillation_count(params), pattern]
        for m in cfg.methods:
            row.append(_mode(detected[m].counts))
        rows.append(row)
    header = ["a_over_omega", "delta_over_omega", "N", "pattern"] + [f"N_{m}" for m in cfg.methods]
    _write_rows(os.path.join(cfg.output_dir, "counts.csv"), header, rows)
    return EXIT_OK


SWEEP_HEADER = ["a_over_omega", "delta_over_omega", "xi", "delta_tilde", "a_tilde_chrw2",
                "rabi_tilde", "N"]


def sweep_row(point):
    a, d = point
    params = DriveParams(d, a, 1.0)
    rp = chrw.renormalize(params)
    return [a, d, rp.xi, rp.delta_tilde, rp.a_tilde_chrw2, rp.rabi_tilde,
            plateau.predicted_oscillation_count(params)]


def cmd_sweep(cfg):
    cfg.validate(single_point=False)
    deltas = cfg.delta_over_omega
    if cfg.omega_over_delta is not None:
        deltas = [1.0 / v for v in cfg.omega_over_delta]
    grid = sorted({(float(a), float(d)) for a in cfg.a_over_omega for d in deltas})
    if not grid:
        raise UsageError("grid: empty")
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(sweep_row, grid, chunksize=8))
    else:
        rows = [sweep_row(p) for p in grid]
    os.makedirs(cfg.output_dir, exist_ok=True)
    _write_rows(os.path.join(cfg.output_dir, "sweep.csv"), SWEEP_HEADER, rows)
    return EXIT_OK


def cmd_compare(files, out_path=None, t_max=None):
    """max and RMS z differences of each trajectory file against the first one."""
    if len(files) < 2:
        raise UsageError("files: compare needs at least two trajectory CSVs")
    trajs = []
    for path in files:
        try:
            with open(path, encoding="utf-8") as fh:
                trajs.append(BlochTrajectory.read_csv(fh))
        except (OSError, KeyError, ValueError) as exc:
            raise UsageError(f"files: cannot read trajectory {path}: {exc}") from None
    ref = trajs[0]
    lines = ["file,method,max_abs_dz,rms_dz"]
    for path, tr in zip(files[1:], trajs[1:]):
        if len(tr) != len(ref) or not np.allclose(tr.times, ref.times, rtol=1e-9, atol=1e-9):
            raise UsageError(f"files: {path} is not sampled on the same grid as {files[0]}")
        sel = np.ones(len(ref), bool) if t_max is None else ref.times <= t_max + 1e-12
        d = tr.z[sel] - ref.z[sel]
        lines.append(f"{path},{tr.method},{_fmt(np.max(np.abs(d)))},{_fmt(np.sqrt(np.mean(d * d)))}")
    text = "\n".join(lines) + "\n"
    if out_path:
        _write_text(out_path, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --- argument parsing -----------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _add_run_options(p):
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--methods", help="comma list, e.g. exact,chrw2")
    p.add_argument("--a-over-omega", dest="a_over_omega", help="A/omega (number, '6.75pi', list or a:b:n)")
    p.add_argument("--delta-over-omega", dest="delta_over_omega", help="Delta/omega")
    p.add_argument("--t-end-periods", dest="t_end_periods", help="record length in drive periods")
    p.add_argument("--samples-per-period", dest="samples_per_period", help="samples per drive period (>= 64)")
    p.add_argument("--xi", help="'solved' or a fixed value")
    p.add_argument("--k-max", dest="k_max", help="highest harmonic pair in peak predictions")
    p.add_argument("--integrator-k", dest="integrator_k", help="RK4 steps per fastest period (>= 200)")


def build_parser():
    parser = _Parser(prog="drivenqubit", description="Strongly driven two-level system toolkit.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, helptext in [("simulate", "trajectories for each method"),
                           ("spectrum", "Fourier spectra and peak matching"),
                           ("plateau", "plateau reports, phase dumps and envelope tables")]:
        _add_run_options(sub.add_parser(name, help=helptext))
    sw = sub.add_parser("sweep", help="renormalised parameters over an (A, Delta) grid")
    _add_run_options(sw)
    sw.add_argument("--omega-over-delta", dest="omega_over_delta", help="grid in omega/Delta instead")
    sw.add_argument("--jobs", help="worker processes")
    cmp_ = sub.add_parser("compare", help="z differences between trajectory CSVs")
    cmp_.add_argument("files", nargs="+")
    cmp_.add_argument("--out", help="write the table here instead of stdout")
    cmp_.add_argument("--t-max", dest="t_max", help="only compare omega*t <= this")
    return parser


COMMANDS = {"simulate": cmd_simulate, "spectrum": cmd_spectrum, "plateau": cmd_plateau,
            "sweep": cmd_sweep}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        if args.command == "compare":
            t_max = parse_number(args.t_max, "t_max") if args.t_max else None
            return cmd_compare(args.files, args.out, t_max)
        cfg = build_config(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, PreconditionError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
