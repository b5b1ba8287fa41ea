"""Command-line front end: config in, coefficient/trajectory artifacts out.

Modes
  coeffs               spectral density -> chain coefficient JSON
  single               single-excitation wavepacket transport -> CSV
  full                 spin-boson MPS dynamics -> CSV + run manifest
  thermalize-inspect   tabulate the (thermalized) density itself -> CSV

Configs are strict JSON: unknown keys are rejected and every error names
the offending parameter path.  Output files are written atomically and
named ``<mode>-<preset>-<hash12>`` where the hash covers the physics part
of the config (everything except the output block), so reruns into a
different directory produce identically named, byte-identical files.

Exit codes: 0 success, 1 config error, 2 numerical failure, 3 I/O error.
"""
from __future__ import annotations

import argparse
import hashlib
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import full_dynamics as fd
from .chainmap import (asymptotic_limits, default_node_count, discretize,
                       lightcone_length, recurrence_coefficients)
from .errors import NumericalError, ParameterError
from .single_excitation import (TridiagonalHamiltonian, default_fit_window,
                                fit_decay_rate, propagate)
from .spectral import Lorentzian, Ohmic, SpectralDensity, Tabulated

__all__ = ["RunConfig", "figure_presets", "preset_variants", "run", "main"]

MODES = ("coeffs", "single", "full", "thermalize-inspect")

_DYNAMICS_DEFAULTS = {"dt": 2e-4, "chi_max": 64, "svd_cutoff": 1e-10,
                      "stride": 5, "fock_dim": 8, "num_samples": 1001}


# ---------------------------------------------------------------------------
# config schema

def _check_keys(block: dict, path: str, required: tuple, optional: tuple = ()):
    for key in block:
        if key not in required and key not in optional:
            raise ParameterError(f"{path}.{key}: unknown key")
    for key in required:
        if key not in block:
            raise ParameterError(f"{path}.{key}: missing required key")


def _check_number(block: dict, path: str, key: str, *, integer=False):
    if key not in block:
        return
    val = block[key]
    ok = isinstance(val, int) if integer else isinstance(val, (int, float))
    if not ok or isinstance(val, bool):
        kind = "an integer" if integer else "a number"
        raise ParameterError(f"{path}.{key}: must be {kind}, got {val!r}")


_SPECTRAL_KEYS = {
    "lorentzian": (("family", "coupling", "width", "center"),
                   ("hard_cutoff", "temperature_K")),
    "ohmic": (("family", "coupling", "exponent", "cutoff"),
              ("hard_cutoff", "temperature_K")),
    "tabulated": (("family", "frequencies", "values"), ("temperature_K",)),
}


@dataclass
class RunConfig:
    """Validated run description; mirrors the JSON schema exactly."""

    mode: str
    spectral: dict
    chain: dict = field(default_factory=dict)
    dynamics: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    schema_version: int = 1
    preset: str | None = None

    def to_dict(self) -> dict:
        out = {"schema_version": self.schema_version, "mode": self.mode,
               "spectral": self.spectral}
        if self.chain:
            out["chain"] = self.chain
        if self.dynamics:
            out["dynamics"] = self.dynamics
        if self.output:
            out["output"] = self.output
        if self.preset is not None:
            out["preset"] = self.preset
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        return validate_config(raw)

    def content_hash(self) -> str:
        body = self.to_dict()
        body.pop("output", None)
        text = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:12]


def validate_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ParameterError("config: top level must be an object")
    _check_keys(raw, "config", ("mode", "spectral"),
                ("schema_version", "chain", "dynamics", "output", "preset"))
    if raw.get("schema_version", 1) != 1:
        raise ParameterError(
            f"config.schema_version: unsupported value {raw['schema_version']!r}")
    mode = raw["mode"]
    if mode not in MODES:
        raise ParameterError(f"config.mode: must be one of {MODES}, got {mode!r}")

    spectral = raw["spectral"]
    if not isinstance(spectral, dict):
        raise ParameterError("config.spectral: must be an object")
    family = spectral.get("family")
    if family not in _SPECTRAL_KEYS:
        raise ParameterError(
            f"spectral.family: must be one of {tuple(_SPECTRAL_KEYS)}, got {family!r}")
    req, opt = _SPECTRAL_KEYS[family]
    _check_keys(spectral, "spectral", req, opt)
    for key in ("coupling", "width", "center", "exponent", "cutoff",
                "hard_cutoff", "temperature_K"):
        _check_number(spectral, "spectral", key)

    chain = raw.get("chain", {})
    if chain:
        _check_keys(chain, "chain", (), ("n_sites", "n_nodes", "headroom"))
        for key in ("n_sites", "n_nodes"):
            if key in chain and chain[key] != "auto":
                _check_number(chain, "chain", key, integer=True)
        _check_number(chain, "chain", "headroom")

    dynamics = raw.get("dynamics", {})
    if dynamics:
        _check_keys(dynamics, "dynamics", (),
                    ("t_max", "delta", "dt", "chi_max", "svd_cutoff",
                     "stride", "fock_dim", "num_samples"))
        for key in ("t_max", "delta", "dt", "svd_cutoff"):
            _check_number(dynamics, "dynamics", key)
        for key in ("chi_max", "stride", "fock_dim", "num_samples"):
            _check_number(dynamics, "dynamics", key, integer=True)

    output = raw.get("output", {})
    if output:
        _check_keys(output, "output", (), ("directory", "formats"))
        formats = output.get("formats", ["csv", "json"])
        if (not isinstance(formats, list)
                or any(f not in ("csv", "json") for f in formats)):
            raise ParameterError(
                f"output.formats: entries must be 'csv' or 'json', got {formats!r}")

    # per-mode requirements
    if mode in ("coeffs", "single", "full") and "n_sites" not in chain:
        raise ParameterError(f"chain.n_sites: required for mode {mode} "
                             "(an integer or 'auto')")
    if mode in ("single", "full") and "t_max" not in dynamics:
        raise ParameterError(f"dynamics.t_max: required for mode {mode}")
    if mode == "full" and "delta" not in dynamics:
        raise ParameterError("dynamics.delta: required for mode full")
    if chain.get("n_sites") == "auto" and "t_max" not in dynamics:
        raise ParameterError(
            "chain.n_sites: 'auto' needs dynamics.t_max to size the light cone")

    return RunConfig(mode=mode, spectral=dict(spectral), chain=dict(chain),
                     dynamics=dict(dynamics), output=dict(output),
                     schema_version=raw.get("schema_version", 1),
                     preset=raw.get("preset"))


def _build_density(spectral: dict) -> SpectralDensity:
    family = spectral["family"]
    T = spectral.get("temperature_K", 0.0)
    if family == "lorentzian":
        sd = Lorentzian(spectral["coupling"], spectral["width"],
                        spectral["center"],
                        hard_cutoff=spectral.get("hard_cutoff",
                                                 10.0 * spectral["center"]))
    elif family == "ohmic":
        sd = Ohmic(spectral["coupling"], spectral["exponent"],
                   spectral["cutoff"],
                   hard_cutoff=spectral.get("hard_cutoff",
                                            10.0 * spectral["cutoff"]))
    else:
        sd = Tabulated(np.asarray(spectral["frequencies"], dtype=float),
                       np.asarray(spectral["values"], dtype=float))
    if T > 0:
        sd = sd.thermalize(T)
    return sd


# ---------------------------------------------------------------------------
# presets

def _preset_catalog() -> dict:
    cat = {}

    def single(spectral, name):
        cat[name] = {
            "schema_version": 1, "mode": "single", "preset": name,
            "spectral": spectral,
            "chain": {"n_sites": "auto", "n_nodes": "auto"},
            "dynamics": {"t_max": 0.2, "num_samples": 2001},
        }

    def full(spectral, name, t_max, fock_dim):
        cat[name] = {
            "schema_version": 1, "mode": "full", "preset": name,
            "spectral": spectral,
            "chain": {"n_sites": "auto", "n_nodes": "auto"},
            "dynamics": {"t_max": t_max, "delta": 70.0, "dt": 2e-4,
                         "chi_max": 64, "svd_cutoff": 1e-10, "stride": 10,
                         "fock_dim": fock_dim},
        }

    def lorentz(gamma, T):
        spec = {"family": "lorentzian", "coupling": 60.0, "width": gamma,
                "center": 100.0, "hard_cutoff": 1000.0}
        if T:
            spec["temperature_K"] = float(T)
        return spec

    def ohmic(s, T):
        spec = {"family": "ohmic", "coupling": 1.0, "exponent": s,
                "cutoff": 100.0, "hard_cutoff": 1000.0}
        if T:
            spec["temperature_K"] = float(T)
        return spec

    for g in (0.001, 1.0, 10.0):
        single(lorentz(g, 0), f"lorentz-T0-gamma{g:g}")
        for T in (77, 300):
            single(lorentz(g, T), f"lorentz-finiteT-gamma{g:g}-T{T}")
    for s in (0.5, 1.0, 2.0):
        single(ohmic(s, 0), f"ohmic-T0-s{s:g}")
        single(ohmic(s, 300), f"ohmic-finiteT-s{s:g}-T300")
    for T in (0, 77, 300):
        full(lorentz(0.001, T), f"full-lorentz-gamma0.001-T{T}", 0.03, 12)
        for s in (0.5, 1.0, 2.0):
            d = 12 if (s < 1.0 and T > 0) else 8
            full(ohmic(s, T), f"full-ohmic-s{s:g}-T{T}", 0.02, d)
    return cat


_PRESETS = _preset_catalog()
_FAMILIES = ("lorentz-T0", "lorentz-finiteT", "ohmic-T0", "ohmic-finiteT",
             "full-lorentz", "full-ohmic")


def preset_variants(name: str) -> list[str]:
    """All fully qualified preset names a family (or variant) name covers."""
    if name in _PRESETS:
        return [name]
    hits = [k for k in _PRESETS if k.startswith(name + "-")]
    if name in _FAMILIES and hits:
        return sorted(hits)
    raise ParameterError(
        f"unknown preset {name!r}; families: {', '.join(_FAMILIES)}")


def figure_presets(name: str) -> list[RunConfig]:
    """RunConfigs for a preset name, one per parameter variant."""
    return [validate_config(_PRESETS[v]) for v in preset_variants(name)]


# ---------------------------------------------------------------------------
# pipeline

def _atomic_write(path: Path, text: str):
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    try:
        tmp.write_text(text)
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _resolve_chain(config: RunConfig, sd: SpectralDensity):
    n_sites = config.chain.get("n_sites", "auto")
    if n_sites == "auto":
        n_sites = lightcone_length(sd.support, config.dynamics["t_max"])
    n_nodes = config.chain.get("n_nodes", "auto")
    headroom = config.chain.get("headroom", 4.0)
    if n_nodes == "auto":
        n_nodes = default_node_count(n_sites, headroom)
    measure = discretize(sd, n_nodes)
    chain = recurrence_coefficients(measure, n_sites, headroom=headroom)
    return chain, n_sites, n_nodes


def _dynamics_value(config: RunConfig, key: str):
    return config.dynamics.get(key, _DYNAMICS_DEFAULTS[key])


def run(config: RunConfig, out_dir=None) -> int:
    """Execute one validated config; returns a category exit code."""
    try:
        paths = _execute(config, out_dir)
    except ParameterError as exc:
        print(f"error (config): {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"error (numerical): {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error (io): {exc}", file=sys.stderr)
        return 3
    for p in paths:
        print(f"[write] {p}")
    return 0


def _execute(config: RunConfig, out_dir=None) -> list:
    directory = Path(out_dir or config.output.get("directory", "."))
    directory.mkdir(parents=True, exist_ok=True)
    formats = config.output.get("formats", ["csv", "json"])
    stem = f"{config.mode}-{config.preset or 'config'}-{config.content_hash()}"
    csv_path = directory / (stem + ".csv")
    json_path = directory / (stem + ".json")

    sd = _build_density(config.spectral)
    print(f"[spectral] {config.spectral['family']} support="
          f"({sd.support[0]:g}, {sd.support[1]:g}) T={sd.temperature_K:g} K")

    written = []
    if config.mode == "thermalize-inspect":
        lo, hi = sd.support
        grid = np.linspace(lo, hi, 2001)
        vals = sd.evaluate(grid)
        if "csv" in formats:
            buf = io.StringIO()
            np.savetxt(buf, np.column_stack([grid, vals]), fmt="%.17g",
                       delimiter=",", header="omega,J", comments="")
            _atomic_write(csv_path, buf.getvalue())
            written.append(csv_path)
        if "json" in formats:
            summary = {
                "config": config.to_dict(),
                "support": list(sd.support),
                "mass_grid": float(np.trapezoid(vals, grid)),
                "max_value": float(vals.max()),
            }
            if sd.temperature_K > 0:
                w = np.linspace(1e-3 * hi, 0.999 * hi, 301)
                residual = np.abs(sd.evaluate(w) - sd.evaluate(-w)
                                  - sd.bare(w)).max()
                summary["detailed_balance_residual"] = float(residual)
            _atomic_write(json_path, _dump_json(summary))
            written.append(json_path)
        return written

    chain, n_sites, n_nodes = _resolve_chain(config, sd)
    w_inf, k_inf = asymptotic_limits(sd.support)
    print(f"[chain] N={n_sites} M={n_nodes} kappa0={chain.kappa0:.6g} "
          f"asymptotes=({w_inf:g}, {k_inf:g})")

    if config.mode == "coeffs":
        if "csv" in formats:
            lines = ["n,omega_n,kappa_n"]
            for i, w in enumerate(chain.omegas, start=1):
                k = ("%.17g" % chain.kappas[i - 1]
                     if i <= len(chain.kappas) else "")
                lines.append("%d,%.17g,%s" % (i, w, k))
            _atomic_write(csv_path, "\n".join(lines) + "\n")
            written.append(csv_path)
        if "json" in formats:
            payload = chain.to_dict()
            payload["config"] = config.to_dict()
            _atomic_write(json_path, _dump_json(payload))
            written.append(json_path)
        return written

    if config.mode == "single":
        num = _dynamics_value(config, "num_samples")
        times = np.linspace(0.0, config.dynamics["t_max"], num)
        h = TridiagonalHamiltonian.from_chain(chain)
        psi0 = np.zeros(len(h))
        psi0[0] = 1.0
        traj = propagate(h, psi0, times)
        derived = {"chain_length": n_sites, "node_count": n_nodes,
                   "kappa0": chain.kappa0, "asymptotic_frequency": w_inf,
                   "asymptotic_hopping": k_inf}
        peaks = sd.peaks()
        if len(peaks) == 1 and config.spectral["family"] == "lorentzian":
            gamma = config.spectral["width"]
            window = default_fit_window(gamma, times[-1])
            rate = fit_decay_rate(times, traj.populations[:, 0], window)
            derived["fitted_decay_rate"] = rate
            print(f"[single] fitted decay rate = {rate:.6g}")
        if "csv" in formats:
            buf = io.StringIO()
            traj.to_csv(buf)
            _atomic_write(csv_path, buf.getvalue())
            written.append(csv_path)
        if "json" in formats:
            manifest = {"config": config.to_dict(), "derived": derived}
            _atomic_write(json_path, _dump_json(manifest))
            written.append(json_path)
        return written

    # mode == "full"
    model = fd.SpinBosonModel(delta=config.dynamics["delta"], chain=chain,
                              fock_dim=_dynamics_value(config, "fock_dim"))
    controls = fd.EvolutionControls(
        t_max=config.dynamics["t_max"],
        dt=_dynamics_value(config, "dt"),
        chi_max=_dynamics_value(config, "chi_max"),
        svd_cutoff=_dynamics_value(config, "svd_cutoff"),
        stride=_dynamics_value(config, "stride"))
    record = fd.evolve(model, controls)
    print(f"[full] samples={record.times.size} max_bond={record.max_bond.max()} "
          f"converged={record.converged}")
    if "csv" in formats:
        buf = io.StringIO()
        record.to_csv(buf)
        _atomic_write(csv_path, buf.getvalue())
        written.append(csv_path)
    if "json" in formats:
        manifest = record.manifest_dict()
        manifest["config"] = config.to_dict()
        manifest["derived"] = {"chain_length": n_sites, "node_count": n_nodes,
                               "kappa0": chain.kappa0}
        _atomic_write(json_path, _dump_json(manifest))
        written.append(json_path)
    return written


# ---------------------------------------------------------------------------
# entry point

def _run_raw(raw: dict, out_dir) -> int:
    # module-level so ProcessPoolExecutor can pickle the call
    try:
        config = validate_config(raw)
    except ParameterError as exc:
        print(f"error (config): {exc}", file=sys.stderr)
        return 1
    return run(config, out_dir)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse default exits 2, which this tool reserves for numerics
        self.print_usage(sys.stderr)
        print(f"error (config): {message}", file=sys.stderr)
        raise SystemExit(1)


def main(argv=None) -> int:
    parser = _Parser(prog="chainmapper",
                     description="Chain mapping and dynamics runner.")
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", help="path to a JSON run config")
    parser.add_argument("--preset", help="preset (family or variant) name")
    parser.add_argument("--out", help="output directory override")
    parser.add_argument("--jobs", type=int, default=1,
                        help="parallel workers for preset sweeps")
    args = parser.parse_args(argv)

    if (args.config is None) == (args.preset is None):
        print("error (config): exactly one of --config or --preset is required",
              file=sys.stderr)
        return 1
    if args.jobs < 1:
        print(f"error (config): --jobs must be >= 1, got {args.jobs}",
              file=sys.stderr)
        return 1

    if args.config is not None:
        try:
            raw = json.loads(Path(args.config).read_text())
        except OSError as exc:
            print(f"error (io): {exc}", file=sys.stderr)
            return 3
        except json.JSONDecodeError as exc:
            print(f"error (config): {args.config}: {exc}", file=sys.stderr)
            return 1
        raws = [raw]
    else:
        try:
            raws = [_PRESETS[v] for v in preset_variants(args.preset)]
        except ParameterError as exc:
            print(f"error (config): {exc}", file=sys.stderr)
            return 1

    for raw in raws:
        if raw.get("mode") != args.mode:
            print(f"error (config): config.mode: {raw.get('mode')!r} does not "
                  f"match requested mode {args.mode!r}", file=sys.stderr)
            return 1

    if args.jobs == 1 or len(raws) == 1:
        codes = [_run_raw(raw, args.out) for raw in raws]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            codes = list(pool.map(_run_raw, raws, [args.out] * len(raws)))
    return max(codes, default=0)


if __name__ == "__main__":
    sys.exit(main())
