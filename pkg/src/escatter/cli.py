"""Command-line harness: single points and sweeps over the entropy
pipelines, emitted as CSV or JSON tables.

Determinism contract: for a fixed configuration the output bytes are
identical run-to-run and across thread counts — workers only compute
per-row values, assembly is always in input order, and the header's
config hash covers only physics parameters (not threads, output path or
format).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import __version__
from .amplitudes import SpinChannel
from .density_matrix import build_meridian_matrix, eigen_spectrum, von_neumann_entropy
from .entropy import shannon_ring_discrete, sweep_energies
from .errors import NumericalError
from .geometry import GridKind
from .kinematics import make_context
from .spin import entropy_antiparallel, entropy_parallel, equator_entropies, postselect_range_sweep

COMMANDS = ("spinless-sweep", "sphere-sweep", "vn-compare", "spin-sweep",
            "postselect-range", "equator")

_GEOMETRIES = {
    "rings": GridKind.RINGS,
    "sphere": GridKind.SPHERE_PIXELS,
    "meridian": GridKind.MERIDIAN,
    "equator": GridKind.EQUATOR_RING,
}

_CHANNELS = {
    "spinless": SpinChannel.SPINLESS,
    "parallel": SpinChannel.PARALLEL,
    "antiparallel": SpinChannel.ANTIPARALLEL,
    "distinguishable": SpinChannel.DISTINGUISHABLE,
}

# default acceptance half-angles for postselect-range (radians)
_DEFAULT_THETA_R = (0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0, 1.2, 1.4, 1.5)


class ConfigError(Exception):
    """Invalid configuration; maps to exit code 2."""


@dataclass
class RunConfig:
    command: str
    e_list: list = field(default_factory=lambda: [5.0])  # eV
    l_nm: float = 100.0
    k_scale: float = 1.0
    grid_cap: int = 4096
    n_grid: int = 512          # vn-compare matrix dimension
    n_cells: list = field(default_factory=lambda: [3140])  # equator cells
    channel: str = "spinless"
    geometry: str = "rings"
    theta_r: list = field(default_factory=lambda: list(_DEFAULT_THETA_R))
    out: str | None = None
    format: str = "csv"
    threads: int = 0           # 0 = auto

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not self.e_list:
            raise ConfigError("energy list is empty")
        for e in self.e_list:
            if not (isinstance(e, float) and e > 0.0 and math.isfinite(e)):
                raise ConfigError(f"energies must be positive, got {e!r}")
        if not (self.l_nm > 0.0 and math.isfinite(self.l_nm)):
            raise ConfigError(f"packet size must be positive, got {self.l_nm!r}")
        if not (self.k_scale > 0.0 and math.isfinite(self.k_scale)):
            raise ConfigError(f"k-scale must be positive, got {self.k_scale!r}")
        if self.grid_cap < 2:
            raise ConfigError(f"grid cap must be >= 2, got {self.grid_cap}")
        if self.n_grid < 2:
            raise ConfigError(f"n-grid must be >= 2, got {self.n_grid}")
        if not self.n_cells or any(n < 1 for n in self.n_cells):
            raise ConfigError(f"n-cells must be positive, got {self.n_cells!r}")
        if self.channel not in _CHANNELS:
            raise ConfigError(f"unknown channel {self.channel!r}")
        if self.geometry not in _GEOMETRIES:
            raise ConfigError(f"unknown geometry {self.geometry!r}")
        if not self.theta_r or any(
                not (0.0 < t <= math.pi / 2.0) for t in self.theta_r):
            raise ConfigError(
                f"theta-r values must lie in (0, pi/2], got {self.theta_r!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.threads < 0:
            raise ConfigError(f"threads must be >= 0, got {self.threads}")

    def config_hash(self) -> str:
        """12-hex digest over the physics-relevant parameters only.

        threads, out and format are excluded so that re-runs that differ
        only in execution details carry (and must reproduce) the same
        table bytes.
        """
        physics = {
            "command": self.command,
            "e_list": [format(e, ".12g") for e in self.e_list],
            "l_nm": format(self.l_nm, ".12g"),
            "k_scale": format(self.k_scale, ".12g"),
            "grid_cap": self.grid_cap,
            "n_grid": self.n_grid,
            "n_cells": self.n_cells,
            "channel": self.channel,
            "geometry": self.geometry,
            "theta_r": [format(t, ".12g") for t in self.theta_r],
        }
        canon = json.dumps(physics, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:12]


# ---------------------------------------------------------------------------
# config file
# ---------------------------------------------------------------------------

_CONFIG_KEYS = {
    "energy_ev", "energy_list", "packet_nm", "k_scale", "grid_cap", "n_grid",
    "n_cells", "channel", "geometry", "theta_r", "out", "format", "threads",
}


def parse_config_file(path: str) -> dict:
    """Parse a flat ``key = value`` config file; '#' starts a comment."""
    values: dict = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(
                f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if not value:
            raise ConfigError(f"{path}:{lineno}: empty value for {key!r}")
        values[key] = value
    return values


def _parse_float(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"{what}: not a number: {text!r}") from exc


def _parse_int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"{what}: not an integer: {text!r}") from exc


def _parse_float_list(text: str, what: str) -> list:
    return [_parse_float(part, what) for part in str(text).split(",") if part.strip()]


def _parse_int_list(text: str, what: str) -> list:
    return [_parse_int(part, what) for part in str(text).split(",") if part.strip()]


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge precedence: command-line flags > config file > defaults."""
    filevals = parse_config_file(args.config) if args.config else {}

    def pick(flag_value, file_key: str):
        if flag_value is not None:
            return flag_value
        return filevals.get(file_key)

    cfg = RunConfig(command=args.command)

    energy_list = pick(args.energy_list, "energy_list")
    energy_ev = pick(args.energy_ev, "energy_ev")
    if args.energy_list is not None and args.energy_ev is not None:
        raise ConfigError("give either --energy-ev or --energy-list, not both")
    if energy_list is not None:
        cfg.e_list = _parse_float_list(str(energy_list), "--energy-list")
    elif energy_ev is not None:
        cfg.e_list = [_parse_float(str(energy_ev), "--energy-ev")]

    raw = pick(args.packet_nm, "packet_nm")
    if raw is not None:
        cfg.l_nm = _parse_float(str(raw), "--packet-nm")
    raw = pick(args.k_scale, "k_scale")
    if raw is not None:
        cfg.k_scale = _parse_float(str(raw), "--k-scale")
    raw = pick(args.grid_cap, "grid_cap")
    if raw is not None:
        cfg.grid_cap = _parse_int(str(raw), "--grid-cap")
    raw = pick(args.n_grid, "n_grid")
    if raw is not None:
        cfg.n_grid = _parse_int(str(raw), "--n-grid")
    raw = pick(args.n_cells, "n_cells")
    if raw is not None:
        cfg.n_cells = _parse_int_list(str(raw), "--n-cells")
    raw = pick(args.channel, "channel")
    if raw is not None:
        cfg.channel = str(raw)
    raw = pick(args.geometry, "geometry")
    if raw is not None:
        cfg.geometry = str(raw)
    raw = pick(args.theta_r, "theta_r")
    if raw is not None:
        cfg.theta_r = _parse_float_list(str(raw), "--theta-r")
    raw = pick(args.out, "out")
    if raw is not None:
        cfg.out = str(raw)
    raw = pick(args.format, "format")
    if raw is not None:
        cfg.format = str(raw)

    raw = pick(args.threads, "threads")
    if raw is None:
        raw = os.environ.get("ESCATTER_THREADS")
    if raw is not None:
        cfg.threads = _parse_int(str(raw), "--threads")

    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# per-command row computation
# ---------------------------------------------------------------------------

def _map_ordered(fn, items, threads: int) -> list:
    """Apply fn to items, in parallel but with output in input order."""
    if threads == 0:
        threads = os.cpu_count() or 1
    if threads == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _rows_ring_sweep(cfg: RunConfig) -> tuple[list[str], list[dict]]:
    geometry = _GEOMETRIES[cfg.geometry]
    if geometry is GridKind.SPHERE_PIXELS:
        raise ConfigError("use the sphere-sweep command for sphere geometry")
    channel = _CHANNELS[cfg.channel]
    if geometry is GridKind.EQUATOR_RING:
        n = cfg.n_cells[0]
        bits = math.log2(2 * n) if channel is SpinChannel.ANTIPARALLEL else math.log2(n)
        rows = [{"E_ev": float(e), "n_cells": n, "S_bits": bits, "status": "ok"}
                for e in cfg.e_list]
        return ["E_ev", "n_cells", "S_bits", "status"], rows

    def one(e_ev: float) -> dict:
        return sweep_energies([e_ev], cfg.l_nm, channel, geometry, cfg.k_scale)[0]

    rows = _map_ordered(one, cfg.e_list, cfg.threads)
    return ["E_ev", "n_cells", "S_bits", "status"], rows


def _rows_sphere_sweep(cfg: RunConfig) -> tuple[list[str], list[dict]]:
    channel = _CHANNELS[cfg.channel]

    def one(e_ev: float) -> dict:
        return sweep_energies([e_ev], cfg.l_nm, channel,
                              GridKind.SPHERE_PIXELS, cfg.k_scale)[0]

    rows = _map_ordered(one, cfg.e_list, cfg.threads)
    return ["E_ev", "n_rings", "pixel_count", "S_bits", "status"], rows


def _rows_vn_compare(cfg: RunConfig) -> tuple[list[str], list[dict]]:
    def one(e_ev: float) -> dict:
        row = {"E_ev": float(e_ev), "n_grid": cfg.n_grid}
        try:
            ctx = make_context(e_ev, cfg.l_nm, cfg.k_scale)
            dm = build_meridian_matrix(ctx, cfg.n_grid, grid_cap=cfg.grid_cap)
            s_vn = von_neumann_entropy(eigen_spectrum(dm))
            # exact discrete sum: the continuous-limit form is not valid
            # when the cell width is comparable to the cutoff angle, which
            # is the case on coarse matrix-sized grids
            s_ring = shannon_ring_discrete(ctx, SpinChannel.SPINLESS,
                                           n_cells=cfg.n_grid)
            row.update(S_shannon_ring=s_ring, S_vn=s_vn,
                       abs_diff=abs(s_vn - s_ring), status="ok")
        except (ValueError, NumericalError, FloatingPointError) as exc:
            row.update(S_shannon_ring=math.nan, S_vn=math.nan,
                       abs_diff=math.nan, status=f"error: {exc}")
        return row

    rows = _map_ordered(one, cfg.e_list, cfg.threads)
    return ["E_ev", "n_grid", "S_shannon_ring", "S_vn", "abs_diff", "status"], rows


def _rows_spin_sweep(cfg: RunConfig) -> tuple[list[str], list[dict]]:
    def one(e_ev: float) -> dict:
        row = {"E_ev": float(e_ev)}
        try:
            ctx = make_context(e_ev, cfg.l_nm, cfg.k_scale)
            par = entropy_parallel(ctx)
            ap = entropy_antiparallel(ctx)
            row.update(n_cells=par.grid.n_cells,
                       S_par=par.S, S_ap=ap.S,
                       S_par_modified=par.S_modified,
                       S_ap_modified=ap.S_modified, status="ok")
        except (ValueError, NumericalError, FloatingPointError) as exc:
            row.update(n_cells=0, S_par=math.nan, S_ap=math.nan,
                       S_par_modified=math.nan, S_ap_modified=math.nan,
                       status=f"error: {exc}")
        return row

    rows = _map_ordered(one, cfg.e_list, cfg.threads)
    return ["E_ev", "n_cells", "S_par", "S_ap", "S_par_modified",
            "S_ap_modified", "status"], rows


def _rows_postselect(cfg: RunConfig) -> tuple[list[str], list[dict]]:
    e_ev = cfg.e_list[0]
    ctx = make_context(e_ev, cfg.l_nm, cfg.k_scale)

    def one(theta_r: float) -> dict:
        row = postselect_range_sweep(ctx, [theta_r])[0]
        row["E_ev"] = float(e_ev)
        return row

    rows = _map_ordered(one, cfg.theta_r, cfg.threads)
    return ["E_ev", "theta_r", "n_cells", "S_spinless", "S_par", "S_ap",
            "delta_S", "zero_weight", "status"], rows


def _rows_equator(cfg: RunConfig) -> tuple[list[str], list[dict]]:
    rows = []
    for n in cfg.n_cells:
        res = equator_entropies(n)
        rows.append({"n_cells": n,
                     "S_par": res.S_parallel, "S_ap": res.S_antiparallel,
                     "S_par_modified": res.S_parallel_modified,
                     "S_ap_modified": res.S_antiparallel_modified,
                     "delta_S": res.delta_S, "status": "ok"})
    return ["n_cells", "S_par", "S_ap", "S_par_modified", "S_ap_modified",
            "delta_S", "status"], rows


_COMMAND_ROWS = {
    "spinless-sweep": _rows_ring_sweep,
    "sphere-sweep": _rows_sphere_sweep,
    "vn-compare": _rows_vn_compare,
    "spin-sweep": _rows_spin_sweep,
    "postselect-range": _rows_postselect,
    "equator": _rows_equator,
}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def _csv_escape(cell: str) -> str:
    if any(ch in cell for ch in ',"\n'):
        return '"' + cell.replace('"', '""') + '"'
    return cell


def render_csv(cfg: RunConfig, columns: list[str], rows: list[dict]) -> str:
    lines = [f"# escatter-entropy v{__version__}, config-hash={cfg.config_hash()}"]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_csv_escape(_format_cell(row.get(col)))
                              for col in columns))
    return "\n".join(lines) + "\n"


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def render_json(cfg: RunConfig, columns: list[str], rows: list[dict]) -> str:
    payload = [{col: _jsonable(row.get(col)) for col in columns} for row in rows]
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write via a sibling temp file + rename so interrupted runs never
    leave a truncated table at the target path."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".escatter-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        try:
            os.unlink(tmp_path)
        except OSError:
            pass
        raise


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def run(cfg: RunConfig) -> int:
    """Execute one command; returns the process exit code."""
    cfg.validate()
    columns, rows = _COMMAND_ROWS[cfg.command](cfg)
    text = (render_csv if cfg.format == "csv" else render_json)(cfg, columns, rows)

    if cfg.out is not None:
        write_atomic(cfg.out, text)
        for i, row in enumerate(rows):
            summary = " ".join(
                f"{col}={_format_cell(row.get(col))}" for col in columns)
            print(f"[{cfg.command}] row {i}: {summary}")
        print(f"[{cfg.command}] wrote {len(rows)} rows to {cfg.out}")
    else:
        sys.stdout.write(text)

    failures = [(i, row["status"]) for i, row in enumerate(rows)
                if row.get("status") != "ok"]
    if failures:
        for i, status in failures:
            print(f"[{cfg.command}] row {i} failed: {status}", file=sys.stderr)
        return 3
    return 0


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="escatter-entropy",
        description="Entropy tables for electron-electron Coulomb scattering: "
                    "discrete/continuous Shannon sweeps, spin channels, "
                    "post-selection and von Neumann comparisons.",
        epilog="Columns per command: spinless-sweep/sphere-sweep -> entropy per "
               "energy; vn-compare -> (E_ev, S_shannon_ring, S_vn, abs_diff); "
               "spin-sweep -> parallel/antiparallel entropies; postselect-range "
               "-> entropies vs acceptance half-angle; equator -> closed forms "
               "per cell count. Exit codes: 0 ok, 2 bad configuration, "
               "3 numerical failure (partial table still written, see the "
               "status column).")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="flat 'key = value' config file; "
                                         "command-line flags win")
    parser.add_argument("--energy-ev", help="single CM kinetic energy in eV")
    parser.add_argument("--energy-list", help="comma-separated energies in eV")
    parser.add_argument("--packet-nm", help="Gaussian packet size in nm "
                                            "(default 100)")
    parser.add_argument("--k-scale", help="wave-number calibration factor "
                                          "(default 1; sqrt(2) reproduces the "
                                          "benchmark tables)")
    parser.add_argument("--grid-cap", help="dense-diagonalization cap "
                                           "(default 4096)")
    parser.add_argument("--n-grid", help="vn-compare matrix dimension "
                                         "(default 512)")
    parser.add_argument("--n-cells", help="equator cell count(s), "
                                          "comma-separated (default 3140)")
    parser.add_argument("--channel", choices=sorted(_CHANNELS))
    parser.add_argument("--geometry", choices=sorted(_GEOMETRIES))
    parser.add_argument("--theta-r", help="comma-separated acceptance "
                                          "half-angles in radians")
    parser.add_argument("--out", help="output file path (atomic write); "
                                      "default prints the table to stdout")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--threads", help="worker threads, 0 = auto; env "
                                          "ESCATTER_THREADS is the fallback")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _make_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        return run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
