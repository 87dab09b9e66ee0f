"""Config parsing, snapshot files and report emission."""

import configparser
import csv
import hashlib
import json
import math
import os
import re

import numpy as np

from zerofilter.models import logger
from zerofilter.models.config import (
    DEFAULTS,
    OUTPUT_FORMATS,
    SAMPLE_DTYPE,
    SNAPSHOT_HEADER,
    SNAPSHOT_MAGIC,
    SNAPSHOT_VERSION,
    OutputSection,
    RunConfig,
    SweepSection,
)
from zerofilter.models.grid import Field, Grid
from zerofilter.models.params import INTEGRATORS, ModelParams, StepControl
from zerofilter.models.sweep import MIN_SOBOLEV, InitialDatum
from zerofilter.utils import ConfigError, SnapshotFormatError

ERRORS_HEADER = (
    "alpha",
    "n",
    "s",
    "sup_t_error_hs",
    "sup_t_error_hsm1",
    "t_end",
    "status",
)
NORMS_HEADER = ("t", "hs_norm", "hsm1_norm", "min_slope", "energy")
_PERIOD = re.compile(r"^\s*([0-9.eE+-]*)\s*\*?\s*pi\s*$")
_BOOLEANS = {"true": True, "yes": True, "on": True, "1": True}
_BOOLEANS.update({"false": False, "no": False, "off": False, "0": False})


# ========================
# Configuration
# ========================


def _line_of(text, section, key=None):
    """1-based line of `[section]` (or of `key` inside it), None if absent."""
    current = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if key is None and current == section:
                return number
            continue
        if key is not None and current == section and "=" in line:
            if line.split("=", 1)[0].strip().lower() == key:
                return number
    return None


def _parse_period(value):
    match = _PERIOD.match(value)
    if match:
        factor = match.group(1)
        return (float(factor) if factor not in ("", "+") else 1.0) * math.pi
    return float(value)


def _parse_list(value, kind):
    items = [item.strip() for item in value.split(",") if item.strip()]
    return tuple(kind(item) for item in items)


def _parse_optional(value):
    value = value.strip()
    return float(value) if value else None


def _parse_bool(value):
    try:
        return _BOOLEANS[value.strip().lower()]
    except KeyError:
        raise ValueError(f"expected a boolean, got {value!r}") from None


def _read_ini(text):
    parser = configparser.ConfigParser(
        strict=True,
        interpolation=None,
        comment_prefixes=("#", ";"),
        inline_comment_prefixes=("#",),
    )
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside of any [section]", line=exc.lineno) from None
    except (
        configparser.DuplicateSectionError,
        configparser.DuplicateOptionError,
    ) as exc:
        raise ConfigError(exc.message.split(": ", 1)[-1], line=exc.lineno) from None
    except configparser.ParsingError as exc:
        line, content = exc.errors[0]
        raise ConfigError(f"cannot parse {content.strip()!r}", line=line) from None
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    return parser


def parse_config(text):
    """RunConfig from INI text; defaults fill every missing key."""
    parser = _read_ini(text)
    values = {section: dict(keys) for section, keys in DEFAULTS.items()}
    for section in parser.sections():
        name = section.strip().lower()
        if name not in DEFAULTS:
            raise ConfigError(f"unknown section [{section}]", _line_of(text, name))
        for key, value in parser.items(section):
            if key not in DEFAULTS[name]:
                raise ConfigError(
                    f"unknown key {key!r} in [{name}]", _line_of(text, name, key)
                )
            values[name][key] = value

    def build(section, key, convert):
        try:
            return convert(values[section][key])
        except (ValueError, ConfigError) as exc:
            raise ConfigError(
                f"[{section}] {key}: {exc}", _line_of(text, section, key)
            ) from None

    def checked(section, keys, factory):
        try:
            return factory()
        except ValueError as exc:
            line = None
            for key in keys:
                line = line or _line_of(text, section, key)
            raise ConfigError(f"[{section}] {exc}", line) from None

    grid = checked(
        "grid",
        ("n_points", "period"),
        lambda: Grid(
            build("grid", "n_points", int), build("grid", "period", _parse_period)
        ),
    )
    alpha = build("model", "alpha", float)
    if not 0.0 <= alpha < 1.0:
        raise ConfigError(
            f"alpha must lie in (0, 1) (or be 0 for Burgers), got {alpha}",
            _line_of(text, "model", "alpha"),
        )
    model = checked(
        "model",
        ("nu", "gamma"),
        lambda: ModelParams(
            alpha=alpha,
            nu=build("model", "nu", float),
            gamma=build("model", "gamma", float),
            dealias=build("model", "dealias", _parse_bool),
        ),
    )
    integrator = build("time", "integrator", str.strip)
    if integrator not in INTEGRATORS:
        raise ConfigError(
            f"integrator must be one of {INTEGRATORS}, got {integrator!r}",
            _line_of(text, "time", "integrator"),
        )
    control = checked(
        "time",
        tuple(DEFAULTS["time"]),
        lambda: StepControl(
            cfl=build("time", "cfl", float),
            dt_max=build("time", "dt_max", float),
            t_end=build("time", "t_end", _parse_optional),
            save_every=build("time", "save_every", int),
            breaking_slope_threshold=build(
                "time", "breaking_slope_threshold", _parse_optional
            ),
            norm_cap=build("time", "norm_cap", float),
            integrator=integrator,
        ),
    )
    datum = build("data", "u0", InitialDatum.parse)

    s = build("sweep", "sobolev_s", float)
    if not s > MIN_SOBOLEV:
        raise ConfigError(
            f"sobolev_s must exceed 3/2, got {s}", _line_of(text, "sweep", "sobolev_s")
        )
    cutoff_mode = build("sweep", "cutoff_mode", str.strip)
    if cutoff_mode not in ("sharp", "smooth"):
        raise ConfigError(
            f"cutoff_mode must be sharp or smooth, got {cutoff_mode!r}",
            _line_of(text, "sweep", "cutoff_mode"),
        )
    jobs = build("sweep", "jobs", int)
    if jobs < 1:
        raise ConfigError("jobs must be >= 1", _line_of(text, "sweep", "jobs"))
    sweep = SweepSection(
        alphas=build("sweep", "alphas", lambda v: _parse_list(v, float)),
        ns=build("sweep", "ns", lambda v: _parse_list(v, int)),
        sobolev_s=s,
        cutoff_mode=cutoff_mode,
        jobs=jobs,
    )
    formats = build("output", "formats", lambda v: _parse_list(v, str.lower))
    unknown = [f for f in formats if f not in OUTPUT_FORMATS]
    if unknown:
        raise ConfigError(
            f"unknown output formats {unknown}; expected {OUTPUT_FORMATS}",
            _line_of(text, "output", "formats"),
        )
    out_dir = values["output"]["dir"].strip() or None
    cfg = RunConfig(
        grid=grid,
        model=model,
        control=control,
        datum=datum,
        sweep=sweep,
        output=OutputSection(dir=out_dir, formats=formats),
    )
    # cross-field checks (alpha grid, resolvable ns) live on SweepConfig
    try:
        cfg.sweep_config()
    except ConfigError as exc:
        raise ConfigError(str(exc), _line_of(text, "sweep")) from None
    return cfg


def load_config(path):
    if path is None:
        return parse_config("")
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def _optional(value):
    return "" if value is None else repr(value)


def format_config(cfg):
    """INI text that parses back to an equivalent RunConfig."""
    control = cfg.control
    sections = {
        "grid": {"n_points": cfg.grid.n_points, "period": repr(cfg.grid.period)},
        "model": {
            "alpha": repr(cfg.model.alpha),
            "nu": repr(cfg.model.nu),
            "gamma": repr(cfg.model.gamma),
            "dealias": str(cfg.model.dealias).lower(),
        },
        "time": {
            "t_end": _optional(control.t_end),
            "cfl": repr(control.cfl),
            "dt_max": repr(control.dt_max),
            "save_every": control.save_every,
            "breaking_slope_threshold": _optional(control.breaking_slope_threshold),
            "norm_cap": repr(control.norm_cap),
            "integrator": control.integrator,
        },
        "data": {"u0": str(cfg.datum)},
        "sweep": {
            "alphas": ", ".join(repr(a) for a in cfg.sweep.alphas),
            "ns": ", ".join(str(n) for n in cfg.sweep.ns),
            "sobolev_s": repr(cfg.sweep.sobolev_s),
            "cutoff_mode": cfg.sweep.cutoff_mode,
            "jobs": cfg.sweep.jobs,
        },
        "output": {
            "dir": cfg.output.dir or "",
            "formats": ", ".join(cfg.output.formats),
        },
    }
    lines = []
    for name, keys in sections.items():
        lines.append(f"[{name}]")
        lines.extend(f"{key} = {value}" for key, value in keys.items())
        lines.append("")
    return "\n".join(lines)


# ========================
# Snapshots
# ========================


def _nan_if_none(value):
    return math.nan if value is None else float(value)


def write_snapshot(f, path):
    header = SNAPSHOT_HEADER.pack(
        SNAPSHOT_MAGIC,
        SNAPSHOT_VERSION,
        f.grid.n_points,
        f.grid.period,
        _nan_if_none(f.time),
        _nan_if_none(f.alpha),
    )
    with open(path, "wb") as handle:
        handle.write(header)
        handle.write(np.asarray(f.samples, dtype=SAMPLE_DTYPE).tobytes())


def read_snapshot(path):
    with open(path, "rb") as handle:
        data = handle.read()
    if len(data) < SNAPSHOT_HEADER.size:
        raise SnapshotFormatError(f"{path}: truncated header ({len(data)} bytes)")
    magic, version, n_points, period, time, alpha = SNAPSHOT_HEADER.unpack_from(data)
    if magic != SNAPSHOT_MAGIC:
        raise SnapshotFormatError(
            f"{path}: bad magic {magic!r}, expected {SNAPSHOT_MAGIC.decode()!r}"
        )
    if version != SNAPSHOT_VERSION:
        raise SnapshotFormatError(
            f"{path}: unsupported version {version}, expected {SNAPSHOT_VERSION}"
        )
    expected = SNAPSHOT_HEADER.size + 8 * n_points
    if len(data) != expected:
        raise SnapshotFormatError(
            f"{path}: expected {expected} bytes for N={n_points}, found {len(data)}"
        )
    samples = np.frombuffer(data, dtype=SAMPLE_DTYPE, offset=SNAPSHOT_HEADER.size)
    try:
        grid = Grid(n_points, period)
    except ValueError as exc:
        raise SnapshotFormatError(f"{path}: {exc}") from None
    return Field(
        grid,
        samples.astype(float),
        time=None if math.isnan(time) else time,
        alpha=None if math.isnan(alpha) else alpha,
    )


# ========================
# Reports
# ========================


def _number(value):
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def run_id(label):
    return hashlib.sha1(label.encode("utf-8")).hexdigest()[:10]


def write_norms_csv(trajectory, out_dir, indices=None):
    """t, H^s norm, H^(s-1) norm, min slope, energy per snapshot."""
    indices = indices or tuple(trajectory.norm_series)[:2]
    hs, hsm1 = (trajectory.norm_series[i] for i in indices)
    path = os.path.join(out_dir, f"norms_{run_id(trajectory.label)}.csv")
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(NORMS_HEADER)
        for row in zip(
            trajectory.times,
            hs,
            hsm1,
            trajectory.min_slope_series,
            trajectory.energy_series,
        ):
            writer.writerow([_number(v) for v in row])
    return path


def _write_errors_csv(rows, out_dir):
    path = os.path.join(out_dir, "errors.csv")
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(ERRORS_HEADER)
        for row in rows:
            writer.writerow(
                [
                    _number(row.alpha),
                    _number(row.n),
                    _number(row.s),
                    _number(row.sup_t_error_hs),
                    _number(row.sup_t_error_hsm1),
                    _number(row.t_end),
                    row.status,
                ]
            )
    return path


def _keyed(mapping):
    return {
        ",".join(str(k) for k in key) if isinstance(key, tuple) else str(key): value
        for key, value in mapping.items()
    }


def _finite(value):
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def summarize(report):
    """JSON-ready dict of fits, constants and verdicts."""
    summary = {"passed": report.passed, "verdicts": report.verdicts}
    summary["skipped"] = dict(report.skipped)
    if report.boundary_tail is not None:
        summary["boundary_tail"] = report.boundary_tail
    cfg = report.config
    if cfg is not None:
        summary["config"] = {
            "datum": str(cfg.datum),
            "s": cfg.s,
            "alphas": list(cfg.alphas),
            "ns": list(cfg.ns),
            "n_points": cfg.n_points,
            "period": cfg.period,
            "t_end": cfg.control.t_end,
            "cutoff_mode": cfg.cutoff_mode,
        }
    if report.uniform is not None:
        u = report.uniform
        summary["uniform_bound"] = {
            "suprema": _keyed(u.suprema),
            "higher_suprema": _keyed(u.higher_suprema),
            "spread": _finite(u.spread),
            "higher_spread": _finite(u.higher_spread),
            "energy_rate_constant": u.energy_rate_constant,
            "growth_trend": u.growth_trend,
            "passed": u.passed,
        }
    if report.step2 is not None:
        s2 = report.step2
        summary["step2"] = {
            "constants": _keyed(s2.constants),
            "initial_constants": _keyed(s2.initial_constants),
            "lower_constants": _keyed(s2.lower_constants),
            "spread_by_n": {str(k): _finite(v) for k, v in s2.spread_by_n.items()},
            "n_growth": _finite(s2.n_growth),
            "fit": s2.fit.as_dict() if s2.fit else None,
            "passed": s2.passed,
        }
    if report.step3 is not None:
        s3 = report.step3
        summary["step3"] = {
            "lower_suprema": _keyed(s3.lower_suprema),
            "hs_constants": _keyed(s3.hs_constants),
            "hs_constant": s3.hs_constant,
            "min_interpolation_deficit": s3.min_interpolation_deficit,
            "initial_max": s3.initial_max,
            "window": [list(cell) for cell in s3.window],
            "fit": s3.fit.as_dict() if s3.fit else None,
            "conclusive": s3.conclusive,
            "passed": s3.passed,
        }
    if report.convergence is not None:
        conv = report.convergence
        summary["convergence"] = {
            "errors": _keyed(conv.errors),
            "lower_errors": _keyed(conv.lower_errors),
            "ratios": [_finite(r) for r in conv.ratios],
            "monotone": conv.monotone,
            "fit": conv.fit.as_dict() if conv.fit else None,
            "passed": conv.passed,
        }
    if report.final is not None:
        final = report.final
        summary["final_bound"] = {
            "c1": final.c1,
            "c2": final.c2,
            "margin": final.margin,
            "tracking": _finite(final.tracking),
            "tracking_band": list(final.tracking_band),
            "tracked": final.tracked,
            "cells": [
                {
                    "alpha": c.alpha,
                    "n": c.n,
                    "c1": c.c1,
                    "total": c.total,
                    "model": c.model,
                }
                for c in final.cells
            ],
            "passed": final.passed,
        }
    return summary


def _plot_script(norm_paths):
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set logscale xy",
        "set xlabel 'alpha'",
        "set ylabel 'sup_t error'",
        "plot 'errors.csv' using 1:4 with linespoints title 'H^s error'",
    ]
    if norm_paths:
        lines += [
            "pause -1",
            "unset logscale",
            "set xlabel 't'",
            "set ylabel 'H^s norm'",
        ]
        plots = [
            f"'{os.path.basename(p)}' using 1:2 with lines" for p in norm_paths
        ]
        lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def emit_report(report, out_dir, formats=OUTPUT_FORMATS):
    """errors.csv, summary.json, norms_<runid>.csv and plot.gp under out_dir."""
    try:
        os.makedirs(out_dir, exist_ok=True)
        written = []
        norm_paths = []
        if "csv" in formats:
            written.append(_write_errors_csv(report.rows, out_dir))
            for trajectory in report.trajectories:
                norm_paths.append(write_norms_csv(trajectory, out_dir))
            written += norm_paths
        if "json" in formats:
            path = os.path.join(out_dir, "summary.json")
            with open(path, "w", encoding="utf-8") as handle:
                json.dump(summarize(report), handle, indent=2, sort_keys=True)
            written.append(path)
        if "gp" in formats:
            path = os.path.join(out_dir, "plot.gp")
            with open(path, "w", encoding="utf-8") as handle:
                handle.write(_plot_script(norm_paths))
            written.append(path)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write report: {exc.strerror}", exc.filename)
    logger.info("report written to %s (%d files)", out_dir, len(written))
    return written
