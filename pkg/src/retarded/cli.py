"""Batch front end driven by a single JSON scenario file.

Usage::

    retarded --scenario run.json --command fields --output out/

Exit codes: 0 success, 1 invalid scenario or ill-posed source, 2 residual
tolerance exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import Ball, Box, SpatialDomain
from .potentials import evaluate
from .quadrature import DEFAULTS, QuadratureSpec
from .sources import (
    Constants,
    SourceModel,
    SourceValidationError,
    azimuthal_ball_current,
    band_limited,
    oscillating_charge,
    polarization_ball_current,
    uniform_ball_charge,
    uniform_ball_charge_q,
    uniform_current,
    validate_source,
)
from .verify import (
    CHECKS,
    RESIDUAL_NAMES,
    charge_scale,
    convergence_study,
    flux_mismatch,
    full_report,
    gauss_flux_test,
)

SCHEMA_VERSION = 1
COMMANDS = ("potentials", "fields", "verify", "flux", "convergence")

POTENTIAL_COLUMNS = ["phi", "ax", "ay", "az"]
FIELD_COLUMNS = ["ex", "ey", "ez", "hx", "hy", "hz"]

DEFAULT_TOLERANCES = {
    "maxwell": 1e-4,
    "gauge": 1e-4,
    "wave": 1e-4,
    "continuity": 1e-6,
    "flux": 1e-3,
}
TOLERANCE_KEY = {
    "maxwell_1": "maxwell",
    "maxwell_2": "maxwell",
    "maxwell_3": "maxwell",
    "maxwell_4": "maxwell",
    "gauge": "gauge",
    "wave_phi": "wave",
    "wave_a": "wave",
    "continuity": "continuity",
}

# per source type: parameter name -> (required, default)
SOURCE_PARAMS = {
    "uniform_ball_charge": {"rho0": (False, None), "charge": (False, None)},
    "azimuthal_ball_current": {"amplitude": (False, 1.0)},
    "polarization_ball_current": {"omega": (True, None), "amplitude": (False, 1.0)},
    "oscillating_charge": {"omega": (True, None), "amplitude": (False, 1.0)},
    "uniform_current": {"direction": (False, [0.0, 0.0, 1.0]), "amplitude": (False, 1.0)},
    "band_limited": {"components": (True, None)},
}
BAND_PROFILES = ("polarization_ball_current", "oscillating_charge")


class ScenarioError(ValueError):
    """Scenario document failed to parse; ``errors`` lists ``key.path: message`` strings."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


@dataclass
class Grid:
    lo: tuple
    hi: tuple
    counts: tuple

    def points(self) -> np.ndarray:
        """Grid points, x varying fastest."""
        axes = [np.linspace(a, b, n) if n > 1 else np.array([a]) for a, b, n in zip(self.lo, self.hi, self.counts)]
        z, y, x = np.meshgrid(axes[2], axes[1], axes[0], indexing="ij")
        return np.column_stack([x.ravel(), y.ravel(), z.ravel()])


@dataclass
class ConvergenceSettings:
    check: str = "maxwell_4"
    probe: tuple | None = None
    vary: str = "fd_step"
    levels: int = 3
    factor: int = 2


@dataclass
class ValidationSettings:
    n_points: int = 100
    continuity_tol: float = 1e-6
    tangency_tol: float = 1e-6


@dataclass
class Scenario:
    domain: SpatialDomain
    source: dict
    constants: Constants = field(default_factory=Constants)
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    grid: Grid | None = None
    times: tuple = (0.0,)
    probes: list | None = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    flux_radii: tuple | None = None
    convergence: ConvergenceSettings = field(default_factory=ConvergenceSettings)
    validation: ValidationSettings = field(default_factory=ValidationSettings)
    real_only: bool = False


# -- parsing -----------------------------------------------------------------


class _Reader:
    """Collects errors while pulling typed values out of nested dicts."""

    def __init__(self):
        self.errors: list[str] = []

    def fail(self, path: str, msg: str):
        self.errors.append(f"{path}: {msg}")

    def section(self, doc: dict, key: str, path: str, allowed, required: bool = False):
        full = f"{path}.{key}" if path else key
        if key not in doc:
            if required:
                self.fail(full, "required")
            return None
        value = doc[key]
        if not isinstance(value, dict):
            self.fail(full, "must be an object")
            return None
        for extra in sorted(set(value) - set(allowed)):
            self.fail(f"{full}.{extra}", "unknown key")
        return value

    def number(self, value, path, positive=False, integer=False, minimum=None):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            self.fail(path, f"must be a finite number, got {value!r}")
            return None
        if integer and int(value) != value:
            self.fail(path, f"must be an integer, got {value!r}")
            return None
        if positive and value <= 0:
            self.fail(path, f"must be positive, got {value!r}")
            return None
        if minimum is not None and value < minimum:
            self.fail(path, f"must be >= {minimum}, got {value!r}")
            return None
        return int(value) if integer else float(value)

    def complex_number(self, value, path):
        if isinstance(value, list):
            if len(value) != 2:
                self.fail(path, "complex values are [re, im]")
                return None
            re = self.number(value[0], f"{path}[0]")
            im = self.number(value[1], f"{path}[1]")
            return None if re is None or im is None else complex(re, im)
        x = self.number(value, path)
        return None if x is None else complex(x)

    def vec3(self, value, path):
        if not isinstance(value, list) or len(value) != 3:
            self.fail(path, f"must be a list of 3 numbers, got {value!r}")
            return None
        out = [self.number(v, f"{path}[{i}]") for i, v in enumerate(value)]
        return None if any(v is None for v in out) else tuple(out)


def _enclosing_reach(domain: SpatialDomain) -> float:
    """Smallest radius of a sphere about the domain center that contains it."""
    if isinstance(domain, Ball):
        return domain.radius
    return float(np.linalg.norm(domain.half_extents))


def _parse_domain(r: _Reader, doc: dict):
    raw = r.section(doc, "domain", "", ("type", "center", "radius", "min", "max"), required=True)
    if raw is None:
        return None
    kind = raw.get("type")
    if kind == "ball":
        for extra in sorted(set(raw) & {"min", "max"}):
            r.fail(f"domain.{extra}", "unknown key for a ball")
        center = r.vec3(raw.get("center", [0.0, 0.0, 0.0]), "domain.center")
        if "radius" not in raw:
            r.fail("domain.radius", "required")
            return None
        radius = r.number(raw["radius"], "domain.radius", positive=True)
        return None if center is None or radius is None else Ball(center, radius)
    if kind == "box":
        for extra in sorted(set(raw) & {"center", "radius"}):
            r.fail(f"domain.{extra}", "unknown key for a box")
        lo = r.vec3(raw.get("min"), "domain.min")
        hi = r.vec3(raw.get("max"), "domain.max")
        if lo is None or hi is None:
            return None
        if any(a >= b for a, b in zip(lo, hi)):
            r.fail("domain.max", "must exceed domain.min on every axis")
            return None
        return Box(lo, hi)
    r.fail("domain.type", f"must be 'ball' or 'box', got {kind!r}")
    return None


def _parse_source_params(r: _Reader, raw: dict, path: str, kind: str) -> dict:
    params = SOURCE_PARAMS[kind]
    for extra in sorted(set(raw) - set(params) - {"type"}):
        r.fail(f"{path}.{extra}", f"unknown key for source type {kind!r}")
    out = {}
    for name, (required, default) in params.items():
        if name not in raw:
            if required:
                r.fail(f"{path}.{name}", "required")
            elif default is not None:
                out[name] = default
            continue
        out[name] = raw[name]
    if kind == "uniform_ball_charge":
        given = [k for k in ("rho0", "charge") if k in raw]
        if len(given) != 1:
            r.fail(path, "give exactly one of 'rho0' or 'charge'")
        for k in given:
            out[k] = r.number(raw[k], f"{path}.{k}")
    if "omega" in out:
        out["omega"] = r.number(out["omega"], f"{path}.omega", positive=True)
    if "amplitude" in out:
        out["amplitude"] = r.complex_number(out["amplitude"], f"{path}.amplitude")
        if kind in ("azimuthal_ball_current", "uniform_current") and out["amplitude"] is not None:
            if out["amplitude"].imag != 0:
                r.fail(f"{path}.amplitude", "static sources take a real amplitude")
            out["amplitude"] = out["amplitude"].real
    if "direction" in out:
        out["direction"] = r.vec3(out["direction"], f"{path}.direction")
        if out["direction"] is not None and not math.isclose(np.linalg.norm(out["direction"]), 1.0, rel_tol=1e-9):
            r.fail(f"{path}.direction", "must be a unit vector")
    if kind == "band_limited":
        comps = raw.get("components")
        if comps is not None and (not isinstance(comps, list) or not comps):
            r.fail(f"{path}.components", "must be a non-empty list")
        elif comps is not None:
            parsed = []
            for i, comp in enumerate(comps):
                cpath = f"{path}.components[{i}]"
                if not isinstance(comp, dict):
                    r.fail(cpath, "must be an object")
                    continue
                for extra in sorted(set(comp) - {"profile", "omega", "weight", "amplitude"}):
                    r.fail(f"{cpath}.{extra}", "unknown key")
                profile = comp.get("profile", "polarization_ball_current")
                if profile not in BAND_PROFILES:
                    r.fail(f"{cpath}.profile", f"must be one of {list(BAND_PROFILES)}, got {profile!r}")
                if "omega" not in comp:
                    r.fail(f"{cpath}.omega", "required")
                    continue
                parsed.append({
                    "profile": profile,
                    "omega": r.number(comp["omega"], f"{cpath}.omega", positive=True),
                    "weight": r.complex_number(comp.get("weight", 1.0), f"{cpath}.weight"),
                    "amplitude": r.complex_number(comp.get("amplitude", 1.0), f"{cpath}.amplitude"),
                })
            omegas = [c["omega"] for c in parsed]
            if len(set(omegas)) != len(omegas):
                r.fail(f"{path}.components", f"frequencies must be distinct, got {omegas}")
            out["components"] = parsed
    return out


def _parse_source(r: _Reader, doc: dict):
    allowed = {"type"} | {k for p in SOURCE_PARAMS.values() for k in p}
    raw = doc.get("source")
    if raw is None:
        r.fail("source", "required")
        return None
    if not isinstance(raw, dict):
        r.fail("source", "must be an object")
        return None
    kind = raw.get("type")
    if kind not in SOURCE_PARAMS:
        r.fail("source.type", f"unknown source constructor {kind!r}; choose from {sorted(SOURCE_PARAMS)}")
        for extra in sorted(set(raw) - allowed):
            r.fail(f"source.{extra}", "unknown key")
        return None
    return {"type": kind, **_parse_source_params(r, raw, "source", kind)}


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a JSON scenario document.

    Raises
    ------
    ScenarioError
        On malformed JSON, unknown keys or constraint violations.  Every
        message starts with the key path at fault.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"<document>: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"])
    if not isinstance(doc, dict):
        raise ScenarioError(["<document>: top level must be an object"])

    top = ("schema", "domain", "constants", "source", "quadrature", "grid", "times", "probes",
           "tolerances", "flux", "convergence", "validation", "output")
    r = _Reader()
    for extra in sorted(set(doc) - set(top)):
        r.fail(extra, "unknown key")
    if "schema" not in doc:
        r.fail("schema", "required")
    elif doc["schema"] != SCHEMA_VERSION or isinstance(doc["schema"], bool):
        r.fail("schema", f"unsupported schema version {doc['schema']!r}; expected {SCHEMA_VERSION}")

    domain = _parse_domain(r, doc)
    source = _parse_source(r, doc)

    constants = Constants()
    raw = r.section(doc, "constants", "", ("c",))
    if raw and "c" in raw:
        c = r.number(raw["c"], "constants.c", positive=True)
        if c is not None:
            constants = Constants(c)

    quad = dict(DEFAULTS)
    raw = r.section(doc, "quadrature", "", tuple(DEFAULTS))
    if raw:
        for key, value in raw.items():
            if key == "fd_step":
                quad[key] = r.number(value, f"quadrature.{key}", positive=True)
            elif key in DEFAULTS:
                quad[key] = r.number(value, f"quadrature.{key}", integer=True, minimum=8 if key in ("n_azimuth", "n_regular") else 4)
    spec = None
    if all(v is not None for v in quad.values()):
        spec = QuadratureSpec(**quad)
        if domain is not None and spec.fd_step >= 0.1 * domain.diameter:
            r.fail("quadrature.fd_step", f"must be below 0.1 x domain diameter ({0.1 * domain.diameter:g})")

    grid = None
    raw = r.section(doc, "grid", "", ("min", "max", "counts"))
    if raw is not None:
        lo, hi = r.vec3(raw.get("min"), "grid.min"), r.vec3(raw.get("max"), "grid.max")
        counts = raw.get("counts")
        if not isinstance(counts, list) or len(counts) != 3:
            r.fail("grid.counts", f"must be a list of 3 integers, got {counts!r}")
            counts = None
        else:
            counts = [r.number(n, f"grid.counts[{i}]", integer=True, minimum=1) for i, n in enumerate(counts)]
        if lo is not None and hi is not None and counts is not None and None not in counts:
            if any(a > b for a, b in zip(lo, hi)):
                r.fail("grid.max", "must not be below grid.min")
            grid = Grid(lo, hi, tuple(counts))

    times = (0.0,)
    if "times" in doc:
        raw = doc["times"]
        if not isinstance(raw, list) or not raw:
            r.fail("times", "must be a non-empty list of numbers")
        else:
            times = tuple(r.number(t, f"times[{i}]") for i, t in enumerate(raw))

    probes = None
    if "probes" in doc and doc["probes"] is not None:
        raw = doc["probes"]
        if not isinstance(raw, list) or not raw:
            r.fail("probes", "must be a non-empty list of points")
        else:
            probes = [r.vec3(p, f"probes[{i}]") for i, p in enumerate(raw)]

    tolerances = dict(DEFAULT_TOLERANCES)
    raw = r.section(doc, "tolerances", "", tuple(DEFAULT_TOLERANCES))
    if raw:
        for key, value in raw.items():
            if key in DEFAULT_TOLERANCES:
                tolerances[key] = r.number(value, f"tolerances.{key}", positive=True)

    flux_radii = None
    raw = r.section(doc, "flux", "", ("radii",))
    if raw and "radii" in raw:
        radii = raw["radii"]
        if not isinstance(radii, list) or not radii:
            r.fail("flux.radii", "must be a non-empty list of numbers")
        else:
            flux_radii = tuple(r.number(x, f"flux.radii[{i}]", positive=True) for i, x in enumerate(radii))
            if domain is not None and None not in flux_radii:
                reach = _enclosing_reach(domain)
                for i, rad in enumerate(flux_radii):
                    if rad <= reach:
                        r.fail(f"flux.radii[{i}]", f"sphere of radius {rad:g} does not enclose the domain (needs > {reach:g})")

    conv = ConvergenceSettings()
    raw = r.section(doc, "convergence", "", ("check", "probe", "vary", "levels", "factor"))
    if raw:
        if "check" in raw:
            if raw["check"] not in CHECKS:
                r.fail("convergence.check", f"must be one of {sorted(CHECKS)}, got {raw['check']!r}")
            conv.check = raw["check"]
        if "probe" in raw:
            conv.probe = r.vec3(raw["probe"], "convergence.probe")
        if "vary" in raw:
            choices = ("all",) + tuple(DEFAULTS)
            if raw["vary"] not in choices:
                r.fail("convergence.vary", f"must be one of {list(choices)}, got {raw['vary']!r}")
            conv.vary = raw["vary"]
        if "levels" in raw:
            conv.levels = r.number(raw["levels"], "convergence.levels", integer=True, minimum=3)
        if "factor" in raw:
            conv.factor = r.number(raw["factor"], "convergence.factor", integer=True, minimum=2)

    val = ValidationSettings()
    raw = r.section(doc, "validation", "", ("n_points", "continuity_tol", "tangency_tol"))
    if raw:
        if "n_points" in raw:
            val.n_points = r.number(raw["n_points"], "validation.n_points", integer=True, minimum=1)
        for key in ("continuity_tol", "tangency_tol"):
            if key in raw:
                setattr(val, key, r.number(raw[key], f"validation.{key}", positive=True))

    real_only = False
    raw = r.section(doc, "output", "", ("real_only",))
    if raw and "real_only" in raw:
        if not isinstance(raw["real_only"], bool):
            r.fail("output.real_only", "must be true or false")
        else:
            real_only = raw["real_only"]

    if r.errors:
        raise ScenarioError(r.errors)
    return Scenario(
        domain=domain,
        source=source,
        constants=constants,
        quadrature=spec,
        grid=grid,
        times=times,
        probes=probes,
        tolerances=tolerances,
        flux_radii=flux_radii,
        convergence=conv,
        validation=val,
        real_only=real_only,
    )


def build_model(scenario: Scenario) -> SourceModel:
    """Instantiate the source model named in the scenario."""
    src, dom, const = scenario.source, scenario.domain, scenario.constants
    kind = src["type"]
    if kind in ("uniform_ball_charge", "azimuthal_ball_current", "polarization_ball_current",
                "oscillating_charge") and not isinstance(dom, Ball):
        raise ScenarioError([f"source.type: {kind} needs a ball domain"])
    if kind == "uniform_ball_charge":
        if "charge" in src:
            return uniform_ball_charge_q(dom, src["charge"], const)
        return uniform_ball_charge(dom, src["rho0"], const)
    if kind == "azimuthal_ball_current":
        return azimuthal_ball_current(dom, src["amplitude"], const)
    if kind == "polarization_ball_current":
        return polarization_ball_current(dom, src["omega"], src["amplitude"], const)
    if kind == "oscillating_charge":
        return oscillating_charge(dom, src["omega"], src["amplitude"], const)
    if kind == "uniform_current":
        return uniform_current(dom, src["direction"], src["amplitude"], const)
    makers = {"polarization_ball_current": polarization_ball_current, "oscillating_charge": oscillating_charge}
    return band_limited([
        (c["omega"], c["weight"], makers[c["profile"]](dom, c["omega"], c["amplitude"], const))
        for c in src["components"]
    ])


# -- commands ----------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _columns(names, real_only):
    if real_only:
        return list(names)
    return [f"{n}_{part}" for n in names for part in ("re", "im")]


def _values(arr, real_only):
    arr = np.asarray(arr, dtype=complex).ravel()
    if real_only:
        return [_fmt(v.real) for v in arr]
    return [s for v in arr for s in (_fmt(v.real), _fmt(v.imag))]


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, payload):
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _require_grid(scenario: Scenario, command: str) -> np.ndarray:
    if scenario.grid is None:
        raise ScenarioError([f"grid: required for command '{command}'"])
    return scenario.grid.points()


def _grid_rows(scenario, model, names, pick, command):
    pts = _require_grid(scenario, command)
    rows = []
    for t in scenario.times:
        s = evaluate(model, pts, t, scenario.quadrature)
        for p, vals in zip(pts, pick(s)):
            rows.append([_fmt(x) for x in p] + [_fmt(t)] + _values(vals, scenario.real_only))
    return ["x", "y", "z", "t"] + _columns(names, scenario.real_only), rows


def cmd_potentials(scenario, model, out: Path, log) -> int:
    header, rows = _grid_rows(scenario, model, POTENTIAL_COLUMNS, lambda s: np.column_stack([s.phi, s.a]), "potentials")
    _write_csv(out / "potentials.csv", header, rows)
    log(f"wrote {len(rows)} rows to {out / 'potentials.csv'}")
    return 0


def cmd_fields(scenario, model, out: Path, log) -> int:
    header, rows = _grid_rows(scenario, model, FIELD_COLUMNS, lambda s: np.column_stack([s.e, s.h]), "fields")
    _write_csv(out / "fields.csv", header, rows)
    log(f"wrote {len(rows)} rows to {out / 'fields.csv'}")
    return 0


def _flux_mesh(scenario, radius):
    return Ball(scenario.domain.center, radius).surface(scenario.quadrature.n_polar)


def cmd_verify(scenario, model, out: Path, log) -> int:
    t = scenario.times[0]
    mesh = None if scenario.flux_radii is None else _flux_mesh(scenario, scenario.flux_radii[0])
    rep = full_report(model, scenario.probes, t, scenario.quadrature, mesh)
    tol = scenario.tolerances
    failures = [n for n in RESIDUAL_NAMES if rep.relative[n] > tol[TOLERANCE_KEY[n]]]
    if abs(rep.flux_mismatch) > tol["flux"]:
        failures.append("flux")
    payload = rep.to_json()
    payload["tolerances"] = tol
    payload["time"] = t
    payload["quadrature"] = scenario.quadrature.to_dict()
    payload["probes"] = rep.probe_points
    payload["passed"] = not failures
    _write_json(out / "report.json", payload)
    log(f"{'check':<12}{'absolute':>14}{'relative':>14}{'tolerance':>12}  status")
    for n in RESIDUAL_NAMES:
        tl = tol[TOLERANCE_KEY[n]]
        log(f"{n:<12}{getattr(rep, n):>14.3e}{rep.relative[n]:>14.3e}{tl:>12.1e}  {'FAIL' if n in failures else 'ok'}")
    log(f"{'flux':<12}{rep.flux[0] - rep.flux[1]:>14.3e}{rep.flux_mismatch:>14.3e}{tol['flux']:>12.1e}  "
        f"{'FAIL' if 'flux' in failures else 'ok'}")
    log(f"report written to {out / 'report.json'}")
    return 2 if failures else 0


def cmd_flux(scenario, model, out: Path, log) -> int:
    t = scenario.times[0]
    radii = scenario.flux_radii or (2.0 * _enclosing_reach(scenario.domain),)
    scale = charge_scale(model, t, scenario.quadrature)
    entries = []
    for radius in radii:
        flux, expected = gauss_flux_test(model, _flux_mesh(scenario, radius), scenario.quadrature, t)
        mismatch = flux_mismatch(flux, expected, scale)
        entries.append({"radius": radius, "value": flux, "expected": expected, "mismatch": mismatch})
        log(f"r = {radius:<10g} flux = {flux:.12g}  expected = {expected:.12g}  mismatch = {mismatch:.3e}")
    passed = all(abs(e["mismatch"]) <= scenario.tolerances["flux"] for e in entries)
    _write_json(out / "flux.json", {"time": t, "entries": entries, "tolerance": scenario.tolerances["flux"],
                                    "passed": passed})
    return 0 if passed else 2


def convergence_levels(base: QuadratureSpec, vary: str, levels: int, factor: int) -> list[QuadratureSpec]:
    """Successively refined specs; ``vary`` names one knob or ``"all"``."""
    out = [base]
    for _ in range(levels - 1):
        prev = out[-1]
        if vary == "all":
            out.append(prev.refined(factor))
        elif vary == "fd_step":
            out.append(QuadratureSpec(**{**prev.to_dict(), "fd_step": prev.fd_step / factor}))
        else:
            out.append(QuadratureSpec(**{**prev.to_dict(), vary: getattr(prev, vary) * factor}))
    return out


def cmd_convergence(scenario, model, out: Path, log) -> int:
    conv = scenario.convergence
    probe = conv.probe if conv.probe is not None else tuple(scenario.domain.center)
    levels = convergence_levels(scenario.quadrature, conv.vary, conv.levels, conv.factor)
    rec = convergence_study(conv.check, model, probe, levels)
    rows = [{**spec.to_dict(), "error": err} for spec, err in rec.levels]
    for row in rows:
        log(f"{conv.vary}={row[conv.vary] if conv.vary != 'all' else row['fd_step']!s:<12} error = {row['error']:.6e}")
    log(f"slope = {rec.slope:.3f}")
    _write_json(out / "convergence.json", {"check": conv.check, "probe": list(probe), "vary": conv.vary,
                                           "levels": rows, "slope": None if math.isnan(rec.slope) else rec.slope})
    return 0


COMMAND_HANDLERS = {
    "potentials": cmd_potentials,
    "fields": cmd_fields,
    "verify": cmd_verify,
    "flux": cmd_flux,
    "convergence": cmd_convergence,
}


def run(scenario: Scenario, command: str, output: Path, quiet: bool = False) -> int:
    """Validate the source, then execute ``command``; returns the exit status."""

    def log(msg):
        if not quiet:
            print(msg)

    def err(msg):
        print(msg, file=sys.stderr)

    try:
        model = build_model(scenario)
        if command in ("potentials", "fields"):
            _require_grid(scenario, command)
        v = scenario.validation
        validate_source(model, n_points=v.n_points, continuity_tol=v.continuity_tol, tangency_tol=v.tangency_tol)
    except ScenarioError as exc:
        for e in exc.errors:
            err(f"error: {e}")
        return 1
    except SourceValidationError as exc:
        err(f"error: source rejected: {exc}")
        return 1
    try:
        output.mkdir(parents=True, exist_ok=True)
        return COMMAND_HANDLERS[command](scenario, model, output, log)
    except OSError as exc:
        err(f"error: cannot write output in {output}: {exc}")
        return 1
    except ValueError as exc:
        err(f"error: {exc}")
        return 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="retarded", description="Retarded potentials and field verification")
    parser.add_argument("--scenario", required=True, type=Path, help="JSON scenario file")
    parser.add_argument("--command", required=True, choices=COMMANDS)
    parser.add_argument("--output", type=Path, default=Path("out"), help="output directory (default: out)")
    parser.add_argument("--quiet", action="store_true", help="suppress progress and tables on stdout")
    args = parser.parse_args(argv)
    try:
        text = args.scenario.read_text()
    except OSError as exc:
        print(f"error: cannot read scenario {args.scenario}: {exc.strerror}", file=sys.stderr)
        return 1
    try:
        scenario = parse_scenario(text)
    except ScenarioError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return 1
    return run(scenario, args.command, args.output, args.quiet)


if __name__ == "__main__":
    sys.exit(main())
