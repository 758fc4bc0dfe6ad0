"""Run configuration, pipeline orchestration and CSV reports."""
from __future__ import annotations

import configparser
import csv
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .exact_models import ExactModel
from .harmonics import HarmonicBasis, HarmonicExpansion, fit_least_squares
from .perturbation import (BoundaryData, PerturbationSolution, evaluate_v, gradient_v,
                           run_cascade)
from .quadrature import QuadratureConfig
from .sphere_geom import (SphericalPoint, SurfaceMesh, icosahedron_nodes, load_triangle_mesh,
                          sph_to_cart_array, uv_grid_nodes)

REPORT_KINDS = ("error_table", "field", "sweep")
ERROR_TABLE_COLUMNS = ["node", "phi", "theta", "v_exact_re", "v_exact_im",
                       "e1_re", "e1_im", "e2_re", "e2_im", "e3_re", "e3_im"]
FIELD_COLUMNS = ["node", "x", "y", "z", "gx_re", "gy_re", "gz_re", "gx_im", "gy_im", "gz_im"]
SWEEP_COLUMNS = ["radius", "probe", "abs_error", "order", "n_gauss", "inner_abs_tol",
                 "inner_rel_tol", "max_subdivisions", "basis_lmax"]


class ConfigError(ValueError):
    pass


def fmt(x: float) -> str:
    """Round-trip float formatting (17 significant digits)."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class RunConfig:
    model: str = "degree1"
    epsilon: float = 1e-4
    radius: float = 1.0
    mesh: str = "ico"
    order: int = 3
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    basis_lmax: int = 2
    h_lmax: int = 4
    outputs: tuple = ("error_table", "field")
    out_dir: str = "out"
    sweep_radii: tuple = (1.0, 10.0, 100.0)
    probe: int = 5

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if self.order not in (1, 2, 3):
            raise ConfigError("order must be 1, 2 or 3")
        if not self.radius >= 1.0:
            raise ConfigError("radius must be >= 1")
        if self.basis_lmax < 1:
            raise ConfigError("basis_lmax must be at least 1")
        unknown = set(self.outputs) - set(REPORT_KINDS)
        if unknown:
            raise ConfigError(f"unknown report kind(s): {sorted(unknown)}")
        if not (self.model in ("degree1", "degree4") or self.model.startswith("external:")):
            raise ConfigError(f"model must be degree1, degree4 or external:<path>, got {self.model!r}")
        parse_mesh_spec(self.mesh)  # validates syntax


def parse_mesh_spec(spec: str):
    spec = spec.strip()
    if spec == "ico":
        return ("ico",)
    m = re.fullmatch(r"uv:(\d+)x(\d+)", spec)
    if m:
        return ("uv", int(m.group(1)), int(m.group(2)))
    if spec.startswith("tri:") and len(spec) > 4:
        return ("tri", spec[4:])
    raise ConfigError(f"mesh must be ico, uv:NxM or tri:<path>, got {spec!r}")


def build_mesh(spec: str, radius: float) -> SurfaceMesh:
    parsed = parse_mesh_spec(spec)
    if parsed[0] == "ico":
        return icosahedron_nodes(radius)
    if parsed[0] == "uv":
        return uv_grid_nodes(parsed[1], parsed[2], radius)
    return load_triangle_mesh(parsed[1], radius)


def config_to_text(cfg: RunConfig) -> str:
    q = cfg.quadrature
    kind = cfg.model
    return "\n".join([
        "[model]",
        f"kind = {kind}",
        f"epsilon = {cfg.epsilon!r}",
        f"h_lmax = {cfg.h_lmax}",
        "",
        "[mesh]",
        f"spec = {cfg.mesh}",
        f"radius = {cfg.radius!r}",
        "",
        "[solver]",
        f"order = {cfg.order}",
        f"basis_lmax = {cfg.basis_lmax}",
        f"n_gauss = {q.n_gauss_zeta}",
        f"abs_tol = {q.inner_abs_tol!r}",
        f"rel_tol = {q.inner_rel_tol!r}",
        f"max_subdivisions = {q.max_subdivisions}",
        "",
        "[output]",
        f"reports = {', '.join(cfg.outputs)}",
        f"out_dir = {cfg.out_dir}",
        f"sweep_radii = {', '.join(repr(r) for r in cfg.sweep_radii)}",
        f"probe = {cfg.probe}",
        "",
    ])


def _split_list(text):
    return tuple(t.strip() for t in text.split(",") if t.strip())


def load_config(path=None, **overrides) -> RunConfig:
    """Read an INI-style config file and apply keyword overrides.

    Unknown sections or keys are rejected so typos do not pass silently.
    """
    base = RunConfig()
    values = {}
    qvals = {}
    if path is not None:
        parser = configparser.ConfigParser()
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        allowed = {
            "model": {"kind", "epsilon", "h_lmax", "h_file"},
            "mesh": {"spec", "radius"},
            "solver": {"order", "basis_lmax", "n_gauss", "abs_tol", "rel_tol", "max_subdivisions"},
            "output": {"reports", "out_dir", "sweep_radii", "probe"},
        }
        for section in parser.sections():
            if section not in allowed:
                raise ConfigError(f"unknown config section [{section}]")
            extra = set(parser[section]) - allowed[section]
            if extra:
                raise ConfigError(f"unknown key(s) in [{section}]: {sorted(extra)}")
        try:
            sec = parser["model"] if parser.has_section("model") else {}
            if "kind" in sec:
                values["model"] = sec["kind"].strip()
            if sec.get("h_file", "").strip():
                values["model"] = "external:" + sec["h_file"].strip()
            if "epsilon" in sec:
                values["epsilon"] = float(sec["epsilon"])
            if "h_lmax" in sec:
                values["h_lmax"] = int(sec["h_lmax"])
            sec = parser["mesh"] if parser.has_section("mesh") else {}
            if "spec" in sec:
                values["mesh"] = sec["spec"].strip()
            if "radius" in sec:
                values["radius"] = float(sec["radius"])
            sec = parser["solver"] if parser.has_section("solver") else {}
            if "order" in sec:
                values["order"] = int(sec["order"])
            if "basis_lmax" in sec:
                values["basis_lmax"] = int(sec["basis_lmax"])
            if "n_gauss" in sec:
                qvals["n_gauss_zeta"] = int(sec["n_gauss"])
            if "abs_tol" in sec:
                qvals["inner_abs_tol"] = float(sec["abs_tol"])
            if "rel_tol" in sec:
                qvals["inner_rel_tol"] = float(sec["rel_tol"])
            if "max_subdivisions" in sec:
                qvals["max_subdivisions"] = int(sec["max_subdivisions"])
            sec = parser["output"] if parser.has_section("output") else {}
            if "reports" in sec:
                values["outputs"] = _split_list(sec["reports"])
            if "out_dir" in sec:
                values["out_dir"] = sec["out_dir"].strip()
            if "sweep_radii" in sec:
                values["sweep_radii"] = tuple(float(t) for t in _split_list(sec["sweep_radii"]))
            if "probe" in sec:
                values["probe"] = int(sec["probe"])
        except ValueError as exc:
            raise ConfigError(f"bad value in {path}: {exc}") from exc

    for key, val in overrides.items():
        if val is None:
            continue
        if key in ("n_gauss_zeta", "inner_abs_tol", "inner_rel_tol", "max_subdivisions"):
            qvals[key] = val
        else:
            values[key] = val
    try:
        quad = replace(base.quadrature, **qvals)
        return replace(base, quadrature=quad, **values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_external_h(path, lmax: int = 4) -> BoundaryData:
    """Boundary data from a CSV of ``phi,theta,h_re,h_im`` samples.

    The samples are least-squares fitted with all harmonics of degree
    ``0..lmax`` and the fitted expansion is used as ``h``.
    """
    try:
        data = np.genfromtxt(path, delimiter=",", names=True, dtype=float)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read h samples from {path}: {exc}") from exc
    names = data.dtype.names or ()
    if set(names) != {"phi", "theta", "h_re", "h_im"}:
        raise ConfigError(f"{path}: expected columns phi,theta,h_re,h_im, got {names}")
    data = np.atleast_1d(data)
    if not all(np.all(np.isfinite(data[n])) for n in names):
        raise ConfigError(f"{path}: non-numeric or non-finite h sample")
    exp = fit_least_squares(data["phi"], data["theta"], data["h_re"] + 1j * data["h_im"],
                            HarmonicBasis.up_to(lmax, 0))
    return BoundaryData(exp, "h")


def monopole(r, phi, theta):
    return 1.0 / np.asarray(r, float) + 0j


def emit_error_table(solution: PerturbationSolution, reference, path) -> np.ndarray:
    """Write ``reference - v_k`` at every node; returns the complex errors.

    ``reference(r, phi, theta)`` is the exact potential (or the monopole
    when no exact solution is known).  Orders not computed are ``nan``.
    """
    mesh = solution.mesh
    v_ref = reference(mesh.r, mesh.phi, mesh.theta)
    errors = v_ref[None, :] - solution.v_values
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ERROR_TABLE_COLUMNS)
        for i, node in enumerate(mesh.nodes):
            row = [i + 1, fmt(node.phi), fmt(node.theta), fmt(v_ref[i].real), fmt(v_ref[i].imag)]
            for k in range(3):
                e = errors[k, i] if k < solution.order else complex(math.nan, math.nan)
                row += [fmt(e.real), fmt(e.imag)]
            w.writerow(row)
    return errors


def field_vectors(solution: PerturbationSolution) -> np.ndarray:
    """Cartesian complex ``grad v_order`` at every node, shape ``(N, 3)``."""
    mesh = solution.mesh
    out = np.empty((len(mesh), 3), dtype=complex)
    for i, node in enumerate(mesh.nodes):
        g = gradient_v(solution, node)
        st, ct = math.sin(node.theta), math.cos(node.theta)
        sp, cp = math.sin(node.phi), math.cos(node.phi)
        r_hat = np.array([st * cp, st * sp, ct])
        t_hat = np.array([ct * cp, ct * sp, -st])
        p_hat = np.array([-sp, cp, 0.0])
        out[i] = g[0] * r_hat + g[1] * t_hat + g[2] * p_hat
    return out


def emit_field_csv(solution: PerturbationSolution, path) -> np.ndarray:
    mesh = solution.mesh
    xyz = mesh.cartesian()
    g = field_vectors(solution)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIELD_COLUMNS)
        for i in range(len(mesh)):
            w.writerow([i + 1, *map(fmt, xyz[i]), *map(fmt, g[i].real), *map(fmt, g[i].imag)])
    return g


def radius_sweep(solution: PerturbationSolution, reference, radii, probe: int):
    """``|reference - v_order|`` at the probe node's direction for each radius."""
    node = solution.mesh.nodes[probe - 1]
    radii = np.asarray(radii, float)
    phi = np.full_like(radii, node.phi)
    theta = np.full_like(radii, node.theta)
    v = evaluate_v(solution, radii, phi, theta)[-1]
    return np.abs(reference(radii, phi, theta) - v)


def emit_radius_sweep(solution: PerturbationSolution, reference, radii, probe: int, path,
                      basis_lmax: int = 2) -> np.ndarray:
    if not 1 <= probe <= len(solution.mesh):
        raise ConfigError(f"probe node {probe} is outside 1..{len(solution.mesh)}")
    errs = radius_sweep(solution, reference, radii, probe)
    q = solution.quadrature
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r, e in zip(radii, errs):
            w.writerow([fmt(r), probe, fmt(e), solution.order, q.n_gauss_zeta,
                        fmt(q.inner_abs_tol), fmt(q.inner_rel_tol), q.max_subdivisions, basis_lmax])
    return errs


@dataclass
class RunResult:
    solution: PerturbationSolution
    max_error: float
    files: dict
    summary: str


def run(cfg: RunConfig) -> RunResult:
    """Execute the pipeline described by ``cfg`` and write the requested reports."""
    if cfg.model.startswith("external:"):
        h = load_external_h(cfg.model.split(":", 1)[1], cfg.h_lmax)
        reference = monopole
    else:
        model = ExactModel(cfg.model, cfg.epsilon)
        h = model.boundary_data()
        reference = model.v
    mesh = build_mesh(cfg.mesh, cfg.radius)
    basis = HarmonicBasis.up_to(cfg.basis_lmax)
    solution = run_cascade(h, mesh, cfg.epsilon, cfg.order, cfg.quadrature, basis)

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    v_ref = reference(mesh.r, mesh.phi, mesh.theta)
    max_error = float(np.max(np.abs(v_ref - solution.v())))
    if "error_table" in cfg.outputs:
        files["error_table"] = out / "error_table.csv"
        emit_error_table(solution, reference, files["error_table"])
    if "field" in cfg.outputs:
        files["field"] = out / "field.csv"
        emit_field_csv(solution, files["field"])
    if "sweep" in cfg.outputs:
        files["sweep"] = out / "radius_sweep.csv"
        emit_radius_sweep(solution, reference, cfg.sweep_radii, cfg.probe, files["sweep"],
                          cfg.basis_lmax)
    summary = (f"max |v - v{cfg.order}| over {len(mesh)} nodes = {max_error:.6e} "
               f"(model={cfg.model}, eps={cfg.epsilon:g}, mesh={cfg.mesh}, r={cfg.radius:g})")
    return RunResult(solution, max_error, files, summary)
