"""Scenario file format: line-oriented key = value with bracketed sections.

Sections and keys:

    [ambient]    model = <registry name>
                 # or an inline structure in chart variables u1..u(2n+1):
                 n = <int>, g = <rows ; cols ,>, phi = <rows ; cols ,>,
                 xi = <exprs ,>, eta = <exprs ,>
    [immersion]  name = <catalog name>
                 # or inline:
                 map = <2n+1 comma-separated expressions in u1..um>
                 domain = <m comma-separated lo:hi intervals>
                 name = <optional label>
    [checks]     run = structure, sasakian, slant, corollary31,
                       lemma41, theorem41, theorem42   (subset or "all")
    [samples]    count = <int>, seed = <int>, grid = <pts ; coords space-sep>
    [fd]         step = <float>, second_order_step = <float>,
                 richardson = on | off
    [tolerances] <check name> = <float>

Comment lines start with '#'. Unknown sections, unknown keys, and unknown
tolerance names are hard errors so golden files cannot drift silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Mapping

import numpy as np

from .. import ambient as ambient_mod
from .. import submanifold as submanifold_mod
from ..errors import ScenarioError
from ..tensor_core import FDConfig
from .expr import compile_components, max_param_index, parse_expr

CHECK_NAMES = (
    "structure",
    "sasakian",
    "slant",
    "corollary31",
    "lemma41",
    "theorem41",
    "theorem42",
)

DEFAULT_COUNT = 50

_SECTION_KEYS = {
    "ambient": {"model", "n", "g", "phi", "xi", "eta"},
    "immersion": {"name", "map", "domain"},
    "checks": {"run"},
    "samples": {"count", "seed", "grid"},
    "fd": {"step", "second_order_step", "richardson"},
    "tolerances": set(CHECK_NAMES),
}


@dataclass(frozen=True)
class Scenario:
    """Fully resolved scenario: structures built, names validated."""

    name: str
    ambient: ambient_mod.AmbientStructure
    immersion: submanifold_mod.Immersion | None
    checks: tuple[str, ...]
    fd: FDConfig
    sample_count: int
    seed: int
    grid: tuple[tuple[float, ...], ...] | None
    tolerances: Mapping[str, float] = dc_field(default_factory=dict)


def _parse_sections(src: str) -> dict[str, dict[str, tuple[str, int]]]:
    sections: dict[str, dict[str, tuple[str, int]]] = {}
    current: str | None = None
    for lineno, raw in enumerate(src.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in _SECTION_KEYS:
                raise ScenarioError(f"line {lineno}: unknown section [{current}]")
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if current is None:
            raise ScenarioError(f"line {lineno}: key outside any section")
        key, value = line.split("=", 1)
        key = key.strip()
        if key not in _SECTION_KEYS[current]:
            raise ScenarioError(f"line {lineno}: unknown key {key!r} in [{current}]")
        if key in sections[current]:
            raise ScenarioError(f"line {lineno}: duplicate key {key!r} in [{current}]")
        sections[current][key] = (value.strip(), lineno)
    return sections


def _float(value: str, lineno: int, what: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ScenarioError(f"line {lineno}: bad {what} {value!r}")


def _int(value: str, lineno: int, what: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ScenarioError(f"line {lineno}: bad {what} {value!r}")


def _expr_vector(value: str, lineno: int, n_params: int, what: str):
    parts = [p.strip() for p in value.split(",")]
    try:
        return [parse_expr(p, n_params) for p in parts]
    except Exception as exc:
        raise ScenarioError(f"line {lineno}: bad expression in {what}: {exc}")


def _expr_matrix(value: str, lineno: int, n_params: int, what: str):
    rows = [r for r in (row.strip() for row in value.split(";")) if r]
    return [_expr_vector(row, lineno, n_params, what) for row in rows]


def _inline_ambient(section, cfg: FDConfig) -> ambient_mod.AmbientStructure:
    if "n" not in section:
        raise ScenarioError("[ambient]: inline definition requires the key 'n'")
    n = _int(section["n"][0], section["n"][1], "chart parameter n")
    dim = 2 * n + 1
    required = ("g", "phi", "xi", "eta")
    missing = [k for k in required if k not in section]
    if missing:
        raise ScenarioError(f"[ambient]: inline definition missing keys {missing}")
    g_rows = _expr_matrix(section["g"][0], section["g"][1], dim, "g")
    phi_rows = _expr_matrix(section["phi"][0], section["phi"][1], dim, "phi")
    for label, rows in (("g", g_rows), ("phi", phi_rows)):
        if len(rows) != dim or any(len(r) != dim for r in rows):
            raise ScenarioError(f"[ambient]: {label} must be a {dim}x{dim} matrix")
    xi_exprs = _expr_vector(section["xi"][0], section["xi"][1], dim, "xi")
    eta_exprs = _expr_vector(section["eta"][0], section["eta"][1], dim, "eta")
    if len(xi_exprs) != dim or len(eta_exprs) != dim:
        raise ScenarioError(f"[ambient]: xi and eta must have {dim} components")

    g_fn = _matrix_callable(g_rows)
    phi_fn = _matrix_callable(phi_rows)
    xi_fn = compile_components(xi_exprs)
    eta_fn = compile_components(eta_exprs)
    base = ambient_mod.AmbientStructure(
        name="inline", n=n, metric=g_fn, phi=phi_fn, xi=xi_fn, eta=eta_fn,
        smoothness_note="inline scenario structure",
    )
    # measure the covariant-phi sign rather than assuming it
    rng = np.random.default_rng(ambient_mod.DEFAULT_SEED)
    points = [rng.uniform(-0.5, 0.5, dim) for _ in range(3)]
    residuals = ambient_mod._cov_phi_residuals(base, points, cfg, rng)
    sign = min(residuals, key=lambda k: residuals[k])
    note = base.smoothness_note + f"; covariant-phi empirical sign {sign:+.0f}"
    from dataclasses import replace

    return replace(base, cov_phi_sign=sign, smoothness_note=note)


def _matrix_callable(rows):
    flat = [e for row in rows for e in row]
    vec = compile_components(flat)
    dim = len(rows)

    def fn(p):
        return vec(p).reshape(dim, dim)

    return fn


def _inline_immersion(section, ambient_dim: int) -> submanifold_mod.Immersion:
    if "domain" not in section:
        raise ScenarioError("[immersion]: inline definition requires 'domain'")
    dom_val, dom_line = section["domain"]
    intervals = []
    for part in dom_val.split(","):
        part = part.strip()
        if ":" not in part:
            raise ScenarioError(f"line {dom_line}: domain interval {part!r} is not lo:hi")
        lo_s, hi_s = part.split(":", 1)
        intervals.append(
            (_float(lo_s, dom_line, "domain bound"), _float(hi_s, dom_line, "domain bound"))
        )
    m = len(intervals)
    map_val, map_line = section["map"]
    exprs = _expr_vector(map_val, map_line, m, "map")
    if len(exprs) != ambient_dim:
        raise ScenarioError(
            f"line {map_line}: immersion has {len(exprs)} components, "
            f"ambient chart needs {ambient_dim}"
        )
    used = max(max_param_index(e) for e in exprs) + 1
    if used > m:
        raise ScenarioError(
            f"line {map_line}: immersion uses u{used} but only {m} domain intervals given"
        )
    name = section.get("name", ("inline-immersion", 0))[0]
    return submanifold_mod.Immersion(
        name=name,
        m=m,
        ambient_dim=ambient_dim,
        mapping=compile_components(exprs),
        domain_box=tuple(intervals),
    )


def load_scenario(
    src: str, name: str = "scenario", default_seed: int = ambient_mod.DEFAULT_SEED
) -> Scenario:
    """Parse and fully resolve a scenario file body."""
    sections = _parse_sections(src)

    fd_kwargs = {}
    fd_section = sections.get("fd", {})
    if "step" in fd_section:
        fd_kwargs["step"] = _float(*fd_section["step"], "fd step")
    if "second_order_step" in fd_section:
        fd_kwargs["second_order_step"] = _float(
            *fd_section["second_order_step"], "fd second_order_step"
        )
    if "richardson" in fd_section:
        value, lineno = fd_section["richardson"]
        if value not in ("on", "off"):
            raise ScenarioError(f"line {lineno}: richardson must be 'on' or 'off'")
        fd_kwargs["richardson"] = value == "on"
    try:
        cfg = FDConfig(**fd_kwargs)
    except ValueError as exc:
        raise ScenarioError(f"[fd]: {exc}")

    amb_section = sections.get("ambient", {})
    if "model" in amb_section:
        extra = set(amb_section) - {"model"}
        if extra:
            raise ScenarioError(
                f"[ambient]: 'model' cannot be combined with inline keys {sorted(extra)}"
            )
        try:
            structure = ambient_mod.get_structure(amb_section["model"][0], cfg)
        except Exception as exc:
            raise ScenarioError(f"[ambient]: {exc}")
    elif amb_section:
        structure = _inline_ambient(amb_section, cfg)
    else:
        structure = ambient_mod.get_structure("lorentz-sasakian-R5", cfg)

    imm_section = sections.get("immersion", {})
    immersion = None
    if "map" in imm_section:
        immersion = _inline_immersion(imm_section, structure.dim)
    elif "name" in imm_section:
        extra = set(imm_section) - {"name"}
        if extra:
            raise ScenarioError(
                f"[immersion]: 'name' cannot be combined with inline keys {sorted(extra)}"
            )
        try:
            immersion = submanifold_mod.get_immersion(imm_section["name"][0])
        except Exception as exc:
            raise ScenarioError(f"[immersion]: {exc}")
        if immersion.ambient_dim != structure.dim:
            raise ScenarioError(
                f"[immersion]: catalog immersion targets dimension "
                f"{immersion.ambient_dim}, ambient chart has {structure.dim}"
            )

    checks_section = sections.get("checks", {})
    if "run" not in checks_section:
        raise ScenarioError("[checks]: the 'run' key is required and must be nonempty")
    raw_checks, checks_line = checks_section["run"]
    if raw_checks.strip() == "all":
        checks = CHECK_NAMES
    else:
        checks = tuple(c.strip() for c in raw_checks.split(",") if c.strip())
        unknown = [c for c in checks if c not in CHECK_NAMES]
        if unknown:
            raise ScenarioError(f"line {checks_line}: unknown checks {unknown}")
    if not checks:
        raise ScenarioError(f"line {checks_line}: empty check list")
    needs_immersion = [c for c in checks if c not in ("structure", "sasakian")]
    if needs_immersion and immersion is None:
        raise ScenarioError(
            f"checks {needs_immersion} require an [immersion] section"
        )

    samples = sections.get("samples", {})
    count = DEFAULT_COUNT
    if "count" in samples:
        count = _int(*samples["count"], "sample count")
        if count < 1:
            raise ScenarioError("[samples]: count must be positive")
    seed = default_seed
    if "seed" in samples:
        seed = _int(*samples["seed"], "seed")
    grid = None
    if "grid" in samples:
        value, lineno = samples["grid"]
        pts = []
        for chunk in value.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            pts.append(tuple(_float(c, lineno, "grid coordinate") for c in chunk.split()))
        if not pts:
            raise ScenarioError(f"line {lineno}: empty grid")
        if immersion is not None:
            for pt in pts:
                if len(pt) != immersion.m:
                    raise ScenarioError(
                        f"line {lineno}: grid point {pt} has {len(pt)} coordinates, "
                        f"immersion has {immersion.m} parameters"
                    )
        grid = tuple(pts)

    tolerances = {}
    for key, (value, lineno) in sections.get("tolerances", {}).items():
        tolerances[key] = _float(value, lineno, "tolerance")

    return Scenario(
        name=name,
        ambient=structure,
        immersion=immersion,
        checks=checks,
        fd=cfg,
        sample_count=count,
        seed=seed,
        grid=grid,
        tolerances=tolerances,
    )
