"""Scenario configuration: line-oriented sectioned key = value files.

Grammar: blank lines and '#' comments are skipped; a line '[name]'
opens a section; other lines are 'key = value'.  Unknown sections and
keys are rejected; all violations are collected into one SchemaError
with line numbers.  docs/config_schema.md documents every field with
its units.
"""

from dataclasses import dataclass

from .errors import SchemaError
from .mesh import BoundaryTag
from .pressure import SorParams
from .reflection import FluidProperties
from .solver import RunConfig

_INF = float("inf")


def _parse_float(text):
    if text.strip().lower() in ("inf", "+inf", "infinity"):
        return _INF
    return float(text)


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_vec3(text):
    parts = text.split()
    if len(parts) != 3:
        raise ValueError("expected three components")
    return tuple(float(p) for p in parts)


def _parse_ints(text):
    return tuple(int(p) for p in text.split())


# (parser, default); REQUIRED means the key must be present.
REQUIRED = object()

_SCHEMA = {
    "mesh": {
        "type": (str.strip, REQUIRED),            # box | annulus | file
        "nx": (int, 1), "ny": (int, 1), "nz": (int, 1),
        "lengths": (_parse_vec3, (1.0, 1.0, 1.0)),
        "grading": (_parse_vec3, (1.0, 1.0, 1.0)),
        "nr": (int, 4), "ntheta": (int, 16),
        "r_inner": (_parse_float, 0.0), "r_outer": (_parse_float, 0.0),
        "length": (_parse_float, 0.0),
        "file": (str.strip, ""),
    },
    "fluid": {
        "alpha": (_parse_float, REQUIRED),        # m^2/s
        "mu": (_parse_float, REQUIRED),           # Pa s
        "rho_inf": (_parse_float, REQUIRED),      # kg/m^3
        "beta_exp": (_parse_float, REQUIRED),     # 1/K
        "t_inf": (_parse_float, REQUIRED),        # K
        "gravity": (_parse_vec3, (0.0, 0.0, -9.81)),  # m/s^2
    },
    "initial": {
        "temperature": (_parse_float, None),      # K; default t_inf
        "velocity": (_parse_vec3, (0.0, 0.0, 0.0)),
        "pressure": (_parse_float, 0.0),
    },
    "boundary": None,                             # free keys: group names
    "source": {
        "kind": (str.strip, "none"),   # none | constant | inner_shell | box_region | cell_table
        "q": (_parse_float, 0.0),                 # K/s
        "group": (str.strip, "inner"),            # inner_shell: boundary group
        "region": ((lambda t: tuple(float(x) for x in t.split())), ()),
        "table": (str.strip, ""),                 # cell_table: csv path
    },
    "run": {
        "t_end": (_parse_float, REQUIRED),        # s
        "tau": (str.strip, "auto"),               # auto | fixed
        "tau_value": (_parse_float, 0.0),         # s (fixed)
        "safety": (_parse_float, 0.4),
        "tau_recompute_every": (int, 10),
        "u_floor": (_parse_float, 1e-9),          # m/s
        "steady_tol": (_parse_float, 0.0),        # 0 disables
        "steady_check_every": (int, 100),
        "max_steps": (int, 0),
        "on_not_converged": (str.strip, "warn"),  # warn | abort
    },
    "pressure": {
        "omega": (_parse_float, 1.5),
        "eps_global": (_parse_float, None),       # m^3/s; default auto
        "eps_cell": (_parse_float, None),
        "max_inner": (int, 200),
        "max_outer": (int, 50),
    },
    "output": {
        "directory": (str.strip, "out"),
        "monitor_every": (int, 0),
        "vtk": (_parse_bool, False),
        "vtk_every": (int, 0),                    # 0: final state only
        "probes": (_parse_ints, ()),              # cell ids
        "probe_every": (int, 100),
    },
}

_WALLS = ("noslip", "freeslip")
_TCONDS = ("fixed", "adiabatic")


@dataclass
class ScenarioConfig:
    """Validated scenario: sections resolved to plain dicts plus the
    boundary assignment map {group: BoundaryTag}."""
    mesh: dict
    fluid: dict
    initial: dict
    boundary: dict
    source: dict
    run: dict
    pressure: dict
    output: dict

    def fluid_properties(self):
        f = self.fluid
        return FluidProperties(alpha=f["alpha"], mu=f["mu"], rho_inf=f["rho_inf"],
                               beta_exp=f["beta_exp"], T_inf=f["t_inf"],
                               g=f["gravity"])

    def sor_params(self):
        p = self.pressure
        return SorParams(omega=p["omega"], eps_global=p["eps_global"],
                         eps_cell=p["eps_cell"], max_inner=p["max_inner"],
                         max_outer=p["max_outer"])

    def run_config(self):
        r = self.run
        return RunConfig(t_end=r["t_end"], tau_policy=r["tau"],
                         tau_value=r["tau_value"], safety=r["safety"],
                         tau_recompute_every=r["tau_recompute_every"],
                         u_floor=r["u_floor"], sor=self.sor_params(),
                         steady_tol=r["steady_tol"],
                         steady_check_every=r["steady_check_every"],
                         monitor_every=self.output["monitor_every"],
                         on_not_converged=r["on_not_converged"],
                         max_steps=r["max_steps"])


def _parse_lines(text, errors):
    """Raw (section, key, value, line_no) records."""
    records = []
    section = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in _SCHEMA:
                errors.append(f"line {no}: unknown section [{section}]")
                section = ("!bad", section)
            continue
        if "=" not in line:
            errors.append(f"line {no}: expected 'key = value', got {line!r}")
            continue
        if section is None:
            errors.append(f"line {no}: key outside of any section")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        records.append((section, key.lower(), value, no))
    return records


def _parse_boundary_value(value, no, errors):
    parts = value.split()
    if not parts or parts[0] not in _WALLS:
        errors.append(f"line {no}: boundary must start with one of {_WALLS}")
        return None
    wall = parts[0]
    tcond = parts[1] if len(parts) > 1 else "adiabatic"
    if tcond not in _TCONDS:
        errors.append(f"line {no}: temperature condition must be one of {_TCONDS}")
        return None
    if tcond == "fixed":
        if len(parts) != 3:
            errors.append(f"line {no}: 'fixed' requires a temperature value")
            return None
        try:
            return BoundaryTag(wall, tcond, float(parts[2]))
        except ValueError:
            errors.append(f"line {no}: bad temperature value {parts[2]!r}")
            return None
    if len(parts) > 2:
        errors.append(f"line {no}: unexpected trailing tokens in boundary value")
        return None
    return BoundaryTag(wall, tcond)


def parse_config(text):
    """Parse and validate a scenario config; raises SchemaError with all
    violations (line and field named) or returns a ScenarioConfig."""
    errors = []
    records = _parse_lines(text, errors)

    sections = {name: {} for name in _SCHEMA}
    boundary = {}
    for section, key, value, no in records:
        if isinstance(section, tuple):     # inside an unknown section
            continue
        if section == "boundary":
            tag = _parse_boundary_value(value, no, errors)
            if tag is not None:
                boundary[key] = tag
            continue
        schema = _SCHEMA[section]
        if key not in schema:
            errors.append(f"line {no}: unknown key '{key}' in section [{section}]")
            continue
        parser, _ = schema[key]
        try:
            sections[section][key] = parser(value)
        except (ValueError, TypeError) as exc:
            errors.append(f"line {no}: bad value for [{section}] {key}: {exc}")

    for name, schema in _SCHEMA.items():
        if schema is None:
            continue
        for key, (parser, default) in schema.items():
            if key in sections[name]:
                continue
            if default is REQUIRED:
                errors.append(f"missing required key '{key}' in section [{name}]")
            else:
                sections[name][key] = default

    _validate_semantics(sections, boundary, errors)
    if errors:
        raise SchemaError(errors)

    if sections["initial"]["temperature"] is None:
        sections["initial"]["temperature"] = sections["fluid"]["t_inf"]
    return ScenarioConfig(mesh=sections["mesh"], fluid=sections["fluid"],
                          initial=sections["initial"], boundary=boundary,
                          source=sections["source"], run=sections["run"],
                          pressure=sections["pressure"], output=sections["output"])


def _validate_semantics(sections, boundary, errors):
    mesh = sections["mesh"]
    mtype = mesh.get("type")
    if mtype not in (None, "box", "annulus", "file"):
        errors.append(f"[mesh] type must be box, annulus or file, got {mtype!r}")
    if mtype == "file":
        if not mesh.get("file"):
            errors.append("[mesh] type=file requires 'file ='")
        if boundary:
            errors.append("[boundary] section not allowed with file meshes "
                          "(tags come from the mesh file)")
    if mtype == "annulus":
        if not (0.0 < mesh.get("r_inner", 0.0) < mesh.get("r_outer", 0.0)):
            errors.append("[mesh] annulus requires 0 < r_inner < r_outer")
        if mesh.get("length", 0.0) <= 0:
            errors.append("[mesh] annulus requires length > 0")

    fluid = sections["fluid"]
    for key in ("alpha", "mu", "rho_inf"):
        if key in fluid and fluid[key] is not REQUIRED and fluid[key] is not None:
            if isinstance(fluid[key], float) and fluid[key] <= 0:
                errors.append(f"[fluid] {key} must be positive")

    run = sections["run"]
    if run.get("tau") not in (None, "auto", "fixed"):
        errors.append("[run] tau must be auto or fixed")
    if run.get("tau") == "fixed" and run.get("tau_value", 0.0) <= 0:
        errors.append("[run] tau=fixed requires tau_value > 0")
    if run.get("on_not_converged") not in (None, "warn", "abort"):
        errors.append("[run] on_not_converged must be warn or abort")
    if isinstance(run.get("t_end"), float) and run["t_end"] <= 0:
        errors.append("[run] t_end must be positive")

    pres = sections["pressure"]
    omega = pres.get("omega")
    if isinstance(omega, float) and not (0.0 < omega < 2.0):
        errors.append("[pressure] omega must lie in (0, 2)")

    src = sections["source"]
    kind = src.get("kind")
    if kind not in (None, "none", "constant", "inner_shell", "box_region", "cell_table"):
        errors.append(f"[source] unknown kind {kind!r}")
    if kind == "box_region" and len(src.get("region", ())) != 6:
        errors.append("[source] box_region requires 'region = x0 y0 z0 x1 y1 z1'")
    if kind == "cell_table" and not src.get("table"):
        errors.append("[source] cell_table requires 'table = <csv path>'")


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def format_config(cfg):
    """Render a ScenarioConfig back to text (defaults materialised);
    re-parsing the output yields an identical config."""
    def fmt(value):
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, float):
            return f"{value:.17g}"
        if isinstance(value, tuple):
            return " ".join(fmt(v) for v in value)
        return str(value)

    lines = []
    for name in ("mesh", "fluid", "initial", "source", "run", "pressure", "output"):
        section = getattr(cfg, name)
        lines.append(f"[{name}]")
        for key, value in section.items():
            if value is None or (isinstance(value, (tuple, str)) and not value):
                continue
            lines.append(f"{key} = {fmt(value)}")
        lines.append("")
    if cfg.boundary:
        lines.append("[boundary]")
        for group, tag in cfg.boundary.items():
            entry = f"{group} = {tag.wall} {tag.tcond}"
            if tag.tcond == "fixed":
                entry += f" {tag.value:.17g}"
            lines.append(entry)
        lines.append("")
    return "\n".join(lines)
