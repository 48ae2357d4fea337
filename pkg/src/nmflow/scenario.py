"""Scenario configuration, pipelines and deterministic output writers."""

import csv
import io
import itertools
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import jc, sbm
from .analysis import detect_intervals, overlap_correlation, verify_relation
from .dynamics import integrate
from .errors import NumericalError
from .spectral import OhmicFamily

JC_KEYS = ("omega0", "gamma0", "lambda")
SBM_KEYS = ("omega0", "alpha", "s", "omega_c", "T")
VOLTERRA_HORIZON = 20.0


class ConfigError(ValueError):
    def __init__(self, message, source="<config>", line=None):
        where = f"{source}:{line}" if line else source
        super().__init__(f"{where}: {message}")
        self.line = line


@dataclass
class ScenarioConfig:
    name: str
    model: str
    params: dict
    t_max: float
    n_samples: int
    step: float = 1e-3
    oracle: bool = False
    threshold: float = 1e-10
    trajectory_csv: str | None = None
    report_json: str | None = None
    sweep_csv: str | None = None
    sweep: dict = field(default_factory=dict)

    def resolved(self):
        return asdict(self)


def _locate(text, section, key):
    current = None
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line.startswith("[") and line.endswith("]"):
            current = line.strip("[]").strip()
        elif current == section and line.split("=", 1)[0].strip() == key:
            return i
    return None


def _line_of_section(text, section):
    for i, raw in enumerate(text.splitlines(), start=1):
        if raw.strip() == f"[{section}]":
            return i
    return None


def parse_config(text, source="<config>"):
    """Parse and validate TOML scenario text."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(exc), source) from None
    return config_from_dict(data, source, text)


def config_from_dict(data, source="<config>", text=""):
    def fail(msg, section, key=None):
        line = _locate(text, section, key) if key else _line_of_section(text, section)
        raise ConfigError(msg, source, line)

    if "config" in data and "scenario" not in data:  # a report written by run
        data = data["config"]
        return _from_resolved(data, source)

    for section in ("scenario", "params", "grid"):
        if not isinstance(data.get(section), dict):
            raise ConfigError(f"missing section [{section}]", source)
    scen, params, grid = data["scenario"], dict(data["params"]), data["grid"]
    model = scen.get("model")
    if model not in ("jc", "sbm"):
        fail(f"model must be 'jc' or 'sbm', got {model!r}", "scenario", "model")
    keys = JC_KEYS if model == "jc" else SBM_KEYS
    for k in params:
        if k not in keys:
            fail(f"unknown parameter {k!r} for model {model}", "params", k)
    params.setdefault("omega0", 1.0)
    for k in keys:
        if k not in params:
            fail(f"missing parameter {k!r}", "params")
        v = params[k]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            fail(f"parameter {k!r} must be a number", "params", k)
        params[k] = float(v)
        if k == "T":
            if params[k] < 0:
                fail("T must be >= 0", "params", k)
        elif not params[k] > 0:
            fail(f"{k} must be > 0", "params", k)

    t_max = grid.get("t_max")
    if isinstance(t_max, bool) or not isinstance(t_max, (int, float)) or not t_max > 0:
        fail("t_max must be a positive number", "grid", "t_max")
    n = grid.get("n_samples")
    if isinstance(n, bool) or not isinstance(n, int) or n < 16:
        fail("n_samples must be an integer >= 16", "grid", "n_samples")
    step = grid.get("step", 1e-3)
    if isinstance(step, bool) or not isinstance(step, (int, float)) or not step > 0:
        fail("step must be a positive number", "grid", "step")

    outputs = data.get("outputs", {})
    analysis = data.get("analysis", {})
    threshold = analysis.get("threshold", 1e-10)
    if not isinstance(threshold, (int, float)) or threshold < 0:
        fail("threshold must be >= 0", "analysis", "threshold")

    sweep = data.get("sweep", {})
    for k, v in sweep.items():
        if k not in keys:
            fail(f"cannot sweep unknown parameter {k!r}", "sweep", k)
        if not isinstance(v, list) or not v:
            fail(f"sweep range for {k!r} must be a non-empty list", "sweep", k)
        if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
            fail(f"sweep range for {k!r} must hold numbers", "sweep", k)
    oracle = scen.get("oracle", False)
    if not isinstance(oracle, bool):
        fail("oracle must be true or false", "scenario", "oracle")

    return ScenarioConfig(
        name=str(scen.get("name", Path(source).stem)),
        model=model,
        params=params,
        t_max=float(t_max),
        n_samples=n,
        step=float(step),
        oracle=oracle,
        threshold=float(threshold),
        trajectory_csv=outputs.get("trajectory_csv"),
        report_json=outputs.get("report_json"),
        sweep_csv=outputs.get("sweep_csv"),
        sweep={k: [float(x) for x in v] for k, v in sweep.items()},
    )


def _from_resolved(d, source):
    try:
        cfg = ScenarioConfig(**d)
    except TypeError as exc:
        raise ConfigError(f"invalid embedded config: {exc}", source) from None
    # re-validate through the TOML path
    data = {
        "scenario": {"name": cfg.name, "model": cfg.model, "oracle": cfg.oracle},
        "params": cfg.params,
        "grid": {"t_max": cfg.t_max, "n_samples": cfg.n_samples, "step": cfg.step},
        "outputs": {k: v for k, v in (("trajectory_csv", cfg.trajectory_csv),
                                      ("report_json", cfg.report_json),
                                      ("sweep_csv", cfg.sweep_csv)) if v},
        "analysis": {"threshold": cfg.threshold},
        "sweep": cfg.sweep,
    }
    return config_from_dict(data, source)


SCENARIO_DIR = Path(__file__).with_name("scenarios")


def bundled_scenarios():
    """Names of the scenario files shipped with the package."""
    return sorted(p.stem for p in SCENARIO_DIR.glob("*.cfg"))


def load_config(path):
    """Load a .cfg scenario, a report .json, or a bundled scenario by name."""
    path = Path(path)
    if not path.exists() and (SCENARIO_DIR / f"{path.name}.cfg").exists():
        path = SCENARIO_DIR / f"{path.name}.cfg"
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    if path.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(exc.msg, str(path), exc.lineno) from None
        return config_from_dict(data, str(path))
    return parse_config(text, str(path))


def build_grid(cfg):
    """Internal uniform grid whose every k-th point is an output sample."""
    out_dt = cfg.t_max / (cfg.n_samples - 1)
    k = max(1, math.ceil(out_dt / cfg.step - 1e-9))
    n = (cfg.n_samples - 1) * k
    return cfg.t_max * np.arange(n + 1) / n, k


def _finite(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


@dataclass
class ScenarioResult:
    trajectory: object
    output: object
    report: dict


def _jc_pipeline(cfg, grid, k):
    p = jc.JcParams(cfg.params["omega0"], cfg.params["gamma0"], cfg.params["lambda"])
    traj = jc.jc_trajectory(p, grid)
    oracle = {}
    if cfg.oracle:
        # the Volterra check is quadratic in the step count, so its horizon is capped
        dt = min(grid[1] - grid[0], 1e-3 / p.lam)
        tv, Gv = jc.g_volterra(p, min(cfg.t_max, VOLTERRA_HORIZON / p.lam), dt)
        oracle["volterra_max_dev"] = float(np.max(np.abs(Gv - jc.g_closed_form(p, tv).G)))
        out_t = grid[::k]
        segs = jc.jc_oracle(p, out_t)
        oracle["ode_max_dev"] = max(float(np.max(np.abs(B - jc.jc_rho(p, np.pi / 2, ts))))
                                    for ts, B in segs)
        oracle["ode_segments"] = len(segs)
    return traj, oracle


def _sbm_pipeline(cfg, grid, k):
    pr = cfg.params
    p = sbm.SbmParams(pr["omega0"], OhmicFamily(pr["alpha"], pr["s"], pr["omega_c"]), pr["T"])
    ints = sbm.sbm_integrals(p, grid)
    traj = sbm.sbm_trajectory(ints)
    oracle = {}
    if cfg.oracle:
        out_t = grid[::k]
        ode = integrate(sbm.sbm_generator(ints), [0.0, 0.0, 1.0], out_t)
        oracle["ode_max_dev"] = float(np.max(np.abs(ode.B - traj.B[::k])))
        worst = 0.0
        n = len(grid) - 1
        for i in (n // 4, n // 2, n):
            r = sbm.sbm_rates(p, grid[i])
            for a, b in ((r.gamma_s, ints.gamma_s[i]), (r.gamma_d, ints.gamma_d[i])):
                worst = max(worst, abs(a - b) / max(abs(b), 1e-300))
        oracle["rate_crosscheck_max_rel"] = worst
    return traj, oracle


def run_scenario(cfg, out_dir=None):
    """Run one scenario; write the configured outputs under ``out_dir``."""
    grid, k = build_grid(cfg)
    pipeline = _jc_pipeline if cfg.model == "jc" else _sbm_pipeline
    traj, oracle = pipeline(cfg, grid, k)

    report = detect_intervals(traj, cfg.threshold)
    rel = verify_relation(traj, cfg.model)
    report.relation_residual_max = rel.residual
    result = report.as_dict()
    result["relation_samples_excluded"] = rel.n_excluded
    result["overlap_correlation"] = overlap_correlation(report)
    if cfg.model == "sbm":
        marker = report.sigma_z_sign_change
        positive = report.restricted(marker) if marker is not None else report
        result["positive_population_phase"] = {
            "t_end": marker if marker is not None else float(grid[-1]),
            "classification": positive.classification,
            "overlap_correlation": overlap_correlation(positive),
        }
    singular = traj.rates.get("gamma")
    if singular is not None:
        result["singular_rate_samples"] = int(np.sum(~np.isfinite(singular)))
    result["oracle"] = oracle
    result["config"] = cfg.resolved()
    result = _clean(result)

    output = traj.subsample(k)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        if cfg.trajectory_csv:
            (out_dir / cfg.trajectory_csv).write_text(format_csv(output.columns()))
        if cfg.report_json:
            (out_dir / cfg.report_json).write_text(format_json(result))
    return ScenarioResult(traj, output, result)


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return _finite(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def format_csv(columns):
    names = list(columns)
    data = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
    buf = io.StringIO()
    buf.write(",".join(names) + "\n")
    for row in data:
        buf.write(",".join("%.17g" % x for x in row) + "\n")
    return buf.getvalue()


def format_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def sweep_points(cfg):
    keys = list(cfg.sweep)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(cfg.sweep[k] for k in keys))]


def _run_point(cfg, overrides):
    point = ScenarioConfig(**{**asdict(cfg), "params": {**cfg.params, **overrides},
                              "sweep": {}, "trajectory_csv": None, "report_json": None,
                              "sweep_csv": None})
    row = {**overrides, "classification": "", "n_qfi_intervals": "", "n_energy_intervals": "",
           "relation_residual": "", "overlap_correlation": "", "error": ""}
    try:
        res = run_scenario(point).report
    except (NumericalError, ValueError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    row.update(classification=res["classification"],
               n_qfi_intervals=len(res["qfi_backflow_intervals"]),
               n_energy_intervals=len(res["energy_backflow_intervals"]),
               relation_residual=res["relation_residual_max"],
               overlap_correlation=res["overlap_correlation"])
    return row


def sweep_workers():
    raw = os.environ.get("NMFLOW_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def run_sweep(cfg, out_dir=None, workers=None):
    """Run every point of the cartesian sweep; rows keep the product order."""
    if not cfg.sweep:
        raise ConfigError("scenario has no [sweep] section")
    points = sweep_points(cfg)
    with ThreadPoolExecutor(max_workers=workers or sweep_workers()) as pool:
        rows = list(pool.map(lambda o: _run_point(cfg, o), points))
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        name = cfg.sweep_csv or f"{cfg.name}_sweep.csv"
        (out_dir / name).write_text(format_sweep(rows))
    return rows


def format_sweep(rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("%.17g" % v if isinstance(v, float) else ("" if v is None else v))
                         for k, v in row.items()})
    return buf.getvalue()


def verify(cfg, *, relation_tol=None, oracle_tol=1e-6):
    """Oracle deviations and relation residual with pass/fail verdicts."""
    cfg = ScenarioConfig(**{**asdict(cfg), "oracle": True})
    res = run_scenario(cfg).report
    relation_tol = relation_tol or (1e-12 if cfg.model == "jc" else 1e-8)
    checks = {"relation_residual": (res["relation_residual_max"], relation_tol)}
    for key in ("ode_max_dev", "volterra_max_dev"):
        if key in res["oracle"]:
            checks[key] = (res["oracle"][key], oracle_tol)
    if "rate_crosscheck_max_rel" in res["oracle"]:
        checks["rate_crosscheck_max_rel"] = (res["oracle"]["rate_crosscheck_max_rel"], 1e-7)
    verdicts = {k: {"value": v, "tolerance": tol, "pass": v is not None and v < tol}
                for k, (v, tol) in checks.items()}
    return {"scenario": cfg.name, "checks": verdicts,
            "pass": all(v["pass"] for v in verdicts.values())}
