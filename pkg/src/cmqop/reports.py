"""Experiment configuration and machine-readable verification reports.

Configs are flat key = value files (TOML-style scalars only) with full
command-line override; reports serialize to JSON (schema `report-v1`,
shipped in cmqop/schemas/) and render as a human table on stdout.  Sweeps
write one CSV row per parameter value.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import ConfigError

REPORT_VERSION = "report-v1"

EXPERIMENT_NAMES = (
    "int-eq",
    "kernel-id",
    "commutator",
    "diff-eq",
    "asymptotics",
    "fourier-gamma",
    "l2-eigen",
    "hr-eigen",
)

SWEEP_AXES = ("xi", "lambda", "u-gap", "grid-refinement")

# experiments that discretize chamber integrals and are therefore N-limited
_QUADRATURE_EXPERIMENTS = ("int-eq", "commutator")


@dataclass
class ExperimentConfig:
    """One experiment invocation; None fields fall back to per-experiment defaults."""

    experiment: str
    n: int = 2
    lam: float = None
    u: list = None
    xi: float = None
    xi2: float = None
    panels: int = None
    order: int = None
    radius: float = None
    tol: float = None
    wall_guard: float = None
    h: float = None
    max_degree: int = None
    seed: int = 0
    threads: int = 1

    def validate(self):
        errors = []
        if self.experiment not in EXPERIMENT_NAMES:
            errors.append(
                f"experiment: unknown '{self.experiment}' (choose from {', '.join(EXPERIMENT_NAMES)})"
            )
        if not isinstance(self.n, int) or self.n < 1:
            errors.append(f"N: need a positive integer, got {self.n!r}")
        elif self.experiment in _QUADRATURE_EXPERIMENTS and self.n > 3:
            errors.append(f"N: {self.experiment} supports N in {{1,2,3}}, got {self.n}")
        if self.lam is not None and not self.lam > 0:
            errors.append(f"lambda: need > 0, got {self.lam}")
        if self.u is not None and len(self.u) != self.n:
            errors.append(f"u: expected {self.n} components, got {len(self.u)}")
        if self.tol is not None and not self.tol > 0:
            errors.append(f"tol: need > 0, got {self.tol}")
        if self.panels is not None and self.panels < 1:
            errors.append(f"panels: need >= 1, got {self.panels}")
        if self.order is not None and not 4 <= self.order <= 16:
            errors.append(f"order: need 4..16, got {self.order}")
        if self.h is not None and not 0 < self.h < 0.1:
            errors.append(f"h: need 0 < h < 0.1, got {self.h}")
        if self.threads < 1:
            errors.append(f"threads: need >= 1, got {self.threads}")
        if errors:
            raise ConfigError("; ".join(errors))
        return self

    @property
    def exploratory(self) -> bool:
        """lam below 1 is outside the theorems' hypothesis: report-only mode."""
        return self.lam is not None and self.lam < 1.0

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def _parse_scalar(text: str):
    text = text.strip().strip('"').strip("'")
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    if "," in text:
        return [_parse_scalar(tok) for tok in text.split(",")]
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


_CONFIG_KEYS = {
    "experiment": "experiment", "n": "n", "N": "n", "lambda": "lam", "lam": "lam",
    "u": "u", "xi": "xi", "xi2": "xi2", "panels": "panels", "order": "order",
    "radius": "radius", "tol": "tol", "wall_guard": "wall_guard", "h": "h",
    "max_degree": "max_degree", "seed": "seed", "threads": "threads",
}


def read_config_file(path) -> dict:
    """Parse a flat key = value config file; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, value = (tok.strip() for tok in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown config key '{key}'")
            out[_CONFIG_KEYS[key]] = _parse_scalar(value)
    return out


@dataclass
class CheckResult:
    """One named residual against its tolerance.

    tolerance/passed are None for informational (exploratory) checks.
    """

    name: str
    residual: float
    tolerance: float = None
    passed: bool = None

    @classmethod
    def judged(cls, name, residual, tolerance):
        residual = float(residual)
        return cls(name, residual, float(tolerance), bool(residual <= tolerance))


def _json_safe(value):
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return [_json_safe(v) for v in value.tolist()]
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


@dataclass
class VerificationReport:
    """Structured record of one experiment: config echo, residuals, verdicts."""

    experiment: str
    config: dict
    checks: list
    diagnostics: dict = field(default_factory=dict)
    wall_time_ms: float = 0.0
    seed: int = None
    exploratory: bool = False
    version: str = REPORT_VERSION

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.passed is not None)

    @property
    def max_residual(self) -> float:
        finite = [c.residual for c in self.checks if math.isfinite(c.residual)]
        return max(finite) if finite else float("nan")

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "experiment": self.experiment,
            "config": _json_safe(self.config),
            "seed": self.seed,
            "exploratory": self.exploratory,
            "checks": [
                {
                    "name": c.name,
                    "residual": c.residual,
                    "tolerance": c.tolerance,
                    "passed": c.passed,
                }
                for c in self.checks
            ],
            "diagnostics": _json_safe(self.diagnostics),
            "pass": self.passed,
            "wall_time_ms": self.wall_time_ms,
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        return cls(
            experiment=d["experiment"],
            config=d["config"],
            checks=[
                CheckResult(c["name"], c["residual"], c["tolerance"], c["passed"])
                for c in d["checks"]
            ],
            diagnostics=d.get("diagnostics", {}),
            wall_time_ms=d.get("wall_time_ms", 0.0),
            seed=d.get("seed"),
            exploratory=d.get("exploratory", False),
            version=d.get("version", REPORT_VERSION),
        )

    def render_table(self) -> str:
        lines = []
        header = f"experiment: {self.experiment}"
        if self.exploratory:
            header += "   [exploratory: lambda < 1, residuals reported without judgement]"
        lines.append(header)
        cfg = ", ".join(f"{k}={v}" for k, v in sorted(self.config.items()))
        lines.append(f"config: {cfg}")
        lines.append(f"{'check':<34} {'residual':>14} {'tolerance':>12}  verdict")
        lines.append("-" * 72)
        for c in self.checks:
            tol = f"{c.tolerance:.3g}" if c.tolerance is not None else "-"
            verdict = "PASS" if c.passed else "FAIL" if c.passed is not None else "info"
            lines.append(f"{c.name:<34} {c.residual:>14.6e} {tol:>12}  {verdict}")
        lines.append("-" * 72)
        overall = "PASS" if self.passed else "FAIL"
        lines.append(f"overall: {overall}   wall time: {self.wall_time_ms:.0f} ms")
        return "\n".join(lines)


class Stopwatch:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed_ms = 1000.0 * (time.perf_counter() - self.t0)
        return False


SWEEP_COLUMNS = (
    "axis", "value", "experiment", "pass", "n_checks", "n_failed",
    "max_residual", "worst_check", "wall_time_ms", "error",
)


def sweep_rows(base_config: ExperimentConfig, axis: str, values, runner) -> list:
    """Run `runner(config)` once per axis value, recording failures per row."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"sweep axis '{axis}' not in {SWEEP_AXES}")
    rows = []
    for v in values:
        cfg_kwargs = {k: val for k, val in asdict(base_config).items()}
        if axis == "xi":
            cfg_kwargs["xi"] = float(v)
        elif axis == "lambda":
            cfg_kwargs["lam"] = float(v)
        elif axis == "u-gap":
            half = 0.5 * float(v) * (cfg_kwargs["n"] - 1)
            cfg_kwargs["u"] = list(np.linspace(half, -half, cfg_kwargs["n"]))
        elif axis == "grid-refinement":
            cfg_kwargs["panels"] = int(v)
        cfg = ExperimentConfig(**cfg_kwargs)
        row = {c: "" for c in SWEEP_COLUMNS}
        row.update(axis=axis, value=v, experiment=cfg.experiment)
        try:
            report = runner(cfg.validate())
            failed = [c for c in report.checks if c.passed is False]
            worst = max(report.checks, key=lambda c: c.residual if math.isfinite(c.residual) else -1)
            row.update(
                **{"pass": report.passed},
                n_checks=len(report.checks),
                n_failed=len(failed),
                max_residual=f"{report.max_residual:.9e}",
                worst_check=worst.name,
                wall_time_ms=f"{report.wall_time_ms:.0f}",
            )
        except Exception as exc:  # per-row failures recorded, sweep continues
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


def write_sweep_csv(rows: list, path):
    with open(path, "w") as fh:
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(str(row.get(c, "")) for c in SWEEP_COLUMNS) + "\n")
