"""Declarative experiment sweeps with reproducible, self-describing output.

An experiment is a model, a measure, fixed parameters, and optional sweep
axes; running it yields one row per sweep cell.  Tables carry a provenance
block (tool version, resolved config, config hash, master seed) so any CSV
can be re-run to an identical table from its own header line.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import __version__
from .exact import majority_exit_profile, mean_absorption_time, voter_exit_probability
from .meanfield import stubborn_equilibria, voter_hit_time
from .models import MajorityParams, ModelParams, StubbornParams, VoterParams, build_chain
from .simulate import estimate_consensus_time, estimate_exit_probability, simulate

MODELS = ("voter", "majority", "stubborn")
MEASURES = ("exit-prob", "consensus-time", "trajectory", "equilibrium")

# config/sweep keys accepted per model ("n" maps to n_agents)
_PARAM_KEYS = {
    "voter": ("n", "q0", "q1", "alpha"),
    "majority": ("n", "q0", "q1", "k", "alpha"),
    "stubborn": ("n", "gamma0", "gamma1", "x0"),
}
_DEFAULTS = {
    "voter": {"q0": 1.0, "q1": 0.5, "alpha": 0.5},
    "majority": {"q0": 1.0, "q1": 0.6, "k": 1, "alpha": 0.5},
    "stubborn": {"gamma0": 0.2, "gamma1": 0.2, "x0": 0.5},
}


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment: model, measure, parameters, sweep, seeds."""

    model: str
    measure: str
    params: dict
    sweep: dict = field(default_factory=dict)
    runs: int = 10000
    seed: int = 0
    horizon: float | None = None
    dt: float = 0.01
    out: str | None = None
    note: str = ""

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        data = dict(raw)
        model = data.pop("model", None)
        measure = data.pop("measure", None)
        if model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {model!r}")
        if measure not in MEASURES:
            raise ConfigError(f"measure must be one of {MEASURES}, got {measure!r}")
        params = dict(data.pop("params", {}))
        sweep = dict(data.pop("sweep", {}))
        horizon = data.pop("horizon", None)
        cfg = cls(
            model=model,
            measure=measure,
            params=params,
            sweep=sweep,
            runs=int(data.pop("runs", 10000)),
            seed=int(data.pop("seed", 0)),
            horizon=None if horizon is None else float(horizon),
            dt=float(data.pop("dt", 0.01)),
            out=data.pop("out", None),
            note=str(data.pop("note", "")),
        )
        if data:
            raise ConfigError(f"unknown config keys: {sorted(data)}")
        cfg.validate()
        return cfg

    def validate(self):
        allowed = set(_PARAM_KEYS[self.model])
        for source, keys in (("params", self.params), ("sweep", self.sweep)):
            unknown = set(keys) - allowed
            if unknown:
                raise ConfigError(
                    f"{source} keys {sorted(unknown)} not valid for model "
                    f"'{self.model}' (allowed: {sorted(allowed)})"
                )
        for axis, values in self.sweep.items():
            if not isinstance(values, (list, tuple)) or len(values) == 0:
                raise ConfigError(f"sweep axis '{axis}' must be a non-empty list")
        overlap = set(self.params) & set(self.sweep)
        if overlap:
            raise ConfigError(f"keys {sorted(overlap)} appear in both params and sweep")
        if self.measure in ("exit-prob", "consensus-time"):
            if self.model == "stubborn":
                raise ConfigError(f"measure '{self.measure}' needs an absorbing model")
            if self.runs < 1:
                raise ConfigError("runs must be >= 1")
        if self.measure == "equilibrium" and self.model != "stubborn":
            raise ConfigError("measure 'equilibrium' applies to the stubborn model")
        if self.measure == "trajectory" and self.sweep:
            raise ConfigError("measure 'trajectory' does not support sweeps")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        # materialize every cell once so bad values fail before any run
        for cell in self.cells():
            self.cell_params(cell)

    def resolved(self) -> dict:
        return {
            "model": self.model,
            "measure": self.measure,
            "params": dict(sorted(self.params.items())),
            "sweep": {k: list(v) for k, v in self.sweep.items()},
            "runs": self.runs,
            "seed": self.seed,
            "horizon": self.horizon,
            "dt": self.dt,
            "note": self.note,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.resolved(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def cells(self) -> list[dict]:
        """Cartesian product of the sweep axes, in axis declaration order."""
        if not self.sweep:
            return [{}]
        axes = list(self.sweep)
        return [
            dict(zip(axes, combo)) for combo in product(*(self.sweep[a] for a in axes))
        ]

    def cell_params(self, cell: dict) -> ModelParams:
        merged = {**_DEFAULTS[self.model], **self.params, **cell}
        try:
            n = int(merged.pop("n", 100))
            if self.model == "voter":
                return VoterParams(n_agents=n, **merged)
            if self.model == "majority":
                merged["k"] = int(merged.get("k", 1))
                return MajorityParams(n_agents=n, **merged)
            return StubbornParams(n_agents=n, **merged)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid cell {cell}: {exc}") from exc


@dataclass(frozen=True)
class ResultTable:
    """Rows plus the provenance needed to reproduce them."""

    columns: tuple
    rows: tuple
    provenance: dict

    def to_csv(self, target) -> None:
        """Write provenance line, header, and rows to a path or text file."""
        if hasattr(target, "write"):
            self._write(target)
        else:
            with open(target, "w", newline="") as fh:
                self._write(fh)

    def _write(self, fh):
        fh.write("# " + json.dumps(self.provenance, sort_keys=True) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows(self.rows)

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        self._write(buf)
        return buf.getvalue()

    @staticmethod
    def read_provenance(path) -> dict:
        with open(path) as fh:
            first = fh.readline()
        if not first.startswith("#"):
            raise ConfigError("missing provenance header line")
        return json.loads(first.lstrip("#").strip())


def _cell_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence(master, spawn_key=(index,)).generate_state(1)[0])


def _exact_exit(params) -> float:
    if isinstance(params, VoterParams):
        return voter_exit_probability(params)
    return majority_exit_profile(params).exit_prob[params.start_state]


def run_experiment(config: ExperimentConfig) -> ResultTable:
    """Execute every sweep cell; deterministic given the config (seed included)."""
    config.validate()
    axes = list(config.sweep)
    provenance = {
        "tool": "opdyn",
        "version": __version__,
        "config": config.resolved(),
        "config_hash": config.config_hash(),
        "seed": config.seed,
    }
    if config.note:
        provenance["note"] = config.note

    if config.measure == "trajectory":
        params = config.cell_params({})
        chain = build_chain(params)
        record = simulate(
            chain, params.start_state, horizon=config.horizon, seed=config.seed
        )
        denom = params.n_free if isinstance(params, StubbornParams) else params.n_agents
        provenance["terminal"] = record.terminal
        state, t0, _ = record.segments()
        rows = tuple(
            (float(t), int(s), float(s / denom)) for t, s in zip(t0, state)
        )
        return ResultTable(columns=("t", "state", "x"), rows=rows, provenance=provenance)

    if config.measure == "equilibrium":
        rows = []
        for cell in config.cells():
            params = config.cell_params(cell)
            report = stubborn_equilibria(params.gamma0, params.gamma1)
            stable = report.stable_roots
            unstable = [
                r for r, s in zip(report.roots, report.stability) if s == "unstable"
            ]
            rows.append(
                tuple(cell[a] for a in axes)
                + (
                    len(report.roots),
                    min(stable),
                    max(stable),
                    unstable[0] if unstable else math.nan,
                    int(report.bistable),
                )
            )
        columns = tuple(axes) + ("n_roots", "stable_low", "stable_high", "unstable", "bistable")
        return ResultTable(columns=columns, rows=tuple(rows), provenance=provenance)

    # Monte Carlo measures, one summary per cell with the exact value alongside
    estimator = (
        estimate_exit_probability
        if config.measure == "exit-prob"
        else estimate_consensus_time
    )
    voter_time = config.measure == "consensus-time" and config.model == "voter"
    rows = []
    for index, cell in enumerate(config.cells()):
        params = config.cell_params(cell)
        summary = estimator(params, config.runs, _cell_seed(config.seed, index))
        if config.measure == "exit-prob":
            exact = _exact_exit(params)
        else:
            exact = mean_absorption_time(build_chain(params)).mean_time[
                params.start_state
            ]
        row = tuple(cell[a] for a in axes) + (
            summary.estimate,
            summary.stderr,
            float(exact),
        )
        if voter_time and params.q0 > params.q1:
            row += (voter_hit_time(params.alpha, 1.0 - 1.0 / params.n_agents,
                                   params.q0, params.q1),)
        rows.append(row)
    columns = tuple(axes) + ("estimate", "stderr", "exact")
    if voter_time:
        columns += ("meanfield",)
    return ResultTable(columns=columns, rows=tuple(rows), provenance=provenance)


# Presets reproducing the reference figures at desk scale; each documents its
# parameter provenance in the note that lands in the CSV header.
PRESETS: dict[str, dict] = {
    "figure-1": {
        "model": "voter",
        "measure": "exit-prob",
        "note": "figure-1: voter exit probability vs N; q0=1, q1=0.5, alpha=0.2",
        "params": {"q0": 1.0, "q1": 0.5, "alpha": 0.2},
        "sweep": {"n": [10, 20, 40, 80, 160, 320]},
        "runs": 20000,
        "seed": 20260801,
    },
    "figure-2": {
        "model": "voter",
        "measure": "consensus-time",
        "note": "figure-2: voter mean consensus time vs N; q0=1, q1=0.5, alpha=0.4",
        "params": {"q0": 1.0, "q1": 0.5, "alpha": 0.4},
        "sweep": {"n": [50, 100, 200, 400, 800, 1600, 3200]},
        "runs": 4000,
        "seed": 20260802,
    },
    "figure-2b": {
        "model": "voter",
        "measure": "consensus-time",
        "note": "figure-2b: voter mean consensus time vs alpha at N=100; q0=1, q1=0.5",
        "params": {"n": 100, "q0": 1.0, "q1": 0.5},
        "sweep": {"alpha": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]},
        "runs": 4000,
        "seed": 20260803,
    },
    "figure-3": {
        "model": "majority",
        "measure": "exit-prob",
        "note": "figure-3: majority exit probability vs N; q0=1, q1=0.6, K=1",
        "params": {"q0": 1.0, "q1": 0.6, "k": 1},
        "sweep": {
            "n": [20, 60, 100, 140, 180, 220, 260, 300],
            "alpha": [0.25, 0.5],
        },
        "runs": 20000,
        "seed": 20260804,
    },
    "figure-4": {
        "model": "majority",
        "measure": "exit-prob",
        "note": "figure-4: majority exit probability vs alpha, phase transition at "
        "beta=q1/(q0+q1)=0.375; q0=1, q1=0.6, K=1",
        "params": {"q0": 1.0, "q1": 0.6, "k": 1},
        "sweep": {
            "alpha": [round(0.05 * i, 2) for i in range(1, 20)],
            "n": [50, 100, 200],
        },
        "runs": 10000,
        "seed": 20260805,
    },
    "figure-5": {
        "model": "majority",
        "measure": "consensus-time",
        "note": "figure-5: majority mean consensus time vs N; q0=1, q1=0.6, K=1, alpha=0.5",
        "params": {"q0": 1.0, "q1": 0.6, "k": 1, "alpha": 0.5},
        "sweep": {"n": [50, 100, 200, 400, 800, 1600, 3200]},
        "runs": 4000,
        "seed": 20260806,
    },
    "figure-5b": {
        "model": "majority",
        "measure": "consensus-time",
        "note": "figure-5b: majority mean consensus time vs K at N=50; q0=1, q1=0.6, alpha=0.5",
        "params": {"n": 50, "q0": 1.0, "q1": 0.6, "alpha": 0.5},
        "sweep": {"k": [1, 2, 3, 4]},
        "runs": 20000,
        "seed": 20260807,
    },
    "figure-6": {
        "model": "stubborn",
        "measure": "equilibrium",
        "note": "figure-6: stubborn-model equilibria vs gamma1 for several gamma0",
        "params": {"n": 100, "x0": 0.5},
        "sweep": {
            "gamma1": [round(0.05 * i, 2) for i in range(1, 14)],
            "gamma0": [0.05, 0.1, 0.2],
        },
        "seed": 20260808,
    },
    "figure-7": {
        "model": "stubborn",
        "measure": "trajectory",
        "note": "figure-7: metastable sample path at N=100, gamma0=gamma1=0.2",
        "params": {"n": 100, "gamma0": 0.2, "gamma1": 0.2, "x0": 0.9},
        "horizon": 20000.0,
        "seed": 20260809,
    },
}


def preset_config(name: str, **overrides) -> ExperimentConfig:
    """Instantiate a named preset, applying any flag overrides (flags win)."""
    if name not in PRESETS:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        )
    raw = json.loads(json.dumps(PRESETS[name]))  # deep copy
    for key, value in overrides.items():
        if value is not None:
            raw[key] = value
    return ExperimentConfig.from_dict(raw)
