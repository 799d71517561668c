"""Declarative experiment sweeps and their CSV output."""
from __future__ import annotations

import csv
import dataclasses
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .circuit import Circuit, PositionGrid, build_double_cnot, build_four_cnot, build_trotter_circuit
from .estimators import Sampled, child_seed, fiim_estimate, riim_estimate, riim_poisson_estimate
from .extrapolation import MAX_RIIM_ORDER
from .insertion import fiim_transform
from .simulator import (
    ChannelError,
    NoiseModel,
    Observable,
    Relaxation,
    evolve,
    expectation,
    ideal_expectation,
    sample_shots,
)

SCENARIOS = ("simple-2cx", "simple-4cx", "trotter-sho")
METHODS = ("none", "fiim", "riim", "riim-poisson")
NOISE_KINDS = ("depolarizing", "full")
SWEEP_PARAMS = ("r", "eps", "t", "steps")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep.  ``sweep`` holds values of ``sweep_param``; the other
    fields give the fixed parameters of every point."""

    scenario: str = "simple-2cx"
    method: str = "none"
    noise: str = "depolarizing"
    eps: float = 0.01
    t1: float = 50e-6
    t2: float = 70e-6
    gate_duration: float = 300e-9
    n_max: int = 1
    n_fit: Optional[int] = None
    shots: Optional[int] = None
    seed: Optional[int] = None
    sweep_param: str = "r"
    sweep: Tuple[float, ...] = (1,)
    time: float = 0.5
    steps: int = 1
    x_max: float = 3.0
    nu: Tuple[float, ...] = (0.0, 0.25, 0.5, 1.0)
    plans: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "sweep", tuple(self.sweep))
        object.__setattr__(self, "nu", tuple(float(v) for v in self.nu))
        self.validate()

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if self.noise not in NOISE_KINDS:
            raise ConfigError(f"unknown noise {self.noise!r}; choose from {', '.join(NOISE_KINDS)}")
        if self.sweep_param not in SWEEP_PARAMS:
            raise ConfigError(f"unknown sweep_param {self.sweep_param!r}; choose from {', '.join(SWEEP_PARAMS)}")
        if not self.sweep:
            raise ConfigError("sweep needs at least one value")
        if self.shots is not None:
            if self.shots < 1:
                raise ConfigError("shots must be >= 1")
            if self.seed is None:
                raise ConfigError("a seed is required when shots is set")
        if self.seed is not None and self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if self.method == "riim-poisson" and self.seed is None:
            raise ConfigError("riim-poisson draws random plans and needs a seed")
        if self.sweep_param in ("t", "steps") and self.scenario != "trotter-sho":
            raise ConfigError(f"sweep over {self.sweep_param!r} only applies to trotter-sho")
        if self.sweep_param == "r":
            if self.method != "none":
                raise ConfigError("sweep over r is a raw noise-amplification sweep; use method=none")
            for r in self.sweep:
                if r != int(r) or int(r) < 1 or int(r) % 2 == 0:
                    raise ConfigError(f"r values must be odd integers >= 1, got {r}")
        if self.sweep_param == "steps":
            for s in self.sweep:
                if s != int(s) or s < 1:
                    raise ConfigError(f"steps values must be integers >= 1, got {s}")
        if self.sweep_param == "eps":
            for e in self.sweep:
                if not 0 <= e <= 1:
                    raise ConfigError(f"eps values must lie in [0, 1], got {e}")
        if not 0 <= self.eps <= 1:
            raise ConfigError(f"eps must lie in [0, 1], got {self.eps}")
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if self.x_max <= 0:
            raise ConfigError("x_max must be positive")
        if self.method == "fiim":
            if self.n_max < 1:
                raise ConfigError("fiim needs n_max >= 1")
            if self.n_fit is not None and not 0 <= self.n_fit <= self.n_max:
                raise ConfigError(f"n_fit must lie in 0..n_max={self.n_max}, got {self.n_fit}")
        if self.method == "riim" and not 1 <= self.n_max <= MAX_RIIM_ORDER:
            raise ConfigError(f"riim supports n_max in 1..{MAX_RIIM_ORDER}, got {self.n_max}")
        if self.method == "riim-poisson":
            if len(set(self.nu)) < 2 or min(self.nu) < 0:
                raise ConfigError("riim-poisson needs two or more distinct nu values >= 0")
            if self.plans < 2:
                raise ConfigError("riim-poisson needs plans >= 2")
        if self.noise == "full":
            try:
                Relaxation(self.t1, self.t2, self.gate_duration)
            except ChannelError as exc:
                raise ConfigError(str(exc)) from None

    @property
    def order(self) -> int:
        return {"none": 0, "riim-poisson": 1}.get(self.method, self.n_max)


@dataclass(frozen=True)
class ResultRow:
    scenario: str
    method: str
    sweep_param: str
    sweep_value: float
    order: int
    n_cnots: int
    raw: float
    mitigated: float
    reference: float
    error: float
    stat_error: float
    gate_budget: int


COLUMNS = tuple(f.name for f in dataclasses.fields(ResultRow))


@dataclass(frozen=True)
class Scenario:
    init: int
    observable: Observable


SCENARIO_SETUP = {
    "simple-2cx": Scenario(0, Observable.qubit_sum(2)),
    "simple-4cx": Scenario(2, Observable.integer(2)),
    "trotter-sho": Scenario(0, Observable.projector(2, 0)),
}


def _point_params(config: ExperimentConfig, value) -> Dict[str, float]:
    params = {"eps": config.eps, "t": config.time, "steps": config.steps, "r": 1}
    params[config.sweep_param] = value
    return params


def scenario_circuit(config: ExperimentConfig, time: Optional[float] = None, steps: Optional[int] = None) -> Circuit:
    if config.scenario == "simple-2cx":
        return build_double_cnot()
    if config.scenario == "simple-4cx":
        return build_four_cnot()
    grid = PositionGrid(2, config.x_max)
    return build_trotter_circuit(
        config.time if time is None else time, config.steps if steps is None else int(steps), grid
    )


def noise_model(config: ExperimentConfig, eps: Optional[float] = None) -> NoiseModel:
    eps = config.eps if eps is None else eps
    relaxation = None
    if config.noise == "full":
        relaxation = Relaxation(config.t1, config.t2, config.gate_duration)
    return NoiseModel.depolarizing(eps, relaxation)


def _run_point(config: ExperimentConfig, index: int, value) -> ResultRow:
    p = _point_params(config, value)
    setup = SCENARIO_SETUP[config.scenario]
    circuit = scenario_circuit(config, p["t"], p["steps"])
    noise = noise_model(config, p["eps"])
    obs, init = setup.observable, setup.init
    reference = ideal_expectation(circuit, obs, init)
    seed = None if config.seed is None else child_seed(config.seed, index)
    mode = None if config.shots is None else Sampled(child_seed(seed, 1), config.shots)

    base = fiim_transform(circuit, int(p["r"]))
    rho = evolve(base, init, noise)
    if mode is None:
        raw, raw_err = expectation(rho, obs), 0.0
    else:
        raw, raw_err, _ = sample_shots(rho, obs, config.shots, child_seed(seed, 0))

    if config.method == "none":
        mitigated, stat, budget = raw, raw_err, base.cnot_count
    elif config.method == "fiim":
        est = fiim_estimate(circuit, obs, noise, config.n_max, config.n_fit, mode, init)
        mitigated, stat, budget = est.value, est.stat_error, est.gate_budget
    elif config.method == "riim":
        est = riim_estimate(circuit, obs, noise, config.n_max, mode, init)
        mitigated, stat, budget = est.value, est.stat_error, est.gate_budget
    else:
        est = riim_poisson_estimate(
            circuit, obs, noise, config.nu, config.plans, child_seed(seed, 2), config.shots, init
        )
        mitigated, stat, budget = est.value, est.stat_error, est.gate_budget

    return ResultRow(
        scenario=config.scenario,
        method=config.method,
        sweep_param=config.sweep_param,
        sweep_value=float(value),
        order=config.order,
        n_cnots=circuit.cnot_count,
        raw=float(raw),
        mitigated=float(mitigated),
        reference=float(reference),
        error=abs(float(mitigated) - float(reference)),
        stat_error=float(stat),
        gate_budget=int(budget),
    )


def run_experiment(config: ExperimentConfig) -> List[ResultRow]:
    """One row per sweep point, in sweep order.

    Each point draws from its own seed derived from ``(seed, index)``, so a
    point's result does not depend on which other points run.
    """
    config.validate()
    return [_run_point(config, i, v) for i, v in enumerate(config.sweep)]


def figure3_sweep(eps: float = 0.01) -> List[ResultRow]:
    """FIIM and RIIM errors of orders 1..4 on the four-CNOT circuit, exact."""
    rows = []
    for method in ("fiim", "riim"):
        for order in range(1, MAX_RIIM_ORDER + 1):
            cfg = ExperimentConfig(
                scenario="simple-4cx", method=method, n_max=order, sweep_param="eps", sweep=(eps,), eps=eps
            )
            rows += run_experiment(cfg)
    return rows


def figure8_sweep(eps: float = 0.01, time: float = 0.5, steps: Sequence[int] = (1, 2)) -> List[ResultRow]:
    """Trotter circuit: FIIM for n_max 1..4 plus the order-2 RIIM line.

    Squared errors are ``error ** 2`` of the returned rows.
    """
    rows = []
    configs = [("fiim", n) for n in range(1, 5)] + [("riim", 2)]
    for method, order in configs:
        cfg = ExperimentConfig(
            scenario="trotter-sho",
            method=method,
            n_max=order,
            eps=eps,
            time=time,
            sweep_param="steps",
            sweep=tuple(steps),
        )
        rows += run_experiment(cfg)
    return rows


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(rows: Iterable[ResultRow], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_fmt(getattr(row, c)) for c in COLUMNS])


def emit_csv(rows: Iterable[ResultRow], path: Union[str, Path]) -> Path:
    """Header plus one line per row; floats keep 17 significant digits."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        write_csv(rows, fh)
    return path


def csv_text(rows: Iterable[ResultRow]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


_CONVERTERS: Dict[str, Callable[[str], object]] = {
    f.name: {"str": str, "int": int, "float": float}[f.type] for f in dataclasses.fields(ResultRow)
}


def read_csv(path: Union[str, Path]) -> List[ResultRow]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != COLUMNS:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        return [ResultRow(**{k: _CONVERTERS[k](v) for k, v in rec.items()}) for rec in reader]


# config files -------------------------------------------------------------

_ALIASES = {"nmax": "n_max", "nfit": "n_fit", "n_meas": "shots", "sweep-param": "sweep_param", "t": "time"}


def _field_types() -> Dict[str, str]:
    return {f.name: str(f.type) for f in dataclasses.fields(ExperimentConfig)}


def _convert(key: str, text: str):
    kind = _field_types()[key]
    text = text.strip()
    try:
        if kind.startswith("Tuple"):
            return tuple(float(v) for v in text.split(",") if v.strip())
        if kind.startswith("Optional"):
            if text.lower() in ("", "none", "exact"):
                return None
            return int(text)
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"bad value for {key}: {text!r}") from None


def parse_config(text: str) -> Dict[str, object]:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    values: Dict[str, object] = {}
    fields = _field_types()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key.replace("-", "_"))
        if key not in fields:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, value)
    return values


def load_config(path: Union[str, Path]) -> Dict[str, object]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def build_config(*layers: Mapping[str, object]) -> ExperimentConfig:
    """Merge settings, later layers winning; ``None`` values are skipped."""
    merged: Dict[str, object] = {}
    for layer in layers:
        merged.update({k: v for k, v in layer.items() if v is not None})
    if "sweep" in merged and "sweep_param" in merged and merged["sweep_param"] in ("r", "steps"):
        merged["sweep"] = tuple(int(v) if float(v).is_integer() else v for v in merged["sweep"])
    try:
        return ExperimentConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def config_text(config: ExperimentConfig) -> str:
    """Inverse of :func:`parse_config` (``None`` fields omitted)."""
    lines = []
    for f in dataclasses.fields(config):
        value = getattr(config, f.name)
        if value is None:
            continue
        if isinstance(value, tuple):
            value = ",".join(_fmt(float(v)) for v in value)
        elif isinstance(value, float):
            value = _fmt(value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"

