"""Config ingestion, run orchestration, angle sweeps and kick landscapes."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .evolution import EvolutionParams, apply_kick, evolve_run, ground_state_oracle, resolve_timing
from .exceptions import ConfigurationError, DomainError
from .models import KickSpec, ModelConfig, bond_count, build_model, problem_terms
from .observables import RunResult, default_observers, time_to_solution
from .outputs import write_json, write_result_csv, write_table_csv
from .pauli import expectation
from .theory import TheoryInputs, mixer_energy_closed_form, optimal_angle, theory_report

OBSERVABLE_NAMES = ("p_all0", "p_all1", "order_prob", "fidelity")


class _Strict(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class OracleSpec(_Strict):
    backend: Literal["dense", "imaginary_time"] = "dense"
    d_beta: Optional[float] = Field(default=None, gt=0)
    tol: float = Field(default=1e-12, gt=0)


class TheorySpec(_Strict):
    mixer_energy: Literal["simulated", "closed_form"] = "simulated"
    eval_time: Optional[float] = Field(default=None, gt=0)


class SweepSpec(_Strict):
    thetas: list[float] = Field(min_length=1)
    taus: Optional[list[float]] = None
    workers: int = Field(default=1, ge=1)

    @field_validator("taus")
    @classmethod
    def _positive_taus(cls, v):
        if v is not None and (not v or any(t <= 0 for t in v)):
            raise ValueError("taus must be a non-empty list of positive values")
        return v


class LandscapeSpec(_Strict):
    thetas: list[float] = Field(min_length=1)
    axis_pairs: list[tuple[Literal["X", "Y", "Z"], Literal["X", "Y", "Z", "XY"]]] = Field(min_length=1)


class OutputSpec(_Strict):
    directory: str = "runs"
    stem: Optional[str] = None


class ExperimentConfig(_Strict):
    """Everything needed to reproduce a run; echoed verbatim into every output."""

    name: str = "run"
    model: ModelConfig
    kick: Optional[KickSpec] = None
    evolution: EvolutionParams = EvolutionParams()
    observables: Optional[list[Literal["p_all0", "p_all1", "order_prob", "fidelity"]]] = None
    epsilon: float = Field(default=0.05, gt=0, lt=1)
    e_target: Optional[float] = None
    tstar_criterion: Literal["sustained", "first_arrival"] = "sustained"
    oracle: OracleSpec = OracleSpec()
    theory: TheorySpec = TheorySpec()
    sweep: Optional[SweepSpec] = None
    landscape: Optional[LandscapeSpec] = None
    output: OutputSpec = OutputSpec()
    seed: int = 0

    def model_resolved(self) -> ModelConfig:
        """Model config with the top-level kick folded in and kick defaults filled."""
        cfg = self.model if self.kick is None else self.model.model_copy(update={"kick": self.kick})
        return cfg.resolved()

    def with_kick(self, **update) -> "ExperimentConfig":
        kick = self.model_resolved().kick.model_copy(update=update)
        return self.model_copy(update={"kick": kick})

    def with_tau(self, tau: float) -> "ExperimentConfig":
        # a changed tau invalidates any dt_k derived from the old one
        kick = self.kick if self.kick is not None else self.model.kick
        model = self.model.model_copy(update={"tau": tau, "kick": kick})
        return self.model_copy(update={"model": model, "kick": None})

    def echo(self) -> dict:
        return self.model_dump(mode="json")


def _format_validation(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "invalid configuration: " + "; ".join(parts)


def parse_config(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigurationError(_format_validation(exc)) from None


def load_config(path: Path | str) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be a JSON object")
    return parse_config(data)


def target_energy(config: ExperimentConfig) -> float:
    """Explicit ``e_target`` if given, else the ground-state oracle on the problem Hamiltonian."""
    if config.e_target is not None:
        return float(config.e_target)
    cfg = config.model_resolved()
    o = config.oracle
    energy, _ = ground_state_oracle(
        problem_terms(cfg), cfg.register, backend=o.backend, d_beta=o.d_beta, tol=o.tol, seed=config.seed
    )
    return energy


def _observers(config: ExperimentConfig) -> dict:
    cfg = config.model_resolved()
    obs = default_observers(cfg.model, cfg.n_system)
    if config.observables is not None:
        unknown = set(config.observables) - set(obs)
        if unknown:
            raise ConfigurationError(f"observables {sorted(unknown)} are not defined for model {cfg.model}")
        obs = {k: v for k, v in obs.items() if k in config.observables}
    return obs


def simulate(config: ExperimentConfig, e_target: Optional[float] = None) -> RunResult:
    """Run the configured evolution in memory; no files are written."""
    cfg = config.model_resolved()
    h, psi0 = build_model(cfg)
    e_target = target_energy(config) if e_target is None else e_target
    result = evolve_run(h, psi0, cfg.kick, config.evolution, observers=_observers(config), e_target=e_target)
    result.t_star = time_to_solution(result, config.epsilon, criterion=config.tstar_criterion)
    result.config_echo = config.echo()
    return result


def simulated_mixer_energy(config: ExperimentConfig, t: Optional[float] = None) -> float:
    """Reduced mixer energy at ``t`` (default ``tau``) of the unkicked run on the same time grid."""
    cfg = config.model_resolved()
    t = cfg.tau if t is None else t
    h, psi0 = build_model(cfg)
    unkicked = cfg.kick.model_copy(update={"theta": 0.0})
    dt, _ = resolve_timing(h, unkicked, config.evolution)
    n_steps = max(1, int(round(t / dt)))
    params = EvolutionParams(dt=dt, t_end=n_steps * dt, record_stride=n_steps)
    res = evolve_run(h, psi0, None, params)
    t_end = float(res.times[-1])
    return expectation(res.final_state, h.mixer.at(t_end))


def mixer_energy(config: ExperimentConfig) -> float:
    cfg = config.model_resolved()
    t = config.theory.eval_time or cfg.tau
    if config.theory.mixer_energy == "closed_form":
        return mixer_energy_closed_form(cfg.n_system, cfg.theta_mixer0, cfg.tau, t)
    return simulated_mixer_energy(config, t)


def theory_inputs(config: ExperimentConfig, e_target: float) -> TheoryInputs:
    cfg = config.model_resolved()
    return TheoryInputs(
        n_s=cfg.n_system,
        n_a=cfg.n_ancilla,
        n_k=cfg.kick.n_k,
        theta=cfg.kick.theta,
        theta_m0=cfg.theta_mixer0,
        tau=cfg.tau,
        theta_xx0=cfg.theta_xx0 if cfg.theta_xx0 is not None else 1.0,
        e_target=e_target,
        epsilon=config.epsilon,
        T=config.theory.eval_time,
        bonds=bond_count(cfg) if cfg.model != "h2" else None,
    )


def theory_predictions(config: ExperimentConfig, e_target: Optional[float] = None) -> dict:
    """Theory report for the config; the H2 model only gets the optimal angle."""
    cfg = config.model_resolved()
    e_target = target_energy(config) if e_target is None else e_target
    e_mix = mixer_energy(config)
    if cfg.model == "h2":
        out = {"e_mixer_tau": e_mix}
        try:
            out["theta_opt"] = optimal_angle(e_target, e_mix, max(cfg.n_ancilla, 1), max(cfg.kick.n_k, 1))
        except DomainError as exc:
            out["theta_opt"] = None
            out["theta_opt_error"] = str(exc)
        return out
    return theory_report(theory_inputs(config, e_target), e_mixer_tau=e_mix)


def _paths(config: ExperimentConfig, out_dir: Optional[Path | str], suffix: str = "") -> tuple[Path, Path]:
    base = Path(out_dir) if out_dir is not None else Path(config.output.directory)
    stem = config.output.stem or config.name
    if not stem.endswith(suffix):
        stem += suffix
    return base / f"{stem}.csv", base / f"{stem}.json"


def _summary(config: ExperimentConfig, result: RunResult, e_target: float) -> dict:
    first = time_to_solution(result, config.epsilon, criterion="first_arrival")
    sustained = time_to_solution(result, config.epsilon, criterion="sustained")
    return {
        "name": config.name,
        "e_target": e_target,
        "final_energy": result.final_energy,
        "final_relative_error": result.final_relative_error(e_target),
        "t_star": result.t_star,
        "t_star_sustained": sustained,
        "t_star_first_arrival": first,
        "epsilon": config.epsilon,
        "final_norm": float(result.norm[-1]),
        "max_norm_drift": float(np.max(np.abs(result.norm - 1.0))),
        "n_records": int(len(result.times)),
        "theory": theory_predictions(config, e_target),
        "config": config.echo(),
    }


def run(config: ExperimentConfig, out_dir: Optional[Path | str] = None, write: bool = True) -> tuple[RunResult, dict]:
    """Simulate, then write ``<stem>.csv`` and ``<stem>.json``.

    Nothing is written until the run has finished, and both files are
    written atomically, so an aborted run leaves no partial output.
    """
    e_target = target_energy(config)
    result = simulate(config, e_target)
    summary = _summary(config, result, e_target)
    if write:
        csv_path, json_path = _paths(config, out_dir)
        write_result_csv(result, csv_path)
        try:
            write_json(summary, json_path)
        except BaseException:
            csv_path.unlink(missing_ok=True)
            raise
        summary = dict(summary, csv_path=str(csv_path), json_path=str(json_path))
    return result, summary


def _sweep_point(config: ExperimentConfig, tau: float, theta: float, e_target: float) -> dict:
    cfg = config.with_tau(tau).with_kick(theta=theta)
    res = simulate(cfg, e_target)
    return {
        "tau": tau,
        "theta": theta,
        "t_star": res.t_star,
        "t_star_first_arrival": time_to_solution(res, config.epsilon, criterion="first_arrival"),
        "final_energy": res.final_energy,
        "final_error": res.final_relative_error(e_target),
    }


def select_optimal(rows: list[dict], epsilon: float) -> Optional[float]:
    """argmin T* over rows with final error <= epsilon; ties go to the smaller angle."""
    ok = [r for r in rows if r["final_error"] <= epsilon and r["t_star"] is not None]
    if not ok:
        return None
    return min(ok, key=lambda r: (r["t_star"], r["theta"]))["theta"]


SWEEP_COLUMNS = ("tau", "theta", "t_star", "t_star_first_arrival", "final_energy", "final_error")


def sweep(config: ExperimentConfig, out_dir: Optional[Path | str] = None, write: bool = True,
          workers: Optional[int] = None) -> dict:
    if config.sweep is None:
        raise ConfigurationError("sweep needs a 'sweep' section with a theta grid")
    e_target = target_energy(config)
    taus = config.sweep.taus or [config.model.tau]
    grid = [(tau, float(th)) for tau in taus for th in config.sweep.thetas]
    n_jobs = workers if workers is not None else config.sweep.workers
    rows = Parallel(n_jobs=n_jobs)(delayed(_sweep_point)(config, tau, th, e_target) for tau, th in grid)
    # rows come back in submission order regardless of worker scheduling
    best = {}
    for tau in taus:
        theta = select_optimal([r for r in rows if r["tau"] == tau], config.epsilon)
        best[repr(float(tau))] = theta if theta is not None else "no admissible angle"
    summary = {
        "name": config.name,
        "e_target": e_target,
        "epsilon": config.epsilon,
        "theta_opt": best[repr(float(taus[0]))] if len(taus) == 1 else best,
        "rows": rows,
        "config": config.echo(),
    }
    if write:
        csv_path, json_path = _paths(config, out_dir, "_sweep")
        write_table_csv(rows, csv_path, SWEEP_COLUMNS)
        write_json(summary, json_path)
        summary = dict(summary, csv_path=str(csv_path), json_path=str(json_path))
    return summary


LANDSCAPE_COLUMNS = ("ancilla_axis", "system_axis", "theta", "energy", "delta_energy")


def landscape(config: ExperimentConfig, out_dir: Optional[Path | str] = None, write: bool = True) -> dict:
    """Reduced energy at ``t = 0`` after a single kick, per axis pair and angle."""
    if config.landscape is None:
        raise ConfigurationError("landscape needs a 'landscape' section")
    cfg = config.model_resolved()
    h, psi0 = build_model(cfg)
    h0 = h.at(0.0)
    e0 = expectation(psi0, h0)
    rows = []
    for anc, sys_axis in config.landscape.axis_pairs:
        for theta in config.landscape.thetas:
            spec = KickSpec(ancilla_axis=anc, system_axis=sys_axis, theta=float(theta), n_k=1, dt_k=1.0)
            e = expectation(apply_kick(psi0, spec), h0)
            rows.append(
                {"ancilla_axis": anc, "system_axis": sys_axis, "theta": float(theta), "energy": e, "delta_energy": e - e0}
            )
    summary = {"name": config.name, "initial_energy": e0, "rows": rows, "config": config.echo()}
    if write:
        csv_path, json_path = _paths(config, out_dir, "_landscape")
        write_table_csv(rows, csv_path, LANDSCAPE_COLUMNS)
        write_json(summary, json_path)
        summary = dict(summary, csv_path=str(csv_path), json_path=str(json_path))
    return summary


def landscape_curves(summary: dict) -> dict[tuple[str, str], np.ndarray]:
    curves: dict[tuple[str, str], list[float]] = {}
    for r in summary["rows"]:
        curves.setdefault((r["ancilla_axis"], r["system_axis"]), []).append(r["energy"])
    return {k: np.array(v) for k, v in curves.items()}


def oracle_report(config: ExperimentConfig) -> dict:
    cfg = config.model_resolved()
    o = config.oracle
    energy, _ = ground_state_oracle(
        problem_terms(cfg), cfg.register, backend=o.backend, d_beta=o.d_beta, tol=o.tol, seed=config.seed
    )
    return {"e_target": energy, "backend": o.backend, "model": cfg.model, "n_system": cfg.n_system}


def validate(config_path: Path | str) -> dict:
    cfg = load_config(config_path)
    # building the model catches semantic errors the schema cannot see
    build_model(cfg.model_resolved())
    return {"valid": True, "name": cfg.name}


__all__ = [
    "ExperimentConfig",
    "LandscapeSpec",
    "OracleSpec",
    "OutputSpec",
    "SweepSpec",
    "TheorySpec",
    "landscape",
    "landscape_curves",
    "load_config",
    "mixer_energy",
    "oracle_report",
    "parse_config",
    "run",
    "select_optimal",
    "simulate",
    "simulated_mixer_energy",
    "sweep",
    "target_energy",
    "theory_predictions",
    "validate",
]
