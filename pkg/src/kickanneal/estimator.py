"""Estimator-style wrapper so angle scans can use ``clone``/``set_params``."""
from __future__ import annotations

import numbers
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_scalar

from .exceptions import ConfigurationError
from .experiment import ExperimentConfig, parse_config, simulate, target_energy


class KickedAnnealer(BaseEstimator):
    """Kicked annealing run with flat, introspectable hyperparameters.

    There is no training data: ``fit`` ignores ``X``/``y`` and performs the
    simulation. ``score`` is the negated final relative energy error, so
    higher is better as with any sklearn scorer.
    """

    def __init__(
        self,
        model: str = "nn_tfim",
        n_system: int = 4,
        n_ancilla: int = 4,
        theta_xx0: Optional[float] = 1.0,
        bond_length: Optional[float] = None,
        theta_mixer0: float = 5.0,
        tau: float = 0.125,
        theta: float = 0.0,
        n_k: int = 0,
        dt_k: Optional[float] = None,
        ancilla_axis: str = "Z",
        system_axis: str = "X",
        mode: str = "impulsive",
        dt: Optional[float] = None,
        t_end: Optional[float] = None,
        record_stride: int = 10,
        epsilon: float = 0.05,
        e_target: Optional[float] = None,
    ):
        self.model = model
        self.n_system = n_system
        self.n_ancilla = n_ancilla
        self.theta_xx0 = theta_xx0
        self.bond_length = bond_length
        self.theta_mixer0 = theta_mixer0
        self.tau = tau
        self.theta = theta
        self.n_k = n_k
        self.dt_k = dt_k
        self.ancilla_axis = ancilla_axis
        self.system_axis = system_axis
        self.mode = mode
        self.dt = dt
        self.t_end = t_end
        self.record_stride = record_stride
        self.epsilon = epsilon
        self.e_target = e_target

    def _validate_params(self) -> None:
        try:
            check_scalar(self.n_system, "n_system", numbers.Integral, min_val=1)
            check_scalar(self.n_ancilla, "n_ancilla", numbers.Integral, min_val=0)
            check_scalar(self.n_k, "n_k", numbers.Integral, min_val=0)
            check_scalar(self.tau, "tau", numbers.Real, min_val=0, include_boundaries="neither")
            check_scalar(self.theta, "theta", numbers.Real)
            check_scalar(self.epsilon, "epsilon", numbers.Real, min_val=0, max_val=1, include_boundaries="neither")
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(str(exc)) from None

    def to_config(self) -> ExperimentConfig:
        self._validate_params()
        model = {
            "model": self.model,
            "n_system": self.n_system,
            "n_ancilla": self.n_ancilla,
            "theta_mixer0": self.theta_mixer0,
            "tau": self.tau,
        }
        if self.model == "h2":
            model["bond_length"] = self.bond_length
        else:
            model["theta_xx0"] = self.theta_xx0
        kick = {
            "theta": self.theta,
            "n_k": self.n_k,
            "dt_k": self.dt_k,
            "ancilla_axis": self.ancilla_axis,
            "system_axis": self.system_axis,
            "mode": self.mode,
        }
        evolution = {"dt": self.dt, "t_end": self.t_end, "record_stride": self.record_stride}
        return parse_config(
            {"model": model, "kick": kick, "evolution": evolution, "epsilon": self.epsilon, "e_target": self.e_target}
        )

    def fit(self, X=None, y=None):
        config = self.to_config()
        self.e_target_ = target_energy(config)
        self.result_ = simulate(config, self.e_target_)
        self.t_star_ = self.result_.t_star
        self.final_error_ = self.result_.final_relative_error(self.e_target_)
        return self

    def _check_fitted(self):
        if not hasattr(self, "result_"):
            raise AttributeError("KickedAnnealer is not fitted yet; call fit() first")

    def transform(self, X=None) -> np.ndarray:
        """Recorded ``(t, energy)`` pairs as a two-column array."""
        self._check_fitted()
        return np.column_stack([self.result_.times, self.result_.energy])

    def score(self, X=None, y=None) -> float:
        self._check_fitted()
        return -self.final_error_
