# This code is part of fqi-air
#
# (C) Copyright fqi-air contributors 2026
#
# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.
"""Function approximators mapping feature rows to one value per output"""
import abc
import copy
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg

from app.libs.core import RngStream

from .dtos import FitConfig, FunctionClass
from .exc import ContractError, NonFiniteError, SerializationError
from .optimizers import Optimizer, Params

RIDGE = 1e-8


class Approximator(abc.ABC):
    """An approximator with one output per action

    fit and partial_fit regress the output selected by each row's action
    onto its target.

    Attributes:
        n_inputs: the number of input features
        n_outputs: the number of outputs
    """

    kind: FunctionClass

    def __init__(self, n_inputs: int, n_outputs: int):
        self.n_inputs = n_inputs
        self.n_outputs = n_outputs

    @abc.abstractmethod
    def predict(self, x: np.ndarray) -> np.ndarray:
        """(n, n_outputs) values for (n, n_inputs) rows"""

    @abc.abstractmethod
    def fit(
        self,
        x: np.ndarray,
        actions: np.ndarray,
        targets: np.ndarray,
        cfg: FitConfig,
        rng: Optional[RngStream] = None,
    ) -> List[float]:
        """Least-squares regression of the selected outputs onto the targets

        Returns:
            the mean squared error trace of the fit
        """

    @abc.abstractmethod
    def partial_fit(
        self,
        x: np.ndarray,
        actions: np.ndarray,
        targets: np.ndarray,
        cfg: FitConfig,
    ) -> float:
        """One incremental update towards the targets; returns the batch error"""

    @abc.abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        pass

    def copy(self) -> "Approximator":
        return copy.deepcopy(self)

    def selected_mse(
        self, x: np.ndarray, actions: np.ndarray, targets: np.ndarray
    ) -> float:
        predictions = self.predict(x)[np.arange(len(actions)), actions]
        return float(np.mean((predictions - targets) ** 2))

    def _check_pairs(
        self, x: np.ndarray, actions: np.ndarray, targets: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        actions = np.asarray(actions, dtype=int)
        targets = np.asarray(targets, dtype=float)
        if len(targets) == 0:
            raise ContractError("cannot fit on an empty set of pairs")
        if x.shape != (len(targets), self.n_inputs) or actions.shape != targets.shape:
            raise ContractError("inputs, actions and targets do not line up")
        if np.any((actions < 0) | (actions >= self.n_outputs)):
            raise ContractError("action out of range")
        if not np.all(np.isfinite(targets)):
            raise NonFiniteError("targets must be finite")
        return x, actions, targets


class TabularApproximator(Approximator):
    """A lookup table keyed by the exact feature row

    Cells that were never fitted hold 0.
    """

    kind = FunctionClass.TABULAR

    def __init__(self, n_inputs: int, n_outputs: int):
        super().__init__(n_inputs, n_outputs)
        self.table: Dict[Tuple[float, ...], np.ndarray] = {}
        self.counts: Dict[Tuple[float, ...], np.ndarray] = {}

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[0] == 0:
            return np.zeros((0, self.n_outputs))
        keys, inverse = np.unique(x, axis=0, return_inverse=True)
        values = np.zeros((len(keys), self.n_outputs))
        for i, key in enumerate(keys):
            row = self.table.get(tuple(key.tolist()))
            if row is not None:
                values[i] = row
        return values[inverse.reshape(-1)]

    def _cells(
        self, x: np.ndarray, actions: np.ndarray, targets: np.ndarray
    ) -> List[Tuple[Tuple[float, ...], int, float, int]]:
        rows = np.column_stack([x, actions.astype(float)])
        cells, inverse = np.unique(rows, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        sums = np.bincount(inverse, weights=targets, minlength=len(cells))
        counts = np.bincount(inverse, minlength=len(cells))
        return [
            (tuple(cell[:-1].tolist()), int(cell[-1]), float(total), int(count))
            for cell, total, count in zip(cells, sums, counts)
        ]

    def fit(self, x, actions, targets, cfg, rng=None) -> List[float]:
        x, actions, targets = self._check_pairs(x, actions, targets)
        before = self.selected_mse(x, actions, targets)
        for key, action, total, count in self._cells(x, actions, targets):
            self.table.setdefault(key, np.zeros(self.n_outputs))[action] = total / count
            self.counts.setdefault(key, np.zeros(self.n_outputs, dtype=int))[
                action
            ] = count
        return [before, self.selected_mse(x, actions, targets)]

    def partial_fit(self, x, actions, targets, cfg) -> float:
        x, actions, targets = self._check_pairs(x, actions, targets)
        for key, action, total, count in self._cells(x, actions, targets):
            values = self.table.setdefault(key, np.zeros(self.n_outputs))
            seen = self.counts.setdefault(key, np.zeros(self.n_outputs, dtype=int))
            seen[action] += count
            values[action] += (total - count * values[action]) / seen[action]
        return self.selected_mse(x, actions, targets)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "n_inputs": self.n_inputs,
            "n_outputs": self.n_outputs,
            "cells": [
                [list(key), self.table[key].tolist(), self.counts[key].tolist()]
                for key in sorted(self.table)
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TabularApproximator":
        approx = cls(int(data["n_inputs"]), int(data["n_outputs"]))
        for key, values, counts in data["cells"]:
            approx.table[tuple(float(v) for v in key)] = np.array(values, dtype=float)
            approx.counts[tuple(float(v) for v in key)] = np.array(counts, dtype=int)
        return approx


class LinearApproximator(Approximator):
    """One affine function of the features per output"""

    kind = FunctionClass.LINEAR

    def __init__(self, n_inputs: int, n_outputs: int):
        super().__init__(n_inputs, n_outputs)
        self.weights = np.zeros((n_outputs, n_inputs + 1))
        self._optimizer: Optional[Optimizer] = None

    @staticmethod
    def _with_bias(x: np.ndarray) -> np.ndarray:
        return np.column_stack([x, np.ones(len(x))])

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self._with_bias(np.asarray(x, dtype=float)) @ self.weights.T

    def fit(self, x, actions, targets, cfg, rng=None) -> List[float]:
        x, actions, targets = self._check_pairs(x, actions, targets)
        before = self.selected_mse(x, actions, targets)
        design = self._with_bias(x)
        ridge = RIDGE * np.eye(design.shape[1])
        for action in np.unique(actions):
            rows = actions == action
            gram = design[rows].T @ design[rows] + ridge
            moment = design[rows].T @ targets[rows]
            self.weights[action] = scipy.linalg.solve(gram, moment, assume_a="pos")
        return [before, self.selected_mse(x, actions, targets)]

    def partial_fit(self, x, actions, targets, cfg) -> float:
        x, actions, targets = self._check_pairs(x, actions, targets)
        design = self._with_bias(x)
        rows = np.arange(len(actions))
        residual = (design @ self.weights.T)[rows, actions] - targets
        grad = np.zeros_like(self.weights)
        np.add.at(grad, actions, 2.0 * residual[:, None] * design / len(actions))
        optimizer = _optimizer_for(self._optimizer, cfg)
        self._optimizer = optimizer
        self.weights = optimizer.step({"weights": self.weights}, {"weights": grad})[
            "weights"
        ]
        return float(np.mean(residual**2))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "n_inputs": self.n_inputs,
            "n_outputs": self.n_outputs,
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LinearApproximator":
        approx = cls(int(data["n_inputs"]), int(data["n_outputs"]))
        approx.weights = np.array(data["weights"], dtype=float)
        return approx


class MlpApproximator(Approximator):
    """Two-layer perceptron: input -> hidden rectified units -> outputs

    Weights are drawn uniformly in +-sqrt(6 / (fan_in + fan_out)) and biases
    start at zero.

    Attributes:
        hidden: the number of hidden units
        params: the weights by name, w1 (in, hidden), b1, w2 (hidden, out), b2
    """

    kind = FunctionClass.MLP

    def __init__(
        self,
        n_inputs: int,
        n_outputs: int,
        hidden: int = 128,
        rng: Optional[RngStream] = None,
        zero: bool = False,
    ):
        super().__init__(n_inputs, n_outputs)
        self.hidden = hidden
        self._optimizer: Optional[Optimizer] = None
        if zero or rng is None:
            self.params = {
                "w1": np.zeros((n_inputs, hidden)),
                "b1": np.zeros(hidden),
                "w2": np.zeros((hidden, n_outputs)),
                "b2": np.zeros(n_outputs),
            }
        else:
            self.params = {
                "w1": _glorot(rng, n_inputs, hidden),
                "b1": np.zeros(hidden),
                "w2": _glorot(rng, hidden, n_outputs),
                "b2": np.zeros(n_outputs),
            }

    def forward(self, x: np.ndarray) -> Tuple[np.ndarray, Tuple[np.ndarray, ...]]:
        p = self.params
        pre_activation = x @ p["w1"] + p["b1"]
        activation = np.maximum(pre_activation, 0.0)
        return activation @ p["w2"] + p["b2"], (pre_activation, activation)

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.forward(np.asarray(x, dtype=float))[0]

    def loss_and_gradients(
        self, x: np.ndarray, targets: np.ndarray, mask: np.ndarray
    ) -> Tuple[float, Params]:
        """Masked squared loss summed over outputs, averaged over rows

        Args:
            x: (n, n_inputs) inputs
            targets: (n, n_outputs) targets
            mask: (n, n_outputs) weights of every output, 1 where it is fitted

        Returns:
            the loss and its gradient for every parameter
        """
        out, (pre_activation, activation) = self.forward(x)
        n = x.shape[0]
        diff = (out - targets) * mask
        loss = float((diff**2).sum() / n)

        d_out = 2.0 * diff / n
        d_hidden = (d_out @ self.params["w2"].T) * (pre_activation > 0)
        grads = {
            "w1": x.T @ d_hidden,
            "b1": d_hidden.sum(axis=0),
            "w2": activation.T @ d_out,
            "b2": d_out.sum(axis=0),
        }
        return loss, grads

    def fit(self, x, actions, targets, cfg, rng=None) -> List[float]:
        x, actions, targets = self._check_pairs(x, actions, targets)
        full_targets, mask = _select(actions, targets, self.n_outputs)
        return self.fit_full(x, full_targets, cfg, rng, mask=mask)

    def fit_full(
        self,
        x: np.ndarray,
        targets: np.ndarray,
        cfg: FitConfig,
        rng: Optional[RngStream],
        mask: Optional[np.ndarray] = None,
    ) -> List[float]:
        """Mini-batch regression of all outputs for cfg.updates steps

        Returns:
            the mean squared error over the fitted outputs before training and
            after every pass over the data
        """
        x = np.asarray(x, dtype=float)
        targets = np.asarray(targets, dtype=float)
        if len(x) == 0:
            raise ContractError("cannot fit on an empty set of pairs")
        if not np.all(np.isfinite(targets)):
            raise NonFiniteError("targets must be finite")
        if mask is None:
            mask = np.ones_like(targets)
        if rng is None:
            rng = RngStream(cfg.seed, "fit")

        optimizer = _optimizer_for(self._optimizer, cfg)
        self._optimizer = optimizer
        batch_size = min(cfg.batch_size, len(x))
        trace = [self._masked_mse(x, targets, mask)]
        updates = 0
        while updates < cfg.updates:
            order = rng.permutation(len(x))
            for start in range(0, len(x), batch_size):
                if updates >= cfg.updates:
                    break
                rows = order[start : start + batch_size]
                _, grads = self.loss_and_gradients(x[rows], targets[rows], mask[rows])
                self.params = optimizer.step(self.params, grads)
                updates += 1
            trace.append(self._masked_mse(x, targets, mask))
        return trace

    def partial_fit(self, x, actions, targets, cfg) -> float:
        x, actions, targets = self._check_pairs(x, actions, targets)
        full_targets, mask = _select(actions, targets, self.n_outputs)
        loss, grads = self.loss_and_gradients(x, full_targets, mask)
        optimizer = _optimizer_for(self._optimizer, cfg)
        self._optimizer = optimizer
        self.params = optimizer.step(self.params, grads)
        return loss

    def _masked_mse(self, x, targets, mask) -> float:
        diff = (self.predict(x) - targets) * mask
        return float((diff**2).sum() / mask.sum())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "n_inputs": self.n_inputs,
            "n_outputs": self.n_outputs,
            "hidden": self.hidden,
            "params": {name: value.tolist() for name, value in self.params.items()},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MlpApproximator":
        approx = cls(int(data["n_inputs"]), int(data["n_outputs"]), int(data["hidden"]))
        approx.params = {
            name: np.array(value, dtype=float) for name, value in data["params"].items()
        }
        return approx


def make_approximator(
    fclass: FunctionClass,
    n_inputs: int,
    n_outputs: int,
    rng: Optional[RngStream] = None,
    hidden: int = 128,
) -> Approximator:
    fclass = FunctionClass(fclass)
    if fclass == FunctionClass.TABULAR:
        return TabularApproximator(n_inputs, n_outputs)
    if fclass == FunctionClass.LINEAR:
        return LinearApproximator(n_inputs, n_outputs)
    return MlpApproximator(n_inputs, n_outputs, hidden=hidden, rng=rng)


def approximator_from_dict(data: Dict[str, Any]) -> Approximator:
    loaders = {
        FunctionClass.TABULAR.value: TabularApproximator.from_dict,
        FunctionClass.LINEAR.value: LinearApproximator.from_dict,
        FunctionClass.MLP.value: MlpApproximator.from_dict,
    }
    try:
        return loaders[data["kind"]](data)
    except KeyError as exp:
        raise SerializationError(f"unknown or incomplete approximator: {exp}")


def _glorot(rng: RngStream, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def _select(
    actions: np.ndarray, targets: np.ndarray, n_outputs: int
) -> Tuple[np.ndarray, np.ndarray]:
    mask = np.zeros((len(actions), n_outputs))
    mask[np.arange(len(actions)), actions] = 1.0
    return mask * targets[:, None], mask


def _optimizer_for(current: Optional[Optimizer], cfg: FitConfig) -> Optimizer:
    if current is not None and current.cfg == cfg:
        return current
    return Optimizer(cfg)
