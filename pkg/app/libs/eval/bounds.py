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
"""Closed-form error bounds of the AIR estimators"""
import math

from app.libs.core import AirSpec

from .exc import BoundParameterError


def _check_zeta(zeta: float):
    if not 0.0 < zeta < 1.0:
        raise BoundParameterError(f"zeta must lie in (0, 1), got {zeta}")


def _check_positive(**values: float):
    for name, value in values.items():
        if value <= 0:
            raise BoundParameterError(f"{name} must be positive, got {value}")


def eval_bound_thm2(n: int, zeta: float, spec: AirSpec) -> float:
    """Radius of the replay estimate around the true value, holding with
    probability at least 1 - zeta

    v_max * (H * eps_air + H * eps_p + sqrt(ln(2 / zeta) / (2 n)))

    Raises:
        BoundParameterError: if n < 1 or zeta is outside (0, 1)
    """
    _check_zeta(zeta)
    if n < 1:
        raise BoundParameterError(f"n must be at least 1, got {n}")
    horizon = spec.horizon
    return spec.v_max * (
        horizon * spec.eps_air
        + horizon * spec.eps_p
        + math.sqrt(math.log(2.0 / zeta) / (2.0 * n))
    )


def subopt_bound_thm1(
    n: int, zeta: float, spec: AirSpec, f_class_size: float, eps_apx: float
) -> float:
    """Suboptimality bound of the sweep policy

    2 v_max H (eps_air + eps_p)
    + (H + 1) H sqrt(|S_end| |A|)
      * sqrt(72 v_max^2 ln(H |F| |S_end| |A| / zeta) / n + 2 eps_apx)

    |S_end| is the size of the endogenous sweep.

    Raises:
        BoundParameterError: on non-positive sizes, negative eps_apx or zeta
            outside (0, 1)
    """
    _check_zeta(zeta)
    _check_positive(n=n, f_class_size=f_class_size)
    if eps_apx < 0:
        raise BoundParameterError(f"eps_apx must not be negative, got {eps_apx}")

    horizon, v_max = spec.horizon, spec.v_max
    cells = len(spec.endo_sweep) * spec.n_actions
    bias = 2.0 * v_max * horizon * (spec.eps_air + spec.eps_p)
    log_term = math.log(horizon * f_class_size * cells / zeta)
    statistical = math.sqrt(72.0 * v_max**2 * log_term / n + 2.0 * eps_apx)
    return bias + (horizon + 1) * horizon * math.sqrt(cells) * statistical


def simulation_bound(eps: float, horizon: int, r_max: float) -> float:
    """Value gap between two MDPs whose joint kernels differ by at most eps in
    l1 norm per row: eps * H^2 * r_max / 2"""
    _check_positive(horizon=horizon, r_max=r_max)
    if eps < 0:
        raise BoundParameterError(f"eps must not be negative, got {eps}")
    return eps * horizon**2 * r_max / 2.0


def baseline_gap_bound(spec: AirSpec) -> float:
    """Value gap between an MDP and its behavior baseline: v_max H (eps_air + eps_p)"""
    return spec.v_max * spec.horizon * (spec.eps_air + spec.eps_p)
