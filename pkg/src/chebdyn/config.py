"""Central defaults for tolerances and budgets.

Every report written by the CLI embeds ``as_dict()`` so a run can be
reproduced from its output alone.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Defaults:
    # roots / clustering
    root_tol: float = 1e-8
    root_sweeps: int = 200
    residual_tol: float = 1e-9
    # vanishing-order and local-degree tests
    order_tol: float = 1e-9
    # evaluation charts
    pole_chart_rel: float = 1e-14
    infinity_chart: float = 1e8
    # fixed-point classification
    indifferent_band: float = 1e-9
    superattracting_tol: float = 1e-9
    root_of_unity_tol: float = 1e-6
    root_of_unity_max_order: int = 24
    multiple_fixed_tol: float = 1e-6
    # orbit iteration
    conv_tol: float = 1e-10
    conv_hits: int = 10
    budget: int = 2_000
    parabolic_budget: int = 200_000
    parabolic_radius: float = 1e-3
    parabolic_window: int = 64
    preimage_tol: float = 1e-13
    infinity_patience: int = 1_000
    # rendering
    tile: int = 64
    symmetry_pass: float = 0.995

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULTS = Defaults()
