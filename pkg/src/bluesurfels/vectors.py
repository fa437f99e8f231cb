"""Shared JSON test vectors consumed by the web viewer's formula port."""

from __future__ import annotations

import json
from pathlib import Path

from .prefixmath import (
    BudgetController,
    FoveaZones,
    PrefixModel,
    budget_update,
    foveated_size,
    prefix_for_radius,
    radius_for_screen,
)


def generate_test_vectors() -> dict:
    prefix_cases = []
    for p_m, r_m, total in [(1000, 0.05, 100000), (1000, 0.05, 4000), (2, 1.0, 16),
                            (500, 0.003, 200000), (1000, 1.0, 1000)]:
        model = PrefixModel(p_m=p_m, r_m=r_m, total=total)
        for factor in [0.25, 0.5, 0.9, 1.0, 1.5, 2.0, 4.0, 10.0]:
            r = r_m * factor
            p, saturated = prefix_for_radius(model, r)
            prefix_cases.append({"p_m": p_m, "r_m": r_m, "total": total, "r": r,
                                 "expected_p": p, "saturated": saturated})

    radius_cases = []
    for s, d_p in [(1.0, 1.0), (2.0, 1.0), (4.0, 0.5), (1.0, 2.0), (3.5, 0.01), (8.0, 0.125)]:
        for as_printed in (False, True):
            radius_cases.append({"s": s, "d_p": d_p, "as_printed": as_printed,
                                 "expected_r": radius_for_screen(s, d_p, as_printed=as_printed)})

    budget_cases = []
    for t_target, initial, frames in [
        (10.0, 4.0, [10.0, 10.5, 9.5, 20.0, 20.0, 5.0, 11.5]),
        (16.6, 2.0, [33.2, 33.2, 33.2, 33.2, 33.2, 33.2]),
        (10.0, 7.8, [15.0, 15.0, 15.0]),
        (10.0, 8.0, [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]),
    ]:
        ctrl = BudgetController(t_target=t_target, size=initial)
        sizes = [budget_update(ctrl, t) for t in frames]
        budget_cases.append({"t_target": t_target, "initial": initial,
                             "frames": frames, "expected_sizes": sizes})

    zones = FoveaZones(center=(500.0, 500.0), rings=[(100.0, 1.0), (300.0, 2.0), (600.0, 4.0)])
    fovea_cases = []
    for point in [(500.0, 500.0), (560.0, 500.0), (500.0, 700.0), (700.0, 500.0),
                  (500.0, 50.0), (1400.0, 500.0), (500.0, 800.0)]:
        for s in (1.0, 2.5):
            fovea_cases.append({"center": list(zones.center),
                                "rings": [list(r) for r in zones.rings],
                                "s": s, "point": list(point),
                                "expected": foveated_size(s, point, zones)})

    return {"prefix": prefix_cases, "radius": radius_cases,
            "budget": budget_cases, "foveation": fovea_cases}


def export_test_vectors(path) -> None:
    Path(path).write_text(json.dumps(generate_test_vectors(), indent=1))
