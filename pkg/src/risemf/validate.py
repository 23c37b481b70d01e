"""Configuration sanity report: type invariants plus a short drift-checked run."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codebook import Codebooks, build_codebooks
from .config import ScenarioConfig

PASS, WARN, FAIL = "PASS", "WARN", "FAIL"


@dataclass
class Check:
    name: str
    status: str
    detail: str = ""

    def line(self) -> str:
        return f"[{self.status}] {self.name}" + (f": {self.detail}" if self.detail else "")


@dataclass
class Report:
    checks: list[Check] = field(default_factory=list)

    def add(self, name: str, ok: bool, detail: str = "", warn: bool = False) -> None:
        self.checks.append(Check(name, PASS if ok else (WARN if warn else FAIL), detail))

    @property
    def ok(self) -> bool:
        return all(c.status != FAIL for c in self.checks)

    def failures(self) -> list[str]:
        return [c.name for c in self.checks if c.status == FAIL]

    def text(self) -> str:
        return "\n".join(c.line() for c in self.checks) + "\n"


def _unit_rows(report: Report, name: str, rows: np.ndarray, tol: float) -> None:
    norms = np.linalg.norm(rows, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1) > tol)
    detail = "" if not len(bad) else f"entry {int(bad[0])} has norm {norms[bad[0]]:.6g}"
    report.add(f"{name} unit power", not len(bad), detail)


def validate(config: ScenarioConfig, books: Codebooks | None = None, smoke_slots: int = 100,
             tol: float = 1e-9) -> Report:
    """Never raises on a bad config; every problem becomes a failed check."""
    from .simulator import DriftBoundViolation, run

    report = Report()
    try:
        scene = config.scene_object()
        radio = config.radio_config()
        service = config.service_config()
        pixels = config.pixel_set()
    except (ValueError, TypeError) as exc:
        report.add("config builds", False, str(exc))
        return report
    report.add("config builds", True)

    report.add("bandwidth > 0", radio.bandwidth > 0, f"{radio.bandwidth}")
    report.add("noise power > 0", radio.noise_power > 0, f"{radio.noise_power:.3e} W")
    report.add("wavelength > 0", radio.wavelength > 0, f"{radio.wavelength:.4e} m")
    if radio.max_tx_power > 0:
        report.add("max_tx_power > 0", True, f"{radio.max_tx_power} W")
    else:
        report.add("max_tx_power > 0", False, "only P=0 is feasible; the UE never transmits", warn=True)
    report.add("slot_duration > 0", service.slot_duration > 0)
    report.add("cpu_max > 0", service.cpu_max > 0, f"{service.cpu_max:.3e} cycles/s")
    report.add("pixel weights >= 0", all(w >= 0 for w in pixels.weights))
    report.add("horizon > warmup >= 0", config.run.horizon > config.run.warmup >= 0)

    cb = config.codebook
    if books is None:
        try:
            books = build_codebooks(scene, radio.wavelength, cb.ue_grid_deg, cb.ap_grid_deg,
                                    cb.ris_grid_deg, cb.phase_bits)
        except ValueError as exc:
            report.add("codebooks build", False, str(exc))
            return report
    expected = (len(cb.ue_grid_deg), len(cb.ap_grid_deg), len(cb.ris_grid_deg))
    report.add("codebook cardinalities", books.sizes == expected, f"{books.sizes} vs grids {expected}")
    report.add("precoder length", books.precoders.shape[1] == scene.ue_array.num_elements)
    report.add("combiner length", books.combiners.shape[1] == scene.ap_array.num_elements)
    report.add("RIS profile length", books.ris_phases.shape[1] == scene.ris_array.num_elements)
    _unit_rows(report, "precoder", books.precoders, tol)
    _unit_rows(report, "combiner", books.combiners, tol)
    report.add("RIS phasors unit modulus", bool(np.allclose(np.abs(books.ris_phasors), 1.0, atol=tol)))

    slots = max(smoke_slots, 2)
    smoke = config.with_overrides({"run.horizon": slots, "run.warmup": 0, "run.check_drift": True})
    try:
        m = run(smoke)
        report.add(f"{slots}-slot smoke run with drift check", True,
                   f"min slack {m.min_drift_slack:.3e}")
    except DriftBoundViolation as exc:
        report.add(f"{slots}-slot smoke run with drift check", False, str(exc))
    except (ValueError, ArithmeticError) as exc:
        report.add(f"{slots}-slot smoke run with drift check", False, f"{type(exc).__name__}: {exc}")
    return report
