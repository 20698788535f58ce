"""Frame processing: calibration, contact detection, localization, deghosting.

No-contact taxels are true opens and read exactly 0, so a threshold just
above the quantization floor separates contact from noise. Active taxels
are grouped with 4-connectivity (diagonal ghost corners must not merge
with true contacts), localized by reading-weighted centroids, and checked
against the rectangle-completion pattern that sneak paths produce.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass

import numpy as np

from .core import Frame, SensorConfig

logger = logging.getLogger(__name__)

DEFAULT_ACTIVE_THRESHOLD = 10
DEFAULT_GHOST_ALPHA = 0.5
DEFAULT_GRAB_MIN_TAXELS = 6
DEFAULT_GRAB_COVER_FRACTION = 0.3


@dataclass(frozen=True)
class TaxelCalibration:
    slope: float  # ADC counts per newton
    intercept: float
    r_squared: float
    force_min_n: float
    force_max_n: float
    valid: bool = True


@dataclass(frozen=True)
class CalibrationTable:
    rows: int
    cols: int
    taxels: tuple  # row-major tuple of TaxelCalibration | None

    def get(self, row: int, col: int) -> TaxelCalibration | None:
        return self.taxels[row * self.cols + col]

    def to_json(self) -> dict:
        entries = []
        for i in range(self.rows):
            for j in range(self.cols):
                cal = self.get(i, j)
                if cal is None:
                    continue
                entries.append(
                    {
                        "row": i,
                        "col": j,
                        "slope": cal.slope,
                        "intercept": cal.intercept,
                        "r_squared": cal.r_squared,
                        "force_min_n": cal.force_min_n,
                        "force_max_n": cal.force_max_n,
                        "valid": cal.valid,
                    }
                )
        return {"rows": self.rows, "cols": self.cols, "taxels": entries}

    @classmethod
    def from_json(cls, data: dict) -> "CalibrationTable":
        rows, cols = int(data["rows"]), int(data["cols"])
        taxels = [None] * (rows * cols)
        for entry in data.get("taxels", []):
            cal = TaxelCalibration(
                slope=float(entry["slope"]),
                intercept=float(entry["intercept"]),
                r_squared=float(entry["r_squared"]),
                force_min_n=float(entry["force_min_n"]),
                force_max_n=float(entry["force_max_n"]),
                valid=bool(entry.get("valid", True)),
            )
            taxels[int(entry["row"]) * cols + int(entry["col"])] = cal
        return cls(rows=rows, cols=cols, taxels=tuple(taxels))

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "CalibrationTable":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def calibrate(samples: list[tuple[Frame, tuple[int, int], float]]) -> CalibrationTable:
    """Least-squares line per taxel through (force, reading) pairs.

    Taxels with fewer than two distinct forces stay uncalibrated (marked
    invalid with zero slope).
    """
    if not samples:
        raise ValueError("no calibration samples")
    rows, cols = samples[0][0].shape
    per_taxel: dict[tuple[int, int], list[tuple[float, float]]] = {}
    for frame, (i, j), force in samples:
        if frame.shape != (rows, cols):
            raise ValueError("mixed frame shapes in calibration samples")
        per_taxel.setdefault((i, j), []).append((force, float(frame.counts[i, j])))

    taxels: list[TaxelCalibration | None] = [None] * (rows * cols)
    for (i, j), pairs in per_taxel.items():
        f = np.array([p[0] for p in pairs])
        y = np.array([p[1] for p in pairs])
        if len(np.unique(f)) < 2:
            taxels[i * cols + j] = TaxelCalibration(
                slope=0.0,
                intercept=float(y.mean()),
                r_squared=0.0,
                force_min_n=float(f.min()),
                force_max_n=float(f.max()),
                valid=False,
            )
            continue
        design = np.vstack([f, np.ones_like(f)]).T
        (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
        fitted = design @ np.array([slope, intercept])
        ss_res = float(((y - fitted) ** 2).sum())
        ss_tot = float(((y - y.mean()) ** 2).sum())
        r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
        taxels[i * cols + j] = TaxelCalibration(
            slope=float(slope),
            intercept=float(intercept),
            r_squared=r_squared,
            force_min_n=float(f.min()),
            force_max_n=float(f.max()),
        )
    return CalibrationTable(rows=rows, cols=cols, taxels=tuple(taxels))


def detect_active(frame: Frame, threshold: int = DEFAULT_ACTIVE_THRESHOLD) -> np.ndarray:
    if threshold < 1:
        raise ValueError("threshold must be at least 1")
    return frame.counts >= threshold


def segment(active: np.ndarray) -> list[list[tuple[int, int]]]:
    """4-connected components of the active grid, ordered by top-left member."""
    active = np.asarray(active, dtype=bool)
    rows, cols = active.shape
    seen = np.zeros_like(active)
    components = []
    for i in range(rows):
        for j in range(cols):
            if not active[i, j] or seen[i, j]:
                continue
            stack = [(i, j)]
            seen[i, j] = True
            members = []
            while stack:
                r, c = stack.pop()
                members.append((r, c))
                for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                    if 0 <= nr < rows and 0 <= nc < cols and active[nr, nc] and not seen[nr, nc]:
                        seen[nr, nc] = True
                        stack.append((nr, nc))
            components.append(sorted(members))
    return components  # outer scan order already sorts by top-left member


def localize(
    component: list[tuple[int, int]], frame: Frame, config: SensorConfig
) -> tuple[float, float]:
    """Reading-weighted centroid of the member taxel centers, in mm."""
    if not component:
        raise ValueError("cannot localize an empty component")
    wx = wy = wsum = 0.0
    for (i, j) in component:
        w = float(frame.counts[i, j])
        cx, cy = config.taxel_center_mm(i, j)
        wx += w * cx
        wy += w * cy
        wsum += w
    if wsum == 0.0:
        # all-zero members (possible only with threshold<1 misuse): plain mean
        xs = [config.taxel_center_mm(i, j) for i, j in component]
        return (
            sum(x for x, _ in xs) / len(xs),
            sum(y for _, y in xs) / len(xs),
        )
    return wx / wsum, wy / wsum


def ghost_taxels(
    active: np.ndarray, frame: Frame, alpha: float = DEFAULT_GHOST_ALPHA
) -> np.ndarray:
    """Flag active taxels that look like rectangle-completion sneak readings.

    (i, j) is a ghost candidate when some rectangle (i,j'), (i',j), (i',j')
    is fully active and this corner reads dimmer than alpha times the
    weakest of the other three: a sneak path crosses three taxels in series
    so it cannot outshine any of them.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    active = np.asarray(active, dtype=bool)
    rows, cols = active.shape
    out = np.zeros_like(active)
    counts = frame.counts
    for i in range(rows):
        for j in range(cols):
            if not active[i, j]:
                continue
            for i2 in range(rows):
                if i2 == i or not active[i2, j]:
                    continue
                for j2 in range(cols):
                    if j2 == j or not (active[i, j2] and active[i2, j2]):
                        continue
                    trio_min = min(counts[i, j2], counts[i2, j], counts[i2, j2])
                    if counts[i, j] < alpha * trio_min:
                        out[i, j] = True
                        break
                if out[i, j]:
                    break
    return out


def _resegment(members: list[tuple[int, int]], shape: tuple[int, int]):
    mask = np.zeros(shape, dtype=bool)
    for i, j in members:
        mask[i, j] = True
    return segment(mask)


def deghost(
    components: list[list[tuple[int, int]]],
    frame: Frame,
    alpha: float = DEFAULT_GHOST_ALPHA,
    threshold: int = DEFAULT_ACTIVE_THRESHOLD,
) -> list[tuple[list[tuple[int, int]], bool]]:
    """Attach ghost flags, splitting ghostly corners out of real contacts.

    A sneak reading can sit orthogonally adjacent to the contacts that cause
    it, so a component mixing ghostly and solid taxels is refined: the solid
    part and the ghostly part are re-segmented separately. Flags mark, they
    never delete: four genuine contacts can form the same rectangle, so
    downstream decides what a flag means.
    """
    active = detect_active(frame, threshold)
    ghosts = ghost_taxels(active, frame, alpha)
    refined: list[tuple[list[tuple[int, int]], bool]] = []
    for comp in components:
        ghost_members = [t for t in comp if ghosts[t]]
        solid_members = [t for t in comp if not ghosts[t]]
        if not ghost_members:
            refined.append((comp, False))
        elif not solid_members:
            refined.append((comp, True))
        else:
            for sub in _resegment(solid_members, frame.shape):
                refined.append((sub, False))
            for sub in _resegment(ghost_members, frame.shape):
                refined.append((sub, True))
    refined.sort(key=lambda pair: pair[0][0])
    return refined


@dataclass(frozen=True)
class ContactEvent:
    component_id: int
    taxels: tuple[tuple[int, int], ...]
    centroid_mm: tuple[float, float]
    force_n: float | None
    peak_reading: int
    ghost: bool
    t_us: int

    @property
    def n_taxels(self) -> int:
        return len(self.taxels)


def estimate_force(
    component: list[tuple[int, int]],
    frame: Frame,
    calibration: CalibrationTable,
) -> float:
    """Total force over the member taxels from the per-taxel linear fits."""
    total = 0.0
    skipped = 0
    for (i, j) in component:
        cal = calibration.get(i, j)
        if cal is None or not cal.valid or cal.slope <= 0:
            skipped += 1
            continue
        total += max(0.0, (float(frame.counts[i, j]) - cal.intercept) / cal.slope)
    if skipped:
        logger.warning("force estimate skipped %d uncalibrated taxels", skipped)
    return total


def extract_events(
    frame: Frame,
    config: SensorConfig,
    calibration: CalibrationTable | None = None,
    threshold: int = DEFAULT_ACTIVE_THRESHOLD,
    alpha: float = DEFAULT_GHOST_ALPHA,
) -> list[ContactEvent]:
    """Full pipeline for one frame: detect -> segment -> localize -> deghost."""
    active = detect_active(frame, threshold)
    flagged = deghost(segment(active), frame, alpha, threshold)
    events = []
    for idx, (comp, ghost) in enumerate(flagged):
        force = estimate_force(comp, frame, calibration) if calibration else None
        events.append(
            ContactEvent(
                component_id=idx,
                taxels=tuple(comp),
                centroid_mm=localize(comp, frame, config),
                force_n=force,
                peak_reading=int(max(frame.counts[i, j] for i, j in comp)),
                ghost=ghost,
                t_us=int(frame.t_start_us),
            )
        )
    return events


@dataclass(frozen=True)
class Push:
    centroid_mm: tuple[float, float]
    force_n: float | None
    event: ContactEvent


@dataclass(frozen=True)
class Grab:
    pass


def classify_gesture(
    events: list[ContactEvent],
    config: SensorConfig,
    grab_min_taxels: int = DEFAULT_GRAB_MIN_TAXELS,
    grab_cover_fraction: float = DEFAULT_GRAB_COVER_FRACTION,
):
    """Large-area contact is a Grab; otherwise the strongest contact Pushes.

    Ghost-flagged events never drive gestures. Returns Push, Grab, or None.
    """
    real = [e for e in events if not e.ghost]
    if not real:
        return None
    covered = sum(e.n_taxels for e in real)
    if any(e.n_taxels >= grab_min_taxels for e in real) or (
        covered >= grab_cover_fraction * config.n_taxels
    ):
        return Grab()
    strongest = max(real, key=lambda e: (e.force_n or 0.0, e.peak_reading))
    return Push(centroid_mm=strongest.centroid_mm, force_n=strongest.force_n, event=strongest)


EVENT_CSV_FIELDS = ("t_us", "id", "centroid_x_mm", "centroid_y_mm", "force_n", "ghost", "n_taxels")


def events_to_csv(events: list[ContactEvent]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(EVENT_CSV_FIELDS)
    for e in events:
        writer.writerow(
            [
                e.t_us,
                e.component_id,
                f"{e.centroid_mm[0]:.3f}",
                f"{e.centroid_mm[1]:.3f}",
                "" if e.force_n is None else f"{e.force_n:.4f}",
                int(e.ghost),
                e.n_taxels,
            ]
        )
    return buf.getvalue()


def write_events_csv(path: str, events: list[ContactEvent]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(events_to_csv(events))


def event_to_json(event: ContactEvent) -> dict:
    return {
        "id": event.component_id,
        "taxels": [list(t) for t in event.taxels],
        "centroid_mm": list(event.centroid_mm),
        "force_n": event.force_n,
        "peak_reading": event.peak_reading,
        "ghost": event.ghost,
        "t_us": event.t_us,
    }
