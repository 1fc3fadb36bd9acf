"""Grid-indexed codebook of optimised precoders and its persistence format.

Each grid cell pairs a quantised sine-space interval (centre theta, half-width
delta) with the omega that maximises the period objective for a canonical
path matching that interval. Entries store parameters only; weights are
reconstructed from (interval, omega), which is the single source of truth.

Serialised format (JSON, UTF-8, sorted keys, compact separators so identical
builds are byte-identical):

    {
      "alpha": float,
      "base_seed": int,
      "entries": [[theta_idx, delta_idx, theta_m, delta, omega,
                   objective_value, cell_seed, n_quad], ...]   # row-major
      "fingerprint": str,          # sha256 over the build scenario
      "format_version": 1,
      "grid": {"delta_max": f, "delta_step": f, "theta_lo": f,
               "theta_hi": f, "theta_step": f},
      "n_quad": int,
      "pso": {"bounds": [lo, hi], "cognitive": f, "inertia": f,
              "n_iterations": int, "n_particles": int, "social": f},
      "r_min": float,
      "tau": float
    }
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .geometry import AngularInterval, SensedState, point_at_direction
from .optimizer import ObjectiveSpec, PsoConfig, optimize_omega
from .precoder import Precoder, adaptive_precoder
from .seeding import derive_seed

FORMAT_VERSION = 1


class CodebookError(Exception):
    """Base class for codebook failures."""


class CodebookBuildError(CodebookError):
    """A cell optimisation failed during the build."""


class CodebookRangeError(CodebookError):
    """A queried interval falls outside the grid coverage."""


class CodebookVersionError(CodebookError):
    """Serialised codebook uses an unsupported format version."""


class CodebookFingerprintError(CodebookError):
    """Serialised codebook was built for a different scenario."""


class CodebookCorruptError(CodebookError):
    """Serialised codebook payload is unreadable or incomplete."""


@dataclass(frozen=True)
class CodebookGrid:
    """Quantisation of the (theta, delta) plane.

    Centres run from theta_range[0] to at least theta_range[1] in steps of
    theta_step; half-width rows run from 0 to at least delta_max in steps of
    delta_step.
    """

    theta_step: float
    delta_step: float
    theta_range: tuple[float, float]
    delta_max: float

    def __post_init__(self):
        if self.theta_step <= 0.0 or self.delta_step <= 0.0:
            raise ValueError("grid steps must be positive")
        lo, hi = self.theta_range
        if not (-1.0 < lo <= hi < 1.0):
            raise ValueError(f"theta range {self.theta_range!r} outside (-1, 1)")
        if self.delta_max < 0.0:
            raise ValueError(f"delta_max must be >= 0, got {self.delta_max!r}")

    def theta_values(self) -> list[float]:
        lo, hi = self.theta_range
        count = int(math.ceil((hi - lo) / self.theta_step - 1e-9)) + 1
        return [lo + i * self.theta_step for i in range(count)]

    def delta_values(self) -> list[float]:
        count = int(math.ceil(self.delta_max / self.delta_step - 1e-9)) + 1
        return [i * self.delta_step for i in range(count)]

    def contains(self, interval: AngularInterval) -> bool:
        lo, hi = self.theta_range
        eps = 1e-12
        return (
            lo - eps <= interval.theta_m <= hi + eps
            and interval.delta <= self.delta_max + eps
        )


@dataclass(frozen=True)
class CodebookEntry:
    interval: AngularInterval
    omega: float
    objective_value: float
    seed: int
    n_quad: int


@dataclass(frozen=True)
class Codebook:
    grid: CodebookGrid
    entries: dict[tuple[int, int], CodebookEntry]
    fingerprint: str
    tau: float
    alpha: float
    r_min: float
    n_quad: int
    base_seed: int
    pso: PsoConfig


def scenario_fingerprint(cfg, budget, tau: float, alpha: float, r_min: float) -> str:
    """Hash of the build scenario; guards against stale codebooks at lookup time."""
    text = (
        f"v{FORMAT_VERSION}|nt={cfg.n_antennas!r}|fc={cfg.carrier_freq!r}"
        f"|pt={budget.tx_power!r}|n0={budget.noise_psd!r}|b={budget.bandwidth!r}"
        f"|k={budget.absorption_coeff!r}|tau={tau!r}|alpha={alpha!r}|rmin={r_min!r}"
    )
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _template_perpendicular_distance(template: ObjectiveSpec) -> float:
    """Perpendicular distance from the BS to the template's motion line."""
    ox, oy = template.geom.origin
    px, py = template.state.position
    vx, vy = template.state.velocity
    speed = math.hypot(vx, vy)
    if speed > 0.0:
        return abs(vx * (py - oy) - vy * (px - ox)) / speed
    return math.hypot(px - ox, py - oy)


def _cell_spec(
    template: ObjectiveSpec, theta_m: float, delta: float, distance_scale: float
) -> ObjectiveSpec:
    """Canonical period spec whose path sweeps exactly [theta-delta, theta+delta].

    The target rides a line parallel to the array at the template's
    perpendicular distance, so the cell-centre range follows that geometry.
    """
    interval = AngularInterval(theta_m, delta)
    s0, s1 = interval.lo, interval.hi
    p0 = point_at_direction(
        template.geom, s0, distance_scale / math.sqrt(1.0 - s0 * s0)
    )
    p1 = point_at_direction(
        template.geom, s1, distance_scale / math.sqrt(1.0 - s1 * s1)
    )
    velocity = ((p1[0] - p0[0]) / template.tau, (p1[1] - p0[1]) / template.tau)
    state = SensedState(position=p0, velocity=velocity, epoch=0.0)
    return replace(template, state=state, interval=interval)


def _build_cell(args) -> tuple[int, int, CodebookEntry]:
    template, pso, ti, di, theta_m, delta, distance = args
    cell_seed = derive_seed("cell", pso.seed, ti, di)
    try:
        spec = _cell_spec(template, theta_m, delta, distance)
        result = optimize_omega(spec, replace(pso, seed=cell_seed))
    except Exception as exc:
        raise CodebookBuildError(
            f"cell ({ti}, {di}) at theta={theta_m!r} delta={delta!r} failed: {exc}"
        ) from exc
    entry = CodebookEntry(
        interval=spec.interval,
        omega=result.omega_star,
        objective_value=result.objective_value,
        seed=cell_seed,
        n_quad=template.n_quad,
    )
    return ti, di, entry


def build_codebook(
    grid: CodebookGrid,
    template: ObjectiveSpec,
    pso: PsoConfig,
    jobs: int = 1,
) -> Codebook:
    """Optimise every grid cell on a canonical scenario derived from the template.

    Cells are independent; each gets a deterministic seed derived from the PSO
    seed and its grid indices, so builds are reproducible for any job count.
    """
    distance = _template_perpendicular_distance(template)
    tasks = []
    for ti, theta_m in enumerate(grid.theta_values()):
        for di, delta in enumerate(grid.delta_values()):
            tasks.append((template, pso, ti, di, theta_m, delta, distance))

    entries: dict[tuple[int, int], CodebookEntry] = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for ti, di, entry in pool.map(_build_cell, tasks, chunksize=8):
                entries[(ti, di)] = entry
    else:
        for task in tasks:
            ti, di, entry = _build_cell(task)
            entries[(ti, di)] = entry

    fingerprint = scenario_fingerprint(
        template.cfg, template.budget, template.tau, template.alpha, template.r_min
    )
    return Codebook(
        grid=grid,
        entries=entries,
        fingerprint=fingerprint,
        tau=template.tau,
        alpha=template.alpha,
        r_min=template.r_min,
        n_quad=template.n_quad,
        base_seed=pso.seed,
        pso=pso,
    )


def lookup_indices(cb: Codebook, interval: AngularInterval) -> tuple[int, int]:
    """Grid indices serving a query: nearest centre, half-width rounded up."""
    if not cb.grid.contains(interval):
        raise CodebookRangeError(
            f"interval (theta={interval.theta_m!r}, delta={interval.delta!r}) "
            f"outside grid range; rebuild with a wider grid"
        )
    centres = cb.grid.theta_values()
    ti = 0
    for i, centre in enumerate(centres):
        if abs(centre - interval.theta_m) < abs(centres[ti] - interval.theta_m) - 1e-15:
            ti = i
    rows = cb.grid.delta_values()
    di = None
    target = interval.delta * (1.0 - 1e-12) - 1e-15
    for i, row in enumerate(rows):
        if row >= target:
            di = i
            break
    if di is None:  # grid rows always reach delta_max, guarded by contains()
        raise CodebookRangeError(f"no grid row covers half-width {interval.delta!r}")
    return ti, di


def lookup(cb: Codebook, interval: AngularInterval) -> CodebookEntry:
    """Entry whose beam covers the queried interval (coverage-preserving round-up)."""
    return cb.entries[lookup_indices(cb, interval)]


def entry_precoder(entry: CodebookEntry, cfg) -> Precoder:
    """Reconstruct the stored beam; parameters are the canonical representation."""
    return adaptive_precoder(entry.interval, entry.omega, cfg)


def _to_payload(cb: Codebook) -> dict:
    lo, hi = cb.grid.theta_range
    rows = [
        [
            ti,
            di,
            entry.interval.theta_m,
            entry.interval.delta,
            entry.omega,
            entry.objective_value,
            entry.seed,
            entry.n_quad,
        ]
        for (ti, di), entry in sorted(cb.entries.items())
    ]
    return {
        "format_version": FORMAT_VERSION,
        "fingerprint": cb.fingerprint,
        "grid": {
            "theta_step": cb.grid.theta_step,
            "delta_step": cb.grid.delta_step,
            "theta_lo": lo,
            "theta_hi": hi,
            "delta_max": cb.grid.delta_max,
        },
        "tau": cb.tau,
        "alpha": cb.alpha,
        "r_min": cb.r_min,
        "n_quad": cb.n_quad,
        "base_seed": cb.base_seed,
        "pso": {
            "bounds": list(cb.pso.bounds),
            "n_particles": cb.pso.n_particles,
            "n_iterations": cb.pso.n_iterations,
            "inertia": cb.pso.inertia,
            "cognitive": cb.pso.cognitive,
            "social": cb.pso.social,
        },
        "entries": rows,
    }


def save(cb: Codebook, sink) -> None:
    """Write the codebook to a path or text file object (deterministic bytes)."""
    text = json.dumps(_to_payload(cb), sort_keys=True, separators=(",", ":"))
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        Path(sink).write_text(text, encoding="utf-8")


def load(source, expected_fingerprint: str | None = None) -> Codebook:
    """Read a codebook from a path or file object, validating version and payload.

    When ``expected_fingerprint`` is given it must match the stored one, which
    ties the codebook to the active scenario.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise CodebookCorruptError(f"cannot read codebook: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CodebookCorruptError(f"codebook payload is not valid JSON: {exc}") from exc

    if not isinstance(payload, dict) or "format_version" not in payload:
        raise CodebookCorruptError("codebook payload missing format_version")
    if payload["format_version"] != FORMAT_VERSION:
        raise CodebookVersionError(
            f"unsupported codebook format {payload['format_version']!r}, "
            f"expected {FORMAT_VERSION}"
        )

    try:
        grid_raw = payload["grid"]
        grid = CodebookGrid(
            theta_step=grid_raw["theta_step"],
            delta_step=grid_raw["delta_step"],
            theta_range=(grid_raw["theta_lo"], grid_raw["theta_hi"]),
            delta_max=grid_raw["delta_max"],
        )
        pso_raw = payload["pso"]
        pso = PsoConfig(
            bounds=tuple(pso_raw["bounds"]),
            n_particles=pso_raw["n_particles"],
            n_iterations=pso_raw["n_iterations"],
            inertia=pso_raw["inertia"],
            cognitive=pso_raw["cognitive"],
            social=pso_raw["social"],
            seed=payload["base_seed"],
        )
        entries = {}
        for row in payload["entries"]:
            ti, di, theta_m, delta, omega, value, seed, n_quad = row
            entries[(ti, di)] = CodebookEntry(
                interval=AngularInterval(theta_m, delta),
                omega=omega,
                objective_value=value,
                seed=seed,
                n_quad=n_quad,
            )
        cb = Codebook(
            grid=grid,
            entries=entries,
            fingerprint=payload["fingerprint"],
            tau=payload["tau"],
            alpha=payload["alpha"],
            r_min=payload["r_min"],
            n_quad=payload["n_quad"],
            base_seed=payload["base_seed"],
            pso=pso,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CodebookCorruptError(f"codebook payload incomplete: {exc}") from exc

    if expected_fingerprint is not None and cb.fingerprint != expected_fingerprint:
        raise CodebookFingerprintError(
            "codebook was built for a different scenario "
            f"(stored {cb.fingerprint[:12]}..., expected {expected_fingerprint[:12]}...)"
        )
    return cb
