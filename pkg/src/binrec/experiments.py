"""Monte-Carlo phase-transition harness.

Sweeps a (k/N, m/N) grid, runs the requested recovery programs on freshly
drawn matrix/signal pairs, and aggregates success rates per cell.  Every
trial seeds its own counter-based generator from a mix of the master seed
and the (cell_i, cell_j, trial) coordinates, so results are identical under
any execution order or degree of parallelism.
"""

from __future__ import annotations

import dataclasses
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ensembles import EnsembleConfig, gen_matrix, gen_noise, gen_sparse_binary
from .optim import SolverFailure
from .recovery import RecoveryProblem, recovery_success, solve

HARNESS_PROGRAMS = ("box_bp", "mibi_bp", "box_ls", "robust_box_bp")

CSV_HEADER = "N,m,k,trial,program,ensemble,mu,seed,success,both,neither,l2_error,solver_status"


def _mix(*parts: int) -> int:
    """splitmix64 over the concatenated parts; collision-resistant enough
    that distinct (master, i, j, t) tuples get independent Philox keys."""
    h = 0
    for p in parts:
        h = (h + int(p) + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
        h = ((h ^ (h >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
        h = ((h ^ (h >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
        h = h ^ (h >> 31)
    return h


def trial_seed(master_seed: int, cell_i: int, cell_j: int, t: int) -> int:
    return _mix(master_seed, cell_i, cell_j, t)


@dataclass
class ExperimentConfig:
    N: int
    k_fractions: list
    m_fractions: list
    trials: int
    ensemble: EnsembleConfig
    programs: tuple = ("box_bp",)
    success_tol: float = 1e-4
    master_seed: int = 0
    record_simultaneous: bool = False
    noise_eps: float | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("need at least one trial per cell")
        for fr in (self.k_fractions, self.m_fractions):
            if any(not 0 < f <= 1 for f in fr):
                raise ValueError("grid fractions must lie in (0, 1]")
            if any(b <= a for a, b in zip(fr, fr[1:])):
                raise ValueError("grid fractions must be strictly increasing")
        bad = set(self.programs) - set(HARNESS_PROGRAMS)
        if bad:
            raise ValueError(f"unsupported programs: {sorted(bad)}")


@dataclass
class TrialRecord:
    N: int
    m: int
    k: int
    trial: int
    program: str
    ensemble: str
    mu: float
    seed: int
    success: bool
    both: bool | None
    neither: bool | None
    l2_error: float
    solver_status: str


@dataclass
class CellStats:
    trials: int
    successes: dict = field(default_factory=dict)
    both_count: int = 0
    neither_count: int = 0
    mean_error: dict = field(default_factory=dict)


@dataclass
class PhaseDiagram:
    config: ExperimentConfig
    cells: dict  # (k_fraction, m_fraction) -> CellStats
    records: list  # TrialRecord, in grid-then-trial order

    def rate(self, k_fraction: float, m_fraction: float, program: str) -> float:
        cell = self.cells[(k_fraction, m_fraction)]
        return cell.successes[program] / cell.trials


def _grid_sizes(N: int, fractions) -> list:
    return [int(round(f * N)) for f in fractions]


def _solve_one(program, A, b, eta, tol_x0, x0_dense):
    """Run one program, never raising; returns (success, error, status, x_hat)."""
    try:
        rep = solve(program, RecoveryProblem(A, b, eta=eta if program == "robust_box_bp" else None))
    except (SolverFailure, ValueError) as exc:
        return False, float("nan"), f"error:{type(exc).__name__}", None
    if rep.x_hat is None:
        return False, float("nan"), rep.solver_status, None
    err = float(np.linalg.norm(rep.x_hat - x0_dense))
    return recovery_success(rep.x_hat, x0_dense, tol_x0), err, rep.solver_status, rep.x_hat


def run_cell(config: ExperimentConfig, cell_i: int, cell_j: int) -> list:
    """All trial records of one grid cell, independent of every other cell."""
    N = config.N
    k = _grid_sizes(N, config.k_fractions)[cell_i]
    m = _grid_sizes(N, config.m_fractions)[cell_j]
    eta = config.noise_eps if config.noise_eps is not None else 0.0
    records = []
    for t in range(config.trials):
        seed = trial_seed(config.master_seed, cell_i, cell_j, t)
        ens = dataclasses.replace(config.ensemble, m=m, N=N, seed=_mix(seed, 0))
        A = gen_matrix(ens)
        x0 = gen_sparse_binary(N, k, seed=_mix(seed, 1))
        x0d = x0.dense()
        b = A.entries @ x0d
        if config.noise_eps:
            b = b + gen_noise(m, config.noise_eps, seed=_mix(seed, 2))
        if config.record_simultaneous:
            b_mirror = A.entries @ (1.0 - x0d)
        for program in config.programs:
            ok, err, status, _ = _solve_one(program, A, b, eta, config.success_tol, x0d)
            both = neither = None
            if config.record_simultaneous:
                ok2, _, _, _ = _solve_one(program, A, b_mirror, eta,
                                          config.success_tol, 1.0 - x0d)
                both = ok and ok2
                neither = not ok and not ok2
            records.append(TrialRecord(N, m, k, t, program, ens.kind, ens.mu, seed,
                                       ok, both, neither, err, status))
    return records


def _worker(args):
    return run_cell(*args)


def _thread_cap() -> int:
    env = os.environ.get("BINREC_THREADS", "")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_phase_transition(config: ExperimentConfig) -> PhaseDiagram:
    tasks = [(config, i, j)
             for i in range(len(config.k_fractions))
             for j in range(len(config.m_fractions))]
    workers = min(_thread_cap(), len(tasks))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_cell = list(pool.map(_worker, tasks))
    else:
        per_cell = [run_cell(*t) for t in tasks]

    cells = {}
    records = []
    for (_, i, j), cell_records in zip(tasks, per_cell):
        key = (config.k_fractions[i], config.m_fractions[j])
        stats = CellStats(trials=config.trials,
                          successes={p: 0 for p in config.programs},
                          mean_error={p: 0.0 for p in config.programs})
        errs = {p: [] for p in config.programs}
        for r in cell_records:
            stats.successes[r.program] += int(r.success)
            if r.both:
                stats.both_count += 1
            if r.neither:
                stats.neither_count += 1
            if np.isfinite(r.l2_error):
                errs[r.program].append(r.l2_error)
        for p in config.programs:
            stats.mean_error[p] = float(np.mean(errs[p])) if errs[p] else float("nan")
        cells[key] = stats
        records.extend(cell_records)
    return PhaseDiagram(config, cells, records)


# --- CSV ------------------------------------------------------------------

def _fmt_bool(v) -> str:
    return "" if v is None else str(int(v))


def write_csv(diagram: PhaseDiagram, path: str) -> None:
    """One row per (cell, program, trial), plus a sidecar .config.json echo."""
    try:
        with open(path, "w") as f:
            f.write(CSV_HEADER + "\n")
            for r in diagram.records:
                f.write(f"{r.N},{r.m},{r.k},{r.trial},{r.program},{r.ensemble},"
                        f"{r.mu:.17g},{r.seed},{int(r.success)},{_fmt_bool(r.both)},"
                        f"{_fmt_bool(r.neither)},{r.l2_error:.17g},{r.solver_status}\n")
        cfg = dataclasses.asdict(diagram.config)
        cfg["programs"] = list(cfg["programs"])
        with open(path + ".config.json", "w") as f:
            json.dump(cfg, f, indent=2)
            f.write("\n")
    except OSError as exc:
        raise OSError(f"writing phase-transition CSV to {path!r}: {exc}") from exc


def read_csv(path: str) -> list:
    """Parse back the rows written by write_csv, as TrialRecord objects."""
    records = []
    try:
        with open(path) as f:
            header = f.readline().rstrip("\n")
            if header != CSV_HEADER:
                raise ValueError(f"unexpected CSV header in {path!r}: {header}")
            for line in f:
                c = line.rstrip("\n").split(",")
                if len(c) != 13:
                    raise ValueError(f"malformed row in {path!r}: {line!r}")
                records.append(TrialRecord(
                    int(c[0]), int(c[1]), int(c[2]), int(c[3]), c[4], c[5],
                    float(c[6]), int(c[7]), bool(int(c[8])),
                    None if c[9] == "" else bool(int(c[9])),
                    None if c[10] == "" else bool(int(c[10])),
                    float(c[11]), c[12]))
    except OSError as exc:
        raise OSError(f"reading phase-transition CSV from {path!r}: {exc}") from exc
    return records


# --- SVG heatmap ----------------------------------------------------------

def render_heatmap(diagram: PhaseDiagram, program: str, path: str,
                   cell_px: int = 24) -> None:
    """Standalone SVG: one grayscale rect per cell (white = rate 1, black = 0),
    k/N on the horizontal axis, m/N on the vertical axis, plus a legend."""
    if program not in diagram.config.programs:
        raise ValueError(f"program {program!r} not present in this diagram")
    kf = diagram.config.k_fractions
    mf = diagram.config.m_fractions
    nx, ny = len(kf), len(mf)
    margin_l, margin_b, margin_t, margin_r = 60, 50, 20, 90
    w = margin_l + nx * cell_px + margin_r
    h = margin_t + ny * cell_px + margin_b
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>',
    ]
    for j, m_frac in enumerate(mf):
        # larger m drawn higher up
        y = margin_t + (ny - 1 - j) * cell_px
        for i, k_frac in enumerate(kf):
            rate = diagram.rate(k_frac, m_frac, program)
            shade = int(round(255 * rate))
            fill = f"rgb({shade},{shade},{shade})"
            x = margin_l + i * cell_px
            parts.append(f'<rect x="{x}" y="{y}" width="{cell_px}" height="{cell_px}" '
                         f'fill="{fill}" stroke="gray" stroke-width="0.5"/>')
    ax_y = margin_t + ny * cell_px
    parts.append(f'<text x="{margin_l + nx * cell_px / 2:.0f}" y="{ax_y + 35}" '
                 f'text-anchor="middle" font-size="13">k/N</text>')
    parts.append(f'<text x="15" y="{margin_t + ny * cell_px / 2:.0f}" text-anchor="middle" '
                 f'font-size="13" transform="rotate(-90 15 {margin_t + ny * cell_px / 2:.0f})">m/N</text>')
    for frac, i in ((kf[0], 0), (kf[-1], nx - 1)):
        x = margin_l + i * cell_px + cell_px / 2
        parts.append(f'<text x="{x:.0f}" y="{ax_y + 15}" text-anchor="middle" '
                     f'font-size="10">{frac:g}</text>')
    for frac, j in ((mf[0], 0), (mf[-1], ny - 1)):
        y = margin_t + (ny - 1 - j) * cell_px + cell_px / 2
        parts.append(f'<text x="{margin_l - 8}" y="{y:.0f}" text-anchor="end" '
                     f'font-size="10" dominant-baseline="middle">{frac:g}</text>')
    # legend: vertical grayscale ramp with endpoint labels
    lx = margin_l + nx * cell_px + 20
    steps = 32
    lh = min(ny * cell_px, 160)
    for s in range(steps):
        shade = int(round(255 * (1 - s / (steps - 1))))
        y = margin_t + s * lh / steps
        parts.append(f'<rect x="{lx}" y="{y:.2f}" width="14" height="{lh / steps + 0.5:.2f}" '
                     f'fill="rgb({shade},{shade},{shade})"/>')
    parts.append(f'<rect x="{lx}" y="{margin_t}" width="14" height="{lh:.0f}" '
                 f'fill="none" stroke="black" stroke-width="0.5"/>')
    parts.append(f'<text x="{lx + 20}" y="{margin_t + 5}" font-size="10">rate 1</text>')
    parts.append(f'<text x="{lx + 20}" y="{margin_t + lh:.0f}" font-size="10">rate 0</text>')
    parts.append(f'<text x="{lx}" y="{margin_t - 6}" font-size="11">{program}</text>')
    parts.append("</svg>")
    try:
        with open(path, "w") as f:
            f.write("\n".join(parts) + "\n")
    except OSError as exc:
        raise OSError(f"writing heatmap SVG to {path!r}: {exc}") from exc


# --- presets --------------------------------------------------------------

def paper_scale_config(master_seed: int = 0) -> ExperimentConfig:
    """The full protocol: N=500, 0.01-spaced fractions, 25 trials per cell,
    unnormalized biased Rademacher matrices (entries in {0, 2}).  Expect a
    multi-hour run; CI uses desk_scale_config instead."""
    grid = [i / 100.0 for i in range(1, 101)]
    ens = EnsembleConfig(kind="biased", m=1, N=1, mu=1.0, sigma=1.0,
                         lambda_bound=1.0, base_dist="rademacher_scaled")
    return ExperimentConfig(N=500, k_fractions=grid, m_fractions=grid, trials=25,
                            ensemble=ens, programs=("box_bp",),
                            master_seed=master_seed)


def desk_scale_config(master_seed: int = 0, kind: str = "biased") -> ExperimentConfig:
    """CI default: N=100 on a 0.1-spaced 10x10 grid with 25 trials."""
    grid = [i / 10.0 for i in range(1, 11)]
    if kind == "biased":
        ens = EnsembleConfig(kind="biased", m=1, N=1, mu=1.0, sigma=1.0,
                             lambda_bound=1.0, base_dist="rademacher_scaled")
    else:
        ens = EnsembleConfig(kind=kind, m=1, N=1)
    return ExperimentConfig(N=100, k_fractions=grid, m_fractions=grid, trials=25,
                            ensemble=ens, programs=("box_bp",),
                            master_seed=master_seed)
