"""Randomized certification of the stability inequalities.

Every check draws a small random instance, evaluates both sides of one
inequality with the production solvers and records the margin
``rhs - lhs``. Instances are generated from counter-based seed substreams
(``SeedSequence([seed, check, trial, dim, t_index])``), so a report depends
only on the configuration, never on evaluation order or worker count.

Status of a report:

* ``pass``: margin >= 0;
* ``marginal``: the margin is negative but within the check's tolerance band;
* ``fail``: below the band;
* ``error``: a solver raised; the message is kept in the report.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .convex_order import check_convex_order
from .errors import CheckUnavailableForDim, ConfigError
from .extrapolation import extrapolate, g_functional, quantile_extrapolation
from .measures import DiscreteMeasure, validate_normalize
from .ot_core import geodesic_point, w2
from .projections import (
    DEFAULT_CONFIG,
    SolverConfig,
    backward_project,
    backward_project_1d,
    forward_project,
    forward_project_1d,
)
from .quantile1d import QuantileFunction, quantile_l2, quantile_of

logger = logging.getLogger(__name__)

# Order matters: the index of a check enters its seed substream.
CHECK_IDS = (
    "NONEXPANSIVE",
    "EXTRA_LIP_2T",
    "EXTRA_1D_BOTH",
    "GEO_INTERP_1D",
    "BACKWARD_1D_COMBINED",
    "FORWARD_1D",
    "BACKWARD_SQRT",
    "EXTRA_HOLDER",
    "DISSIPATIVE",
    "THM1_CONSISTENCY",
    "FORWARD_T_INVARIANCE",
    "STRONG_CONVEXITY_1D",
    "BACKWARD_FEASIBLE",
    "FORWARD_FEASIBLE_1D",
)

ONE_D_ONLY = frozenset(
    {
        "EXTRA_1D_BOTH",
        "GEO_INTERP_1D",
        "BACKWARD_1D_COMBINED",
        "FORWARD_1D",
        "THM1_CONSISTENCY",
        "STRONG_CONVEXITY_1D",
        "FORWARD_FEASIBLE_1D",
    }
)

USES_T = frozenset(
    {
        "EXTRA_LIP_2T",
        "EXTRA_1D_BOTH",
        "GEO_INTERP_1D",
        "EXTRA_HOLDER",
        "DISSIPATIVE",
        "THM1_CONSISTENCY",
        "STRONG_CONVEXITY_1D",
    }
)

# consistency checks compare two routes: rhs is the agreement tolerance
THM1_TOL = 1e-7
T_INVARIANCE_TOL_1D = 1e-6
T_INVARIANCE_TOL_CLOUD = 1e-5
T_INVARIANCE_PAIR = (2.0, 5.0)
DISSIPATIVE_TOL = 1e-8

# checks whose right-hand side is already a tolerance: no extra band
EXACT_RHS = frozenset(
    {"THM1_CONSISTENCY", "FORWARD_T_INVARIANCE", "BACKWARD_FEASIBLE", "FORWARD_FEASIBLE_1D"}
)

CSV_COLUMNS = ("check_id", "instance_seed", "dim", "t", "lhs", "rhs", "margin", "status")


@dataclass(frozen=True)
class HarnessConfig:
    """Configuration of a stability suite run.

    Attributes
    ----------
    seed : int
        Root seed; every instance seed is derived from it.
    trials : int
        Instances per (check, dim, t).
    dims : tuple of int
    atoms : (int, int)
        Inclusive range of atom counts per random measure.
    scale : float
        Atoms are drawn uniformly from ``[-scale, scale]^dim``.
    ts : tuple of float
        Extrapolation times, all greater than one.
    tol_report : float
        Tolerance band is ``tol_report * (1 + scale)``.
    checks : tuple of str, optional
        Enabled checks; all when ``None``.
    epsilons : tuple of float
        Relative perturbation amplitudes, cycled over trials.
    workers : int
        Worker processes; 1 evaluates in-process.
    """

    seed: int = 0
    trials: int = 200
    dims: Tuple[int, ...] = (1, 2)
    atoms: Tuple[int, int] = (1, 6)
    scale: float = 1.0
    ts: Tuple[float, ...] = (1.25, 2.0, 5.0)
    tol_report: float = 1e-7
    checks: Optional[Tuple[str, ...]] = None
    epsilons: Tuple[float, ...] = (1e-3, 1e-2, 1e-1)
    workers: int = 1
    holder_instances: int = 20

    def __post_init__(self):
        if int(self.trials) < 1:
            raise ConfigError("trials must be at least 1")
        if not self.dims or any(int(d) < 1 for d in self.dims):
            raise ConfigError("dims must be a non-empty list of positive integers")
        lo, hi = self.atoms
        if not 1 <= lo <= hi:
            raise ConfigError(f"invalid atom range {self.atoms}")
        if not self.scale > 0:
            raise ConfigError("scale must be positive")
        if not self.ts or any(not float(t) > 1 for t in self.ts):
            raise ConfigError("every t must exceed 1")
        if not self.tol_report >= 0:
            raise ConfigError("tol_report must be nonnegative")
        if self.checks is not None:
            unknown = set(self.checks) - set(CHECK_IDS)
            if unknown:
                raise ConfigError(f"unknown checks: {sorted(unknown)}")
        if not self.epsilons or any(not e > 0 for e in self.epsilons):
            raise ConfigError("epsilons must be positive")
        if int(self.workers) < 1:
            raise ConfigError("workers must be at least 1")

    @property
    def enabled(self) -> Tuple[str, ...]:
        return CHECK_IDS if self.checks is None else tuple(
            c for c in CHECK_IDS if c in self.checks
        )

    @property
    def band(self) -> float:
        return self.tol_report * (1.0 + self.scale)

    def to_dict(self) -> dict:
        out = asdict(self)
        for k in ("dims", "atoms", "ts", "epsilons", "checks"):
            if out[k] is not None:
                out[k] = list(out[k])
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "HarnessConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        kw = dict(obj)
        for k in ("dims", "atoms", "ts", "epsilons", "checks"):
            if kw.get(k) is not None:
                kw[k] = tuple(kw[k])
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class InequalityReport:
    check_id: str
    instance_seed: int
    dim: int
    t: Optional[float]
    lhs: float
    rhs: float
    margin: float
    status: str
    params: Dict[str, float] = field(default_factory=dict)
    message: str = ""

    def row(self) -> list:
        f = lambda v: "" if v is None else format(float(v), ".17g")
        return [
            self.check_id,
            str(self.instance_seed),
            str(self.dim),
            f(self.t),
            f(self.lhs),
            f(self.rhs),
            f(self.margin),
            self.status,
        ]


# --------------------------------------------------------------------------
# random instances
# --------------------------------------------------------------------------


def _random_measure(rng, dim, n_atoms, scale, uniform_weights=False) -> DiscreteMeasure:
    atoms = rng.uniform(-scale, scale, size=(n_atoms, dim))
    if uniform_weights:
        weights = np.full(n_atoms, 1.0 / n_atoms)
    else:
        weights = rng.dirichlet(np.ones(n_atoms))
    return validate_normalize(atoms, weights)


def gen_random_measure(dim: int, n_atoms: int, scale: float = 1.0, seed=0) -> DiscreteMeasure:
    """Random measure with atoms uniform in ``[-scale, scale]^dim``.

    Weights are a flat Dirichlet draw. ``seed`` is anything accepted by
    :func:`numpy.random.default_rng`.
    """
    if n_atoms < 1:
        raise ValueError("n_atoms must be at least 1")
    return _random_measure(np.random.default_rng(seed), dim, n_atoms, scale)


def perturb(m: DiscreteMeasure, eps: float, rng) -> DiscreteMeasure:
    """Jitter atoms by up to ``eps`` per coordinate and weights by a relative ``eps``."""
    atoms = m.atoms + rng.uniform(-eps, eps, size=m.atoms.shape)
    weights = m.weights * np.exp(rng.uniform(-eps, eps, size=m.n))
    return validate_normalize(atoms, weights)


def instance_seed(root: int, check_id: str, trial: int, dim: int, t_index: int) -> int:
    ss = np.random.SeedSequence([root, CHECK_IDS.index(check_id), trial, dim, t_index])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def make_instance(check_id: str, seed: int, dim: int, cfg: HarnessConfig, trial: int = 0) -> dict:
    """Measures needed by ``check_id``, drawn from ``seed``."""
    rng = np.random.default_rng(seed)
    lo, hi = cfg.atoms
    eps = cfg.epsilons[trial % len(cfg.epsilons)] * cfg.scale
    draw = lambda: _random_measure(rng, dim, int(rng.integers(lo, hi + 1)), cfg.scale)
    if check_id == "FORWARD_T_INVARIANCE" and dim > 1:
        n = int(rng.integers(max(lo, 2), hi + 1))
        mu = _random_measure(rng, dim, n, cfg.scale, uniform_weights=True)
        nu = _random_measure(rng, dim, n, cfg.scale, uniform_weights=True)
        return {"mu": mu, "nu": nu, "eps": eps}
    a, b = draw(), draw()
    inst = {"eps": eps}
    if check_id in ("NONEXPANSIVE",):
        inst.update(mu=a, nu=b, mu_t=perturb(a, eps, rng))
    elif check_id in ("EXTRA_LIP_2T",):
        inst.update(nu0=a, nu1=b, nu1_t=perturb(b, eps, rng))
    elif check_id in ("EXTRA_HOLDER",):
        inst.update(nu0=a, nu1=b, nu0_t=perturb(a, eps, rng))
    elif check_id in ("EXTRA_1D_BOTH", "GEO_INTERP_1D"):
        inst.update(nu0=a, nu1=b, nu0_t=perturb(a, eps, rng), nu1_t=perturb(b, eps, rng))
    elif check_id in ("BACKWARD_1D_COMBINED", "FORWARD_1D", "BACKWARD_SQRT"):
        inst.update(mu=a, nu=b, mu_t=perturb(a, eps, rng), nu_t=perturb(b, eps, rng))
    elif check_id in ("DISSIPATIVE", "THM1_CONSISTENCY"):
        inst.update(nu0=a, nu1=b)
    elif check_id == "STRONG_CONVEXITY_1D":
        inst.update(nu0=a, nu1=b, rho=draw())
    else:
        inst.update(mu=a, nu=b)
    return inst


# --------------------------------------------------------------------------
# checks
# --------------------------------------------------------------------------


def _quantile_gap_sq(breaks, values, rho) -> float:
    """``int_0^1 |Y - X_rho|^2`` for a step function ``Y`` on ``breaks``."""
    q = QuantileFunction(np.asarray(breaks, float), np.asarray(values, float), False)
    d = quantile_l2(q, quantile_of(rho))
    return d * d


def _evaluate(check_id, inst, t, solver: SolverConfig):
    """Return ``(lhs, rhs, params)`` for one check."""
    if check_id == "NONEXPANSIVE":
        mu, mu_t, nu = inst["mu"], inst["mu_t"], inst["nu"]
        p = backward_project(mu, nu, solver).projected
        pt = backward_project(mu_t, nu, solver).projected
        return w2(p, pt), w2(mu, mu_t), {}
    if check_id == "EXTRA_LIP_2T":
        nu0, nu1, nu1_t = inst["nu0"], inst["nu1"], inst["nu1_t"]
        e = extrapolate(nu0, nu1, t, solver)
        et = extrapolate(nu0, nu1_t, t, solver)
        return w2(e, et), 2.0 * t * w2(nu1, nu1_t), {}
    if check_id == "EXTRA_1D_BOTH":
        nu0, nu1, nu0_t, nu1_t = inst["nu0"], inst["nu1"], inst["nu0_t"], inst["nu1_t"]
        lhs = w2(extrapolate(nu0, nu1, t), extrapolate(nu0_t, nu1_t, t))
        return lhs, (t - 1.0) * w2(nu0, nu0_t) + t * w2(nu1, nu1_t), {}
    if check_id == "GEO_INTERP_1D":
        s = 1.0 / t
        nu0, nu1, nu0_t, nu1_t = inst["nu0"], inst["nu1"], inst["nu0_t"], inst["nu1_t"]
        g = geodesic_point(nu0, nu1, s)
        gt = geodesic_point(nu0_t, nu1_t, s)
        return w2(g, gt), (1.0 - s) * w2(nu0, nu0_t) + s * w2(nu1, nu1_t), {"s": s}
    if check_id == "BACKWARD_1D_COMBINED":
        mu, mu_t, nu, nu_t = inst["mu"], inst["mu_t"], inst["nu"], inst["nu_t"]
        lhs = w2(backward_project_1d(mu, nu), backward_project_1d(mu_t, nu_t))
        return lhs, w2(mu, mu_t) + w2(nu, nu_t), {}
    if check_id == "FORWARD_1D":
        mu, mu_t, nu, nu_t = inst["mu"], inst["mu_t"], inst["nu"], inst["nu_t"]
        lhs = w2(forward_project_1d(mu, nu), forward_project_1d(mu_t, nu_t))
        return lhs, 2.0 * w2(nu, nu_t) + w2(mu, mu_t), {}
    if check_id == "BACKWARD_SQRT":
        mu, mu_t, nu, nu_t = inst["mu"], inst["mu_t"], inst["nu"], inst["nu_t"]
        p = backward_project(mu, nu, solver).projected
        pt = backward_project(mu_t, nu_t, solver).projected
        d_nn = w2(nu, nu_t)
        rhs = w2(mu, mu_t) + math.sqrt((w2(mu, nu) + w2(mu, nu_t)) * d_nn)
        return w2(p, pt), rhs, {}
    if check_id == "EXTRA_HOLDER":
        # squared distances on the left, as in the estimate itself
        nu0, nu0_t, nu1 = inst["nu0"], inst["nu0_t"], inst["nu1"]
        d = w2(extrapolate(nu0, nu1, t, solver), extrapolate(nu0_t, nu1, t, solver))
        rhs = t * (t - 1.0) * (w2(nu1, nu0) + w2(nu1, nu0_t)) * w2(nu0, nu0_t)
        return d * d, rhs, {}
    if check_id == "DISSIPATIVE":
        nu0, nu1 = inst["nu0"], inst["nu1"]
        e = extrapolate(nu0, nu1, t, solver)
        d01 = w2(nu0, nu1)
        lhs0, rhs0 = w2(nu0, e), t * d01
        lhs1, rhs1 = w2(nu1, e), (t - 1.0) * d01
        params = {"margin_from_nu0": rhs0 - lhs0, "margin_from_nu1": rhs1 - lhs1}
        # report the binding inequality
        if rhs0 - lhs0 <= rhs1 - lhs1:
            return lhs0, rhs0, params
        return lhs1, rhs1, params
    if check_id == "THM1_CONSISTENCY":
        nu0, nu1 = inst["nu0"], inst["nu1"]
        a = extrapolate(nu0, nu1, t, solver, method="pav")
        b = extrapolate(nu0, nu1, t, solver, method="reduction")
        return w2(a, b), THM1_TOL, {}
    if check_id == "FORWARD_T_INVARIANCE":
        mu, nu = inst["mu"], inst["nu"]
        t1, t2 = T_INVARIANCE_PAIR
        f1 = forward_project(mu, nu, solver, t=t1)
        f2 = forward_project(mu, nu, solver, t=t2)
        tol = T_INVARIANCE_TOL_1D if mu.dim == 1 else T_INVARIANCE_TOL_CLOUD
        return w2(f1, f2), tol, {"t1": t1, "t2": t2}
    if check_id == "STRONG_CONVEXITY_1D":
        nu0, nu1, rho = inst["nu0"], inst["nu1"], inst["rho"]
        breaks, y = quantile_extrapolation(nu0, nu1, t)
        e = extrapolate(nu0, nu1, t)
        lhs = 0.5 * _quantile_gap_sq(breaks, y, rho) + g_functional(e, nu0, nu1, t)
        return lhs, g_functional(rho, nu0, nu1, t), {}
    if check_id == "BACKWARD_FEASIBLE":
        mu, nu = inst["mu"], inst["nu"]
        p = backward_project(mu, nu, solver).projected
        r = check_convex_order(p, nu, solver.tol_order)
        return r.violation, r.tol, {"dominated": float(r.dominated)}
    if check_id == "FORWARD_FEASIBLE_1D":
        mu, nu = inst["mu"], inst["nu"]
        f = forward_project(mu, nu, solver)
        r = check_convex_order(mu, f, solver.tol_order)
        return r.violation, r.tol, {"dominated": float(r.dominated)}
    raise ValueError(f"unknown check {check_id!r}")


def _band(check_id, cfg: HarnessConfig) -> float:
    if check_id == "DISSIPATIVE":
        return DISSIPATIVE_TOL
    if check_id in EXACT_RHS:
        return 0.0
    return cfg.band


def _status(margin, band) -> str:
    if not math.isfinite(margin):
        return "error"
    if margin >= 0:
        return "pass"
    return "marginal" if margin >= -band else "fail"


def check_inequality(
    check_id: str,
    instance: dict,
    t: Optional[float] = None,
    seed: int = 0,
    cfg: Optional[HarnessConfig] = None,
    solver: SolverConfig = DEFAULT_CONFIG,
) -> InequalityReport:
    """Evaluate one inequality on one instance.

    Parameters
    ----------
    instance : dict
        Measures keyed by role (``mu``, ``nu``, ``nu0``, ``nu1``, with a
        ``_t`` suffix for perturbed copies), as built by :func:`make_instance`.
    t : float, optional
        Required by checks in :data:`USES_T`.

    Raises
    ------
    CheckUnavailableForDim
        A one-dimensional check was given higher-dimensional measures.
    """
    if check_id not in CHECK_IDS:
        raise ValueError(f"unknown check {check_id!r}")
    cfg = cfg or HarnessConfig()
    measures = [v for v in instance.values() if isinstance(v, DiscreteMeasure)]
    dim = measures[0].dim
    if check_id in ONE_D_ONLY and dim != 1:
        raise CheckUnavailableForDim(f"{check_id} is defined in dimension one only")
    if check_id in USES_T:
        if t is None or not t > 1:
            raise ConfigError(f"{check_id} needs t > 1")
        t = float(t)
    else:
        t = None
    try:
        lhs, rhs, params = _evaluate(check_id, instance, t, solver)
        lhs, rhs = float(lhs), float(rhs)
        margin = rhs - lhs
        status = _status(margin, _band(check_id, cfg))
        message = ""
    except Exception as exc:  # recorded, never dropped
        logger.warning("%s failed on seed %d: %s", check_id, seed, exc)
        lhs = rhs = margin = float("nan")
        params, status, message = {}, "error", f"{type(exc).__name__}: {exc}"
    return InequalityReport(check_id, seed, dim, t, lhs, rhs, margin, status, params, message)


# --------------------------------------------------------------------------
# suite
# --------------------------------------------------------------------------


def _tasks(cfg: HarnessConfig):
    for check_id in cfg.enabled:
        for dim in cfg.dims:
            if check_id in ONE_D_ONLY and dim != 1:
                continue
            t_list = list(enumerate(cfg.ts)) if check_id in USES_T else [(0, None)]
            for t_index, t in t_list:
                for trial in range(cfg.trials):
                    yield check_id, trial, dim, t_index, t


def _run_task(args):
    cfg, check_id, trial, dim, t_index, t = args
    seed = instance_seed(cfg.seed, check_id, trial, dim, t_index)
    inst = make_instance(check_id, seed, dim, cfg, trial)
    return check_inequality(check_id, inst, t, seed, cfg)


@dataclass
class SuiteReport:
    reports: list
    summary: dict

    @property
    def passed(self) -> bool:
        return bool(self.summary["suite_pass"])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.reports:
            w.writerow(r.row())
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(self.summary, indent=2, sort_keys=True, allow_nan=False) + "\n"

    def write(self, out_dir) -> Tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / "report.csv"
        json_path = out / "summary.json"
        csv_path.write_text(self.to_csv())
        json_path.write_text(self.to_json())
        return csv_path, json_path


def _finite_or_none(x):
    return float(x) if x is not None and math.isfinite(x) else None


def _summarize(reports, cfg: HarnessConfig, holder: Optional[dict]) -> dict:
    checks = {}
    for cid in cfg.enabled:
        rs = [r for r in reports if r.check_id == cid]
        if not rs:
            continue
        margins = np.array([r.margin for r in rs if math.isfinite(r.margin)])
        counts = {s: sum(r.status == s for r in rs) for s in ("pass", "marginal", "fail", "error")}
        checks[cid] = {
            "count": len(rs),
            "min_margin": _finite_or_none(margins.min()) if margins.size else None,
            "median_margin": _finite_or_none(np.median(margins)) if margins.size else None,
            **counts,
        }
    trend = {}
    for t in cfg.ts:
        rs = [r for r in reports if r.check_id == "EXTRA_LIP_2T" and r.t == float(t)]
        rs = [r for r in rs if math.isfinite(r.margin)]
        if rs:
            ratios = [r.lhs / r.rhs for r in rs if r.rhs > 0]
            trend[format(float(t), "g")] = {
                "min_margin": min(r.margin for r in rs),
                "median_margin": float(np.median([r.margin for r in rs])),
                "median_lhs_over_rhs": float(np.median(ratios)) if ratios else None,
            }
    failed = sum(c["fail"] + c["error"] for c in checks.values())
    return {
        "suite_pass": failed == 0,
        "total_reports": len(reports),
        "config": cfg.to_dict(),
        "checks": checks,
        "extra_lip_2t_trend": trend,
        "forward_holder_trend": holder,
    }


def forward_holder_trend(cfg: HarnessConfig, solver: SolverConfig = DEFAULT_CONFIG) -> dict:
    """Log-log slope of forward-projection discrepancy against perturbation size.

    For each amplitude ``eps`` in ``cfg.epsilons``, ``cfg.holder_instances``
    one-dimensional pairs ``(mu, nu)`` are drawn, ``nu`` is jittered and the
    median of ``W2(forward(mu, nu), forward(mu, nu~))`` and of ``W2(nu, nu~)``
    recorded. The fitted slope is reported only; no bound is asserted.
    """
    lo, hi = cfg.atoms
    pert, disc = [], []
    for k, eps in enumerate(cfg.epsilons):
        ps, ds = [], []
        for i in range(cfg.holder_instances):
            rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 9999, k, i]))
            mu = _random_measure(rng, 1, int(rng.integers(lo, hi + 1)), cfg.scale)
            nu = _random_measure(rng, 1, max(hi, 2), cfg.scale)
            nu_t = perturb(nu, eps * cfg.scale, rng)
            ps.append(w2(nu, nu_t))
            ds.append(w2(forward_project(mu, nu, solver), forward_project(mu, nu_t, solver)))
        pert.append(float(np.median(ps)))
        disc.append(float(np.median(ds)))
    ok = [i for i in range(len(pert)) if pert[i] > 0 and disc[i] > 0]
    slope = None
    if len(ok) >= 2:
        slope = float(
            np.polyfit(np.log([pert[i] for i in ok]), np.log([disc[i] for i in ok]), 1)[0]
        )
    return {
        "epsilons": list(cfg.epsilons),
        "median_perturbation": pert,
        "median_discrepancy": disc,
        "loglog_slope": slope,
    }


def run_suite(cfg: HarnessConfig, progress: Optional[Callable[[int], None]] = None) -> SuiteReport:
    """Run every enabled check and aggregate the results.

    Reports are sorted by ``(check_id, instance_seed)``; the suite passes
    when no report has status ``fail`` or ``error``.
    """
    tasks = [(cfg,) + task for task in _tasks(cfg)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            reports = list(pool.map(_run_task, tasks, chunksize=16))
    else:
        reports = []
        for i, task in enumerate(tasks):
            reports.append(_run_task(task))
            if progress is not None:
                progress(i + 1)
    reports.sort(key=lambda r: (r.check_id, r.instance_seed))
    holder = forward_holder_trend(cfg)
    return SuiteReport(reports, _summarize(reports, cfg, holder))


def read_report_csv(text: str) -> list:
    """Parse a ``report.csv`` back into dictionaries (for validation)."""
    rows = list(csv.DictReader(io.StringIO(text)))
    for r in rows:
        if tuple(r) != CSV_COLUMNS:
            raise ValueError("unexpected CSV columns")
    return rows


__all__ = [
    "CHECK_IDS",
    "ONE_D_ONLY",
    "USES_T",
    "HarnessConfig",
    "InequalityReport",
    "SuiteReport",
    "gen_random_measure",
    "perturb",
    "instance_seed",
    "make_instance",
    "check_inequality",
    "run_suite",
    "forward_holder_trend",
    "read_report_csv",
]
