"""
simcli — scenarios, analysis reports, simulation and the command line
=====================================================================
Loads a scenario JSON, runs the design pipeline (leader selection,
decompositions, gains, consensus weights), simulates the plant together
with the observer network and writes per-node traces as CSV.

Every node also carries its estimation error, propagated by the same
update laws with zero innovation (proposed mode) or by the naive error
recursion (naive mode). The err_norm column is read from that channel, so
it is not swamped by round-off against exponentially growing states.

Usage:
    distfobs check scenarios/motivating.json
    distfobs analyze scenarios/motivating.json > report.json
    distfobs simulate scenarios/motivating.json --steps 200 --output trace.csv
    distfobs simulate scenarios/motivating.json --mode naive --steps 20
"""

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from . import __version__
from .core.digest import atomic_write, file_digest, json_digest, to_json
from .core.graphkit import is_strongly_connected
from .core.numkit import DEFAULT_TOLERANCES, ToleranceConfig
from .decomp import (
    FunctionalDecomposition,
    StaircaseDecomposition,
    build_functional_decomposition,
    reduced_measurements,
    staircase_for,
)
from .exception import (
    DecompositionFailed,
    DistFObsError,
    IoError,
    ModeUnsupported,
    NoFeasibleLeaderSet,
    NotStronglyConnected,
    ScenarioError,
)
from .leaderselect import (
    DEFAULT_CAPS,
    LeaderSelection,
    MinimalLeaderSet,
    SearchCaps,
    centralized_coupling,
    check_darouach,
    detectable_subspace_dim,
    enumerate_minimal_leader_sets,
    observable_subspace_dim,
    reduces_to_state_estimation,
    select_functional_leader_set,
)
from .observernet import (
    DEFAULT_RHO,
    ErrorDynamics,
    NaiveErrorSystem,
    NaiveParams,
    NodeEstimate,
    ObserverDesign,
    assemble_error_dynamics,
    assemble_naive_error_dynamics,
    design_observer,
    naive_coupling,
    naive_error_step,
    naive_step,
    network_step,
    psi_hat,
    zero_measurements,
)
from .sysmodel import SystemModel, validate

logger = logging.getLogger(__name__)

MODES = ("proposed", "naive")
INITIAL_KEYWORDS = ("zeros", "exact", "random")
DEFAULT_HORIZON = 200

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NO_LEADER_SET = 3
EXIT_IO = 4


# ─────────────────────────────────────────────────────────────
# Scenarios
# ─────────────────────────────────────────────────────────────

InitialEstimates = Union[str, List[Any]]


@dataclass
class Scenario:
    model: SystemModel
    x0: np.ndarray
    horizon: int = DEFAULT_HORIZON
    rho: Union[float, Dict[int, float]] = DEFAULT_RHO
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES
    initial_estimates: InitialEstimates = "zeros"
    mode: str = "proposed"
    naive_params: Optional[NaiveParams] = None
    caps: SearchCaps = DEFAULT_CAPS
    name: str = "scenario"
    seed: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            **self.model.to_dict(),
            "x0": self.x0.tolist(),
            "horizon": self.horizon,
            "rho": self.rho if not isinstance(self.rho, dict)
            else {str(k): v for k, v in self.rho.items()},
            "tolerances": self.tolerances.to_dict(),
            "initial_estimates": self.initial_estimates,
            "mode": self.mode,
            "naive_params": self.naive_params.to_dict() if self.naive_params else None,
            "caps": self.caps.to_dict(),
            "seed": self.seed,
        }


def _number(value, key: str, issues: List[str], minimum: float = 0.0) -> Optional[float]:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not np.isfinite(value):
        issues.append(f"{key} must be a finite number")
        return None
    if value < minimum:
        issues.append(f"{key} must be >= {minimum}")
        return None
    return float(value)


def _rho_map(raw: Mapping, N: int, issues: List[str]) -> Dict[int, Optional[float]]:
    """Per-leader radii keyed by node index; JSON keys arrive as strings."""
    radii: Dict[int, Optional[float]] = {}
    for key, value in raw.items():
        try:
            node = int(str(key))
        except ValueError:
            issues.append(f"rho key {key!r} is not a node index")
            continue
        if not 1 <= node <= N:
            issues.append(f"rho key {key!r} names a node outside 1..{N}")
            continue
        radii[node] = _number(value, f"rho[{key}]", issues)
    return radii


def _check_initial_estimates(value, N: int, issues: List[str]):
    # Lengths depend on the design (r* coordinates) and are checked when simulating.
    if isinstance(value, str):
        if value not in INITIAL_KEYWORDS:
            issues.append(f"initial_estimates must be one of {INITIAL_KEYWORDS}, got {value!r}")
        return
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        arr = np.zeros((0, 0))
    if arr.ndim not in (1, 2) or arr.size == 0 or not np.all(np.isfinite(arr)):
        issues.append("initial_estimates must be a keyword, a vector or one row per node")
    elif arr.ndim == 2 and arr.shape[0] != N:
        issues.append(f"initial_estimates has {arr.shape[0]} rows, expected one per node ({N})")


def scenario_from_dict(data: Mapping[str, Any], name: Optional[str] = None) -> Scenario:
    """Build and validate a Scenario; every problem found is listed in one ScenarioError."""
    if not isinstance(data, Mapping):
        raise ScenarioError("scenario must be a JSON object")
    issues: List[str] = []
    for key in ("A", "sensors", "L"):
        if key not in data:
            issues.append(f"missing key '{key}'")
    if issues:
        raise ScenarioError(issues)

    tolerances = DEFAULT_TOLERANCES
    try:
        tolerances = ToleranceConfig(**data.get("tolerances", {}))
    except (TypeError, ValueError) as exc:
        issues.append(f"tolerances: {exc}")

    try:
        model = SystemModel.from_lists(data["A"], data["sensors"], data["L"], data.get("edges", []))
    except (DistFObsError, TypeError, ValueError) as exc:
        raise ScenarioError(issues + [f"model: {exc}"]) from exc
    issues.extend(validate(model, tolerances).issues)
    n = model.n
    if "n" in data and data["n"] != n:
        issues.append(f"n = {data['n']} but A is {n}x{n}")
    if not issues and not is_strongly_connected(model.graph):
        issues.append("communication graph is not strongly connected")

    x0 = np.ones(n)
    if "x0" in data:
        try:
            x0 = np.asarray(data["x0"], dtype=float).reshape(-1)
        except (TypeError, ValueError):
            x0 = np.zeros(0)
        if x0.shape[0] != n or not np.all(np.isfinite(x0)):
            issues.append(f"x0 must be {n} finite numbers")

    horizon = data.get("horizon", DEFAULT_HORIZON)
    if isinstance(horizon, bool) or not isinstance(horizon, int) or horizon < 1:
        issues.append("horizon must be an integer >= 1")

    rho = data.get("rho", DEFAULT_RHO)
    if isinstance(rho, Mapping):
        rho = _rho_map(rho, model.N, issues)
    else:
        rho = _number(rho, "rho", issues)

    initial_estimates = data.get("initial_estimates", "zeros")
    _check_initial_estimates(initial_estimates, model.N, issues)

    mode = data.get("mode", "proposed")
    if mode not in MODES:
        issues.append(f"mode must be one of {MODES}, got {mode!r}")

    naive_params = None
    if data.get("naive_params") is not None:
        raw = data["naive_params"]
        try:
            naive_params = NaiveParams.from_lists(raw["alpha"], raw["beta"], raw["weights"])
            naive_params.check(model.graph, tolerances)
        except ScenarioError as exc:
            issues.extend(f"naive_params: {i}" for i in exc.issues)
        except (KeyError, TypeError, ValueError) as exc:
            issues.append(f"naive_params: {exc}")

    caps = DEFAULT_CAPS
    try:
        caps = SearchCaps(**data.get("caps", {}))
    except (TypeError, ValueError) as exc:
        issues.append(f"caps: {exc}")

    seed = data.get("seed")
    if seed is not None and (not isinstance(seed, int) or seed < 0):
        issues.append("seed must be a nonnegative integer")

    if issues:
        raise ScenarioError(issues)
    return Scenario(model=model, x0=x0, horizon=horizon, rho=rho, tolerances=tolerances,
                    initial_estimates=initial_estimates, mode=mode,
                    naive_params=naive_params, caps=caps,
                    name=name or data.get("name", "scenario"), seed=seed)


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except OSError as exc:
        raise IoError(f"cannot read scenario {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from exc
    return scenario_from_dict(data)


# ─────────────────────────────────────────────────────────────
# Pipeline
# ─────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Pipeline:
    model: SystemModel
    minimal: List[MinimalLeaderSet]
    selection: LeaderSelection
    functional: FunctionalDecomposition
    staircase: StaircaseDecomposition
    design: ObserverDesign
    dynamics: ErrorDynamics


def build_pipeline(scenario: Scenario) -> Pipeline:
    m, tol = scenario.model, scenario.tolerances
    minimal = enumerate_minimal_leader_sets(m, tol, scenario.caps)
    ls = select_functional_leader_set(m, tol, scenario.caps, minimal=minimal)
    fd = build_functional_decomposition(m, ls, tol)
    sc = staircase_for(fd, tol)
    design = design_observer(m.graph, sc, ls.selection.nodes, scenario.rho, tol)
    dynamics = assemble_error_dynamics(design, sc)
    return Pipeline(m, minimal, ls, fd, sc, design, dynamics)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _seal(report: Dict[str, Any]) -> Dict[str, Any]:
    report["report_hash"] = json_digest(report)
    return report


def _darouach(m: SystemModel, tol: ToleranceConfig) -> Dict[str, Any]:
    check = check_darouach(m, tol)
    coupling = centralized_coupling(m, tol)
    return {
        "rank_cond": check.rank_cond,
        "detect_cond": check.detect_cond,
        "coupled_nodes": list(coupling.coupled_nodes) if coupling else None,
    }


def run_check(scenario: Scenario) -> Dict[str, Any]:
    m, tol = scenario.model, scenario.tolerances
    minimal = enumerate_minimal_leader_sets(m, tol, scenario.caps)
    report = {
        "command": "check",
        "name": scenario.name,
        "timestamp": _now(),
        "validation": validate(m, tol).to_dict(),
        "strongly_connected": is_strongly_connected(m.graph),
        "darouach": _darouach(m, tol),
        "reduces_to_state_estimation": reduces_to_state_estimation(m, tol),
        "minimal_leader_sets": [ms.certificate.to_dict() for ms in minimal],
        "status": "ok" if minimal else "no_feasible_leader_set",
    }
    return _seal(report)


def run_analyze(scenario: Scenario) -> Dict[str, Any]:
    """Full design report. A missing leader set is reported in `status`, not raised."""
    m, tol = scenario.model, scenario.tolerances
    C = m.C_full
    d = detectable_subspace_dim(m.A, C, tol)
    report: Dict[str, Any] = {
        "command": "analyze",
        "version": __version__,
        "name": scenario.name,
        "timestamp": _now(),
        "n": m.n,
        "N": m.N,
        "r": m.r,
        "tolerances": tol.to_dict(),
        "caps": scenario.caps.to_dict(),
        "darouach": _darouach(m, tol),
        "detectable_dim": d,
        "observable_dim": observable_subspace_dim(m.A, C, tol),
    }
    try:
        p = build_pipeline(scenario)
    except NoFeasibleLeaderSet as exc:
        report.update(status="no_feasible_leader_set", message=str(exc), minimal_leader_sets=[])
        return _seal(report)
    except NotStronglyConnected as exc:
        report.update(status="invalid", message=str(exc))
        return _seal(report)

    ls, sc, dyn = p.selection, p.staircase, p.dynamics
    report.update(
        status="ok",
        minimal_leader_sets=[ms.to_dict() for ms in p.minimal],
        S_star=list(ls.S_star),
        selection=ls.selection.to_dict(),
        C_star=ls.C_star.tolist(),
        r_star=ls.r_star,
        Sigma=ls.Sigma.tolist(),
        order_bound={"r": m.r, "r_star": ls.r_star, "d": d,
                     "holds": m.r <= ls.r_star <= d},
        decomposition=p.functional.to_dict(),
        staircase={"leaders": list(sc.leaders), "dims": list(sc.dims), "u": sc.u},
        rho=list(p.design.rho),
        gains={str(l): G.tolist() for l, G in zip(p.design.leaders, p.design.gains)},
        spectral_radius=dyn.spectral_radius,
        certified=dyn.spectral_radius < 1.0 - tol.stability_margin,
    )
    return _seal(report)


# ─────────────────────────────────────────────────────────────
# Simulation
# ─────────────────────────────────────────────────────────────

@dataclass
class SimulationTrace:
    """Arrays indexed by step k = 0..K (and node 1..N as column node-1)."""
    psi: np.ndarray            # (K+1, r)
    psi_hat: np.ndarray        # (K+1, N, r)
    err_norm: np.ndarray       # (K+1, N)
    mode: str = "proposed"
    z_hat: Optional[np.ndarray] = None   # (K+1, N, r*), proposed mode only
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def horizon(self) -> int:
        return self.psi.shape[0] - 1

    @property
    def node_count(self) -> int:
        return self.err_norm.shape[1]

    @property
    def r(self) -> int:
        return self.psi.shape[1]

    def max_error(self, k: int = -1) -> float:
        return float(np.max(self.err_norm[k]))


def _initial_phi(start: InitialEstimates, exact: np.ndarray, N: int,
                 rng: np.random.Generator, what: str) -> List[np.ndarray]:
    """Per-node initial estimates in the coordinates of `exact`."""
    size = exact.shape[0]
    if isinstance(start, str):
        if start == "zeros":
            return [np.zeros(size) for _ in range(N)]
        if start == "exact":
            return [exact.copy() for _ in range(N)]
        if start == "random":
            return [rng.standard_normal(size) for _ in range(N)]
        raise ScenarioError(f"initial_estimates: unknown keyword {start!r}")
    arr = np.asarray(start, dtype=float)
    if arr.shape == (size,):
        return [arr.copy() for _ in range(N)]
    if arr.shape == (N, size):
        return [row.copy() for row in arr]
    if size == 1 and arr.shape == (N,):
        return [np.array([v]) for v in arr]
    raise ScenarioError(f"initial_estimates must be {size} values or {N}x{size} ({what})")


def _simulate_proposed(s: Scenario, K: int, rng: np.random.Generator) -> SimulationTrace:
    p = build_pipeline(s)
    m, ls, fd, sc, design = p.model, p.selection, p.functional, p.staircase, p.design
    N, r = m.N, m.r
    x = s.x0.copy()
    z0 = sc.T_D_inv @ (fd.Sigma @ x)
    phis = _initial_phi(s.initial_estimates, fd.Sigma @ x, N, rng, "phi coordinates")

    est = {i: NodeEstimate.from_z(sc.T_D_inv @ phis[i - 1], sc) for i in m.graph.nodes}
    err = {i: NodeEstimate.from_z(est[i].z - z0, sc) for i in m.graph.nodes}
    quiet = zero_measurements(sc)

    psi = np.zeros((K + 1, r))
    psi_hats = np.zeros((K + 1, N, r))
    err_norm = np.zeros((K + 1, N))
    z_hat = np.zeros((K + 1, N, sc.r_star))
    for k in range(K + 1):
        psi[k] = m.L @ x
        for i in m.graph.nodes:
            psi_hats[k, i - 1] = psi_hat(est[i], sc, r)
            err_norm[k, i - 1] = np.linalg.norm(psi_hat(err[i], sc, r))
            z_hat[k, i - 1] = est[i].z
        if k == K:
            break
        est = network_step(est, reduced_measurements(m, ls, x), design, sc)
        err = network_step(err, quiet, design, sc)
        x = m.A @ x

    meta = {"S_star": list(ls.S_star), "r_star": ls.r_star,
            "spectral_radius": p.dynamics.spectral_radius}
    return SimulationTrace(psi, psi_hats, err_norm, "proposed", z_hat, meta)


def naive_system(s: Scenario) -> NaiveErrorSystem:
    try:
        coupling = naive_coupling(s.model, s.tolerances)
        params = s.naive_params or NaiveParams.default(coupling, s.model.graph)
        return assemble_naive_error_dynamics(params, s.model, s.tolerances)
    except DecompositionFailed as exc:
        raise ModeUnsupported(f"naive mode: {exc}") from exc


def _simulate_naive(s: Scenario, K: int, rng: np.random.Generator) -> SimulationTrace:
    m = s.model
    system = naive_system(s)
    c = system.coupling.row
    N = m.N
    x = s.x0.copy()
    psi0 = m.L @ x
    xhat = np.array([v[0] for v in _initial_phi(s.initial_estimates, psi0, N, rng, "scalars")])
    e = xhat - psi0[0]

    psi = np.zeros((K + 1, 1))
    psi_hats = np.zeros((K + 1, N, 1))
    err_norm = np.zeros((K + 1, N))
    for k in range(K + 1):
        psi[k] = m.L @ x
        psi_hats[k, :, 0] = xhat
        err_norm[k] = np.abs(e)
        if k == K:
            break
        y = float(c @ x)
        xhat = naive_step(xhat, y, system)
        e = naive_error_step(e, psi[k, 0], y, system)
        x = m.A @ x

    meta = {"alpha": system.coupling.alpha, "beta": system.coupling.beta,
            "B2": system.B2.ravel().tolist()}
    return SimulationTrace(psi, psi_hats, err_norm, "naive", None, meta)


def run_simulate(scenario: Scenario, steps: Optional[int] = None, mode: Optional[str] = None,
                 seed: Optional[int] = None) -> SimulationTrace:
    K = scenario.horizon if steps is None else steps
    if K < 1:
        raise ScenarioError("horizon must be >= 1")
    mode = mode or scenario.mode
    if mode not in MODES:
        raise ModeUnsupported(f"unknown mode {mode!r}")
    if seed is None:
        seed = scenario.seed if scenario.seed is not None else 0
    rng = np.random.default_rng(seed)
    trace = (_simulate_naive if mode == "naive" else _simulate_proposed)(scenario, K, rng)
    logger.info("%s simulation: %d steps, final max error %.3e", mode, K, trace.max_error())
    return trace


def trace_header(r: int) -> List[str]:
    return (["k"] + [f"psi_{q}" for q in range(1, r + 1)] + ["node"]
            + [f"psihat_{q}" for q in range(1, r + 1)] + ["err_norm"])


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def export_trace(trace: SimulationTrace, path: str) -> str:
    """CSV, one row per (k, node), k then node ascending. Returns the SHA-256 of the file."""
    def write(f):
        w = csv.writer(f, lineterminator="\n")
        w.writerow(trace_header(trace.r))
        for k in range(trace.horizon + 1):
            psi = [_fmt(v) for v in trace.psi[k]]
            for i in range(trace.node_count):
                w.writerow([k, *psi, i + 1, *(_fmt(v) for v in trace.psi_hat[k, i]),
                            _fmt(trace.err_norm[k, i])])

    atomic_write(path, write, newline="")
    return file_digest(path)


def read_trace(path: str) -> SimulationTrace:
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
    except OSError as exc:
        raise IoError(f"cannot read trace {path}: {exc}") from exc
    header, body = rows[0], rows[1:]
    r = sum(1 for h in header if h.startswith("psi_"))
    N = max(int(row[r + 1]) for row in body)
    K = max(int(row[0]) for row in body)
    psi = np.zeros((K + 1, r))
    psi_hats = np.zeros((K + 1, N, r))
    err_norm = np.zeros((K + 1, N))
    for row in body:
        k, i = int(row[0]), int(row[r + 1]) - 1
        psi[k] = [float(v) for v in row[1:r + 1]]
        psi_hats[k, i] = [float(v) for v in row[r + 2:2 * r + 2]]
        err_norm[k, i] = float(row[-1])
    return SimulationTrace(psi, psi_hats, err_norm, mode="")


# ─────────────────────────────────────────────────────────────
# Command line
# ─────────────────────────────────────────────────────────────

def _apply_overrides(s: Scenario, args: argparse.Namespace) -> Scenario:
    try:
        s.tolerances = s.tolerances.with_overrides(rank_tol=args.tol_rank,
                                                   residual_tol=args.tol_residual)
    except ValueError as exc:
        raise ScenarioError(f"tolerance override: {exc}") from exc
    if args.rho is not None:
        if not (np.isfinite(args.rho) and args.rho >= 0):
            raise ScenarioError(f"--rho must be a finite number >= 0, got {args.rho}")
        s.rho = args.rho
    if args.seed is not None:
        s.seed = args.seed
    return s


def _mark(ok: bool) -> str:
    return "✓" if ok else "✗"


def _print_check(report: Dict[str, Any]):
    print()
    print("=" * 60)
    print(f"  DISTFOBS CHECK — {report['name']}")
    print(f"  {report['timestamp']}")
    print("=" * 60)
    dar = report["darouach"]
    print(f"  Strongly connected:      {_mark(report['strongly_connected'])}")
    print(f"  Centralized rank cond:   {_mark(dar['rank_cond'])}")
    print(f"  Centralized detect cond: {_mark(dar['detect_cond'])}")
    if dar["coupled_nodes"] is not None:
        print(f"  Measurements needed from nodes {dar['coupled_nodes']}")
    print()
    if report["minimal_leader_sets"]:
        print("  Minimal leader sets:")
        for cert in report["minimal_leader_sets"]:
            print(f"    ✓ {cert['node_set']}  rows {cert['selection']}  rank {cert['sigma_rank']}")
    else:
        print("  ✗ No feasible leader set")
    print()
    print(f"  Report hash: {report['report_hash']}")
    print("=" * 60)


def _print_simulation(trace: SimulationTrace, path: Optional[str], digest: Optional[str]):
    print()
    print("=" * 60)
    print(f"  DISTFOBS SIMULATION — {trace.mode} mode, K={trace.horizon}")
    print("=" * 60)
    for i in range(trace.node_count):
        print(f"  node {i + 1}: |psi_hat - psi| at K = {trace.err_norm[-1, i]:.6e}")
    if path:
        print(f"  Trace:   {path}")
        print(f"  SHA-256: {digest}")
    print("=" * 60)


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"seed must be >= 0, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("scenario", help="scenario JSON file")
    common.add_argument("--tol-rank", type=float, default=None, help="relative rank cutoff")
    common.add_argument("--tol-residual", type=float, default=None, help="identity-check slack")
    common.add_argument("--rho", type=float, default=None, help="target observer spectral radius")
    common.add_argument("--seed", type=_seed, default=None, help="seed for random initial estimates")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="distfobs", description="Distributed functional observer design and simulation")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="centralized conditions and leader sets")
    sub.add_parser("analyze", parents=[common], help="full design report as JSON")
    sim = sub.add_parser("simulate", parents=[common], help="simulate and export a CSV trace")
    sim.add_argument("--steps", type=int, default=None, help="horizon K")
    sim.add_argument("--output", default=None, help="CSV output path")
    sim.add_argument("--mode", choices=MODES, default=None)
    return parser


def _configure_logging(verbosity: int):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        scenario = _apply_overrides(load_scenario(args.scenario), args)
        if args.command == "check":
            report = run_check(scenario)
            _print_check(report)
            return EXIT_OK if report["minimal_leader_sets"] else EXIT_NO_LEADER_SET
        if args.command == "analyze":
            report = run_analyze(scenario)
            print(to_json(report))
            if report["status"] == "no_feasible_leader_set":
                return EXIT_NO_LEADER_SET
            return EXIT_OK if report["status"] == "ok" else EXIT_INVALID
        trace = run_simulate(scenario, steps=args.steps, mode=args.mode, seed=args.seed)
        digest = export_trace(trace, args.output) if args.output else None
        _print_simulation(trace, args.output, digest)
        return EXIT_OK
    except NoFeasibleLeaderSet as exc:
        logger.error("%s", exc)
        return EXIT_NO_LEADER_SET
    except IoError as exc:
        logger.error("%s", exc)
        return EXIT_IO
    except (ScenarioError, ModeUnsupported, NotStronglyConnected) as exc:
        logger.error("%s", exc)
        return EXIT_INVALID
    except DistFObsError as exc:
        logger.error("design failed: %s", exc)
        return EXIT_INVALID
