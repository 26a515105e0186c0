"""
Subcommand orchestration.

Every command writes its reports plus ``config.json`` into the output
directory. Nothing time- or host-dependent goes into those files, so the same
config and seed reproduce them byte for byte.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from .baselines import BASELINES, SUITES
from .config import ExperimentConfig
from .envelopes import (
    OperatorSpec,
    gaussian_tail_bound,
    log_green_envelope,
    log_heat_envelope,
    phi_branch,
)
from .errors import BaselineFailure, UsageError
from .lattice import analyze_lattice, load_lattice_spec
from .models import coordinate_along
from .oracles import (
    H2_HEAT,
    H3_HEAT,
    HeatOracle,
    euclid3_green,
    euclid_oracle,
    green_from_heat,
    h3_green,
    heat_samples,
    log_h3_green,
)
from .reports import (
    ENVELOPE_SCHEMA,
    SAMPLES_SCHEMA,
    SPACES_SCHEMA,
    SUMMARY_SCHEMA,
    VALIDATE_SCHEMA,
    VOLUME_SCHEMA,
    emit_json,
    emit_report,
    ratio_summary,
)
from .rootdata import RestrictedRootSystem, beta_exponent, catalog_space, rho_min, rho_norm
from .store import BaselineStore
from .volume import chamber_grid, log_volume_envelope, volume_quadrature

logger = logging.getLogger("SYMKERNEL")

CATALOG = ("H2R", "H3R", "H4R", "H2C", "H3C", "SL3R", "SL4R")

# Acceptance grids
GREEN_S = (0.25, 0.5, 1.0, 2.0)
LAPLACE_RADII = tuple(float(r) for r in range(2, 11))
VOLUME_RADII = (1.0, 3.0, 6.0)
VOLUME_EPSILONS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
TAIL_A = tuple(float(a) for a in np.linspace(0.0, 50.0, 20))
TAIL_T = tuple(float(t) for t in np.geomspace(0.1, 100.0, 10))

Row = Dict[str, Any]


@dataclass
class RunResult:
    status: int
    paths: List[Path] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)


def _operator(config: ExperimentConfig, rs: RestrictedRootSystem) -> OperatorSpec:
    if config.alpha0 is None:
        return OperatorSpec.scalar_laplacian(rs)
    return OperatorSpec(float(config.alpha0))


def _heat_times(r: float) -> List[float]:
    """0.25, 0.5 and the integers up to r: the sharp regime t <= r"""
    return [0.25, 0.5] + [float(t) for t in range(1, int(math.floor(r)) + 1)]


def run_spaces(config: ExperimentConfig, out: Path) -> RunResult:
    rows = []
    for label in CATALOG:
        rs = catalog_space(label)
        rows.append(
            {
                "space": rs.name,
                "rank": rs.rank,
                "dim": rs.dim,
                "rho_norm": rho_norm(rs),
                "beta": beta_exponent(rs),
                "rho_min": rho_min(rs),
            }
        )
    print(f"{'space':<6} {'rank':>4} {'dim':>4} {'|rho|':>10} {'beta':>6} {'rho_min':>10}")
    for row in rows:
        print(
            f"{row['space']:<6} {row['rank']:>4} {row['dim']:>4} {row['rho_norm']:>10.6f} "
            f"{row['beta']:>6.2f} {row['rho_min']:>10.6f}"
        )
    return RunResult(0, [emit_report(rows, SPACES_SCHEMA, out / "spaces.csv")])


def run_envelope(config: ExperimentConfig, out: Path) -> RunResult:
    rs = catalog_space(config.space)
    op = _operator(config, rs)
    rows = []
    for r in config.r:
        coord = coordinate_along(rs, r)
        if config.kernel == "green":
            for s in config.s:
                log_value = log_green_envelope(rs, coord, s, config.allow_outside)
                rows.append(_envelope_row(rs, coord.x_plus.coords, r, s, log_value, "resolvent"))
        else:
            for t in config.t:
                log_value = log_heat_envelope(rs, coord, t, op, config.allow_outside)
                branch = phi_branch(coord, t)
                rows.append(_envelope_row(rs, coord.x_plus.coords, r, t, log_value, branch))
    path = emit_report(rows, ENVELOPE_SCHEMA, out / f"envelope_{config.kernel}.csv")
    return RunResult(0, [path])


def _envelope_row(
    rs: RestrictedRootSystem,
    x_plus: Tuple[float, ...],
    d: float,
    t_or_s: float,
    log_value: float,
    branch: str,
) -> Row:
    return {
        "space": rs.name,
        "x_plus": x_plus,
        "d": d,
        "t_or_s": t_or_s,
        "value": math.exp(log_value),
        "log_value": log_value,
        "branch": branch,
    }


def _volume_rows(
    rs: RestrictedRootSystem,
    radii: List[float],
    epsilons: List[float],
    config: ExperimentConfig,
) -> List[Row]:
    rows = []
    index = 0
    for x_plus in chamber_grid(rs, radii):
        for epsilon in epsilons:
            estimate = volume_quadrature(
                rs,
                x_plus,
                epsilon,
                budget=config.budget,
                seed=config.seed + index,
                threads=config.threads,
            )
            index += 1
            log_envelope = log_volume_envelope(rs, x_plus, epsilon)
            ratio = (
                math.exp(math.log(estimate.value) - log_envelope) if estimate.value > 0 else 0.0
            )
            rows.append(
                {
                    "space": rs.name,
                    "x_plus": x_plus.coords,
                    "epsilon": epsilon,
                    "envelope": math.exp(log_envelope),
                    "quadrature": estimate.value,
                    "std_error": estimate.std_error,
                    "ratio": ratio,
                }
            )
    logger.info(f"{rs.name}: {len(rows)} volume points")
    return rows


def run_volume(config: ExperimentConfig, out: Path) -> RunResult:
    rs = catalog_space(config.space)
    rows = _volume_rows(rs, config.r, config.epsilon, config)
    summary = ratio_summary([row["ratio"] for row in rows if row["ratio"] > 0.0])
    paths = [
        emit_report(rows, VOLUME_SCHEMA, out / "volume.csv"),
        emit_json({"space": rs.name, **summary}, out / "volume_summary.json"),
    ]
    return RunResult(0, paths, summary)


# Validation cases


def _validate_row(case: str, r: float, t_or_s: float, log_exact: float, log_env: float) -> Row:
    return {
        "case": case,
        "r": r,
        "t_or_s": t_or_s,
        "exact": math.exp(log_exact),
        "envelope": math.exp(log_env),
        "ratio": math.exp(log_exact - log_env),
    }


def _case_green_h3(config: ExperimentConfig) -> List[Row]:
    rs = catalog_space("H3R")
    rows = []
    for r in range(2, 31):
        coord = coordinate_along(rs, float(r))
        for s in GREEN_S:
            log_env = log_green_envelope(rs, coord, s)
            rows.append(_validate_row("H3R-green", float(r), s, log_h3_green(s, r), log_env))
    return rows


def _laplace_rows(
    case: str,
    oracle: HeatOracle,
    alpha0: float,
    closed_form: Callable[[float, float], float],
    quad_budget: int,
) -> List[Row]:
    # the closed form stands in the envelope column
    rows = []
    for r in LAPLACE_RADII:
        for s in GREEN_S:
            value = float(np.real(green_from_heat(oracle, alpha0, s, r, quad_budget)))
            exact = closed_form(s, r)
            rows.append(
                {
                    "case": case,
                    "r": r,
                    "t_or_s": s,
                    "exact": value,
                    "envelope": exact,
                    "ratio": value / exact,
                }
            )
    return rows


def _case_green_laplace_h3(config: ExperimentConfig) -> List[Row]:
    return _laplace_rows("H3R-green-laplace", H3_HEAT, 1.0, h3_green, config.quad_budget)


def _case_green_laplace_r3(config: ExperimentConfig) -> List[Row]:
    return _laplace_rows(
        "R3-green-laplace", euclid_oracle(3), 0.0, euclid3_green, config.quad_budget
    )


def _heat_rows(case: str, label: str, oracle: HeatOracle, max_r: int) -> List[Row]:
    rs = catalog_space(label)
    op = OperatorSpec.scalar_laplacian(rs)
    grid = [(float(r), t) for r in range(2, max_r + 1) for t in _heat_times(r)]
    rows = []
    for sample in heat_samples(oracle, grid):
        coord = coordinate_along(rs, sample.r)
        log_env = log_heat_envelope(rs, coord, sample.t_or_s, op)
        rows.append(_validate_row(case, sample.r, sample.t_or_s, sample.log_value, log_env))
    return rows


def _case_heat_h3(config: ExperimentConfig) -> List[Row]:
    return _heat_rows("H3R-heat", "H3R", H3_HEAT, 30)


def _case_heat_h2(config: ExperimentConfig) -> List[Row]:
    return _heat_rows("H2R-heat", "H2R", H2_HEAT, 20)


def _case_tail(config: ExperimentConfig) -> List[Row]:
    rows = []
    for A in TAIL_A:
        for t in TAIL_T:
            bound = gaussian_tail_bound(A, t)
            rows.append(_validate_row("gaussian-tail", A, t, bound.log_lhs, bound.log_rhs))
    return rows


def _volume_case(case: str, label: str, config: ExperimentConfig) -> List[Row]:
    rows = _volume_rows(catalog_space(label), list(VOLUME_RADII), list(VOLUME_EPSILONS), config)
    return [
        {
            "case": case,
            "r": float(np.linalg.norm(row["x_plus"])),
            "t_or_s": row["epsilon"],
            "exact": row["quadrature"],
            "envelope": row["envelope"],
            "ratio": row["ratio"],
        }
        for row in rows
    ]


CASES: Dict[str, Callable[[ExperimentConfig], List[Row]]] = {
    "H3R-green": _case_green_h3,
    "H3R-green-laplace": _case_green_laplace_h3,
    "R3-green-laplace": _case_green_laplace_r3,
    "H3R-heat": _case_heat_h3,
    "H2R-heat": _case_heat_h2,
    "gaussian-tail": _case_tail,
    "H3R-volume": lambda config: _volume_case("H3R-volume", "H3R", config),
    "SL3R-volume": lambda config: _volume_case("SL3R-volume", "SL3R", config),
}


def run_validate(config: ExperimentConfig, out: Path) -> RunResult:
    catalog_space(config.space)
    if config.space not in SUITES:
        raise UsageError(
            f"No validation suite for {config.space} (available: {', '.join(SUITES)})"
        )

    rows: List[Row] = []
    summaries = []
    for case in SUITES[config.space]:
        logger.info(f"Validating {case}")
        case_rows = CASES[case](config)
        rows.extend(case_rows)
        summary = ratio_summary([row["ratio"] for row in case_rows])
        passed = BASELINES[case].check(summary)
        if not passed:
            logger.error(f"{case}: ratios {summary} outside the frozen baseline")
        summaries.append({"case": case, **summary, "passed": passed})

    paths = [
        emit_report(rows, VALIDATE_SCHEMA, out / "validate.csv"),
        emit_report(summaries, SUMMARY_SCHEMA, out / "validate_summary.csv"),
        emit_json(
            {"space": config.space, "cases": summaries}, out / "validate_summary.json"
        ),
    ]
    for summary in summaries:
        print(
            f"{summary['case']:<20} min {summary['min_ratio']:.6g}  max {summary['max_ratio']:.6g}"
            f"  spread {summary['spread']:.4g}  {'ok' if summary['passed'] else 'FAIL'}"
        )

    if config.baseline_db:
        _record_baselines(Path(config.baseline_db), config, summaries)

    failed = [s["case"] for s in summaries if not s["passed"]]
    if failed:
        raise BaselineFailure(f"Ratio baselines failed: {', '.join(failed)}")
    return RunResult(0, paths, {"cases": summaries})


def _record_baselines(
    db_path: Path, config: ExperimentConfig, summaries: List[Dict[str, Any]]
) -> None:
    store = BaselineStore(db_path)
    try:
        run_id = store.record_run(config.command, config.space, config.to_dict())
        for summary in summaries:
            store.drifted(summary["case"], summary)
            store.record_baseline(run_id, summary["case"], summary, summary["passed"])
    finally:
        store.close()


def run_lattice(config: ExperimentConfig, out: Path) -> RunResult:
    assert config.lattice is not None
    spec = load_lattice_spec(Path(config.lattice))
    rs = spec.rootsystem()
    op = _operator(config, rs)
    report = analyze_lattice(spec, config.depth, op, threads=config.threads)
    samples_path = emit_report(
        [
            {"word_length": p.word_length, "dist": p.dist, "rho_radial": p.rho_radial}
            for p in report.samples
        ],
        SAMPLES_SCHEMA,
        out / "lattice_samples.csv",
    )
    data = report.to_dict(samples_csv_path=samples_path.name)
    for line in report.notes:
        print(line)
    return RunResult(0, [samples_path, emit_json(data, out / "lattice.json")], data)


COMMANDS: Dict[str, Callable[[ExperimentConfig, Path], RunResult]] = {
    "spaces": run_spaces,
    "envelope": run_envelope,
    "volume": run_volume,
    "validate": run_validate,
    "lattice": run_lattice,
}


def run(config: ExperimentConfig, out: Optional[Path] = None) -> RunResult:
    """Run one experiment and write its reports; raises SymkernelError on failure"""
    config.validate()
    out = Path(out if out is not None else config.out)
    logger.info(f"Running {config.command} on {config.space}, reports in {out}")
    config_path = emit_json(config.to_dict(), out / "config.json")
    result = COMMANDS[config.command](config, out)
    result.paths.append(config_path)
    return result
