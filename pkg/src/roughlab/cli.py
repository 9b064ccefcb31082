"""Command-line entry point: flat-file run configs, dispatch and reports.

Config files are diff-friendly INI text with one section per command plus an
optional ``[run]`` section for run-wide settings::

    [run]
    command = scan-abs
    output = abs.csv
    format = csv
    seed = 0

    [scan-abs]
    q = 2
    s_list = 1.25,1.75
    resolutions = 4096,8192,16384,32768

Every value can be overridden with ``--set key=value`` (bare keys address the
command section, ``run.key`` the run section).  Exit codes: 0 success, 1
unwritable output (before compute), 2 precondition failure, 3 numerical
failure (blow-up/NaN) with partial artifacts still written.
"""

from __future__ import annotations

import argparse
import configparser
import io
import math
import os
import sys
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import selftest as selftest_mod
from .evolution import EvolutionConfig, evolve
from .experiments import (
    ScanReport,
    ScanSpec,
    abs_value_scan,
    base_metadata,
    heat_threshold_scan,
    nls_threshold_scan,
    nonlinear_estimate_scan,
    witness_probe,
    witness_report_to_scan,
)
from .reports import serialize_report, write_report
from .spaces import besov_norm_lp, besov_norm_modulus, besov_norm_spline, sobolev_norm
from .spectral import Field, Grid
from . import fields as fieldlib

COMMANDS = (
    "norms",
    "evolve",
    "scan-abs",
    "scan-nonlinear",
    "scan-heat",
    "scan-nls",
    "witness",
    "selftest",
)

EXIT_OK = 0
EXIT_OUTPUT = 1
EXIT_PRECONDITION = 2
EXIT_NUMERICAL = 3


class PreconditionError(ValueError):
    """Raised when a run configuration violates a documented precondition."""


@dataclass
class RunConfig:
    command: str
    params: dict
    output_path: str | None = None
    format: str = "csv"
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise PreconditionError(f"unknown command {self.command!r}; pick one of {COMMANDS}")
        if self.format not in ("csv", "json"):
            raise PreconditionError("format must be csv or json")
        if self.jobs < 1:
            raise PreconditionError("jobs must be at least 1")


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def load_config(path: str | None, command: str | None, overrides: list[str]) -> RunConfig:
    parser = configparser.ConfigParser()
    if path is not None:
        with open(path, "r", encoding="utf-8") as handle:
            parser.read_file(handle)
    if not parser.has_section("run"):
        parser.add_section("run")
    if command is not None:
        parser.set("run", "command", command)
    cmd = parser.get("run", "command", fallback=None)
    if cmd is None:
        raise PreconditionError("no command given (positional argument or [run] command=...)")
    if not parser.has_section(cmd):
        parser.add_section(cmd)
    for item in overrides:
        if "=" not in item:
            raise PreconditionError(f"malformed --set {item!r}; expected key=value")
        key, value = item.split("=", 1)
        if "." in key:
            section, key = key.split(".", 1)
        else:
            section = cmd
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, value)
    run = parser["run"]
    return RunConfig(
        command=cmd,
        params=dict(parser[cmd]),
        output_path=run.get("output", fallback=None),
        format=run.get("format", fallback="csv"),
        seed=run.getint("seed", fallback=0),
        jobs=run.getint("jobs", fallback=1),
    )


def _check_q(q: float) -> float:
    if not (1.0 < q < math.inf):
        raise PreconditionError(f"q = {q:g} rejected: integrability must lie in (1, ∞)")
    return q


def _scan_spec(config: RunConfig, target: str, default_s: str, default_res: str) -> ScanSpec:
    p = config.params.get("p")
    q = config.params.get("q")
    return ScanSpec(
        target=target,
        p=float(p) if p is not None else None,
        q=_check_q(float(q)) if q is not None else None,
        s_list=_parse_floats(config.params.get("s_list", default_s)),
        resolutions=_parse_ints(config.params.get("resolutions", default_res)),
        seed=config.seed,
        delta=float(config.params.get("delta", 0.1)),
        t_star=float(config.params.get("t_star", 0.01)),
        eps=float(config.params.get("eps", 0.05)),
        corpus_size=int(config.params.get("corpus_size", 20)),
    )


def _norms_report(config: RunConfig) -> ScanReport:
    params = config.params
    q = _check_q(float(params.get("q", 2)))
    s_list = _parse_floats(params.get("s_list", "0.5,1.0,1.5"))
    resolutions = _parse_ints(params.get("resolutions", "4096"))
    datum = params.get("datum", "ramp")
    method = params.get("method", "sobolev")
    spec = ScanSpec(
        target="norms", p=None, q=q, s_list=s_list, resolutions=resolutions, seed=config.seed
    )
    report = ScanReport(
        target="norms",
        metadata=base_metadata(spec, q=q, datum=datum, method=method),
        columns=("s", "resolution", "norm_value"),
    )
    for s in s_list:
        for n in resolutions:
            grid = Grid(n)
            if datum == "ramp":
                u = fieldlib.linear_ramp(grid)
            elif datum == "abs_ramp":
                ramp = fieldlib.linear_ramp(grid)
                u = Field(grid, np.abs(ramp.values).astype(np.complex128))
            elif datum == "gaussian":
                u = fieldlib.gaussian_bump(grid)
            else:
                raise PreconditionError(f"unknown datum {datum!r}")
            if method == "sobolev":
                val = sobolev_norm(u, s, q)
            elif method == "besov_lp":
                val = besov_norm_lp(u, s, q, q)
            elif method == "besov_modulus":
                val = besov_norm_modulus(u, s, q, m=int(params.get("m", 2)))
            elif method == "besov_spline":
                val = besov_norm_spline(u, s, q)
            else:
                raise PreconditionError(f"unknown method {method!r}")
            report.add_row(s, n, val)
    return report


def _evolve_report(config: RunConfig) -> tuple[ScanReport, bool]:
    params = config.params
    n = int(params.get("n", 4096))
    delta = float(params.get("delta", 0.1))
    cutoff = params.get("freq_cutoff_j")
    econf = EvolutionConfig(
        equation=params.get("equation", "heat"),
        p=float(params.get("p", 2.5)),
        lambda_sign=int(params.get("lambda_sign", 1)),
        freq_cutoff_j=int(cutoff) if cutoff not in (None, "", "none") else None,
        dt=float(params.get("dt", 1e-3)),
        t_final=float(params.get("t_final", 0.1)),
        integrator=params.get("integrator", "etd2"),
        oversample=int(params.get("oversample", 2)),
        save_every=int(params.get("save_every", 10)),
    )
    grid = Grid(n)
    u0 = delta * fieldlib.linear_ramp(grid)
    traj = evolve(u0, econf)
    spec = ScanSpec(
        target="norms", p=econf.p, q=2.0, s_list=(0.0,), resolutions=(n,), seed=config.seed
    )
    report = ScanReport(
        target="evolve",
        metadata=base_metadata(
            spec,
            equation=econf.equation,
            p=econf.p,
            lambda_sign=econf.lambda_sign,
            dt=econf.dt,
            t_final=econf.t_final,
            integrator=econf.integrator,
            oversample=econf.oversample,
            blow_up=int(traj.blow_up),
            last_valid_time=traj.last_valid_time,
        ),
        columns=("t", "mass", "sup_norm", "alias_residual"),
    )
    for row in traj.diagnostics_rows():
        report.add_row(row["t"], row["mass"], row["sup_norm"], row["alias_residual"])
    return report, traj.blow_up


def dispatch(config: RunConfig) -> tuple[ScanReport | None, int]:
    """Run the configured command; returns (report, exit code)."""
    if config.command == "selftest":
        failures = selftest_mod.run_selftest(verbose=True)
        return None, EXIT_OK if failures == 0 else EXIT_PRECONDITION
    if config.command == "norms":
        return _norms_report(config), EXIT_OK
    if config.command == "evolve":
        report, blew_up = _evolve_report(config)
        return report, EXIT_NUMERICAL if blew_up else EXIT_OK
    if config.command == "scan-abs":
        spec = _scan_spec(config, "abs_value", "1.25,1.75", "4096,8192,16384,32768")
        report = abs_value_scan(spec, method=config.params.get("method", "sobolev"))
    elif config.command == "scan-nonlinear":
        spec = _scan_spec(config, "nonlinear_estimate", "2.6,2.9,3.2", "4096,8192,16384")
        report = nonlinear_estimate_scan(
            spec, kink_only=config.params.get("kink_only", "0") in ("1", "true")
        )
    elif config.command == "scan-heat":
        spec = _scan_spec(config, "heat_threshold", "4.6,5.4", "4096,8192,16384,32768")
        report = heat_threshold_scan(spec)
    elif config.command == "scan-nls":
        spec = _scan_spec(config, "nls_threshold", "4.6,5.4", "4096,8192,16384,32768")
        report = nls_threshold_scan(spec)
    elif config.command == "witness":
        params = config.params
        wreport = witness_probe(
            p=float(params.get("p", 2.5)),
            q=_check_q(float(params.get("q", 2))),
            t=float(params.get("t", 0.005)),
            n_points=int(params.get("n", 2**15)),
            delta=float(params.get("delta", 0.1)),
        )
        spec = ScanSpec(
            target="witness",
            p=wreport.p,
            q=wreport.q,
            s_list=(),
            resolutions=(int(params.get("n", 2**15)),),
            seed=config.seed,
        )
        report = witness_report_to_scan(wreport, spec)
    else:  # pragma: no cover - guarded by RunConfig
        raise PreconditionError(f"unhandled command {config.command!r}")
    code = EXIT_OK
    for row in report.rows:
        if any(isinstance(v, float) and math.isnan(v) for v in row):
            code = EXIT_NUMERICAL
    return report, code


def run(config: RunConfig) -> int:
    """Validate, compute, write the report, print one verdict line per scan point."""
    if config.output_path is not None:
        try:
            probe_path = config.output_path
            with open(probe_path, "ab"):
                pass
            if os.path.getsize(probe_path) == 0:
                os.remove(probe_path)
        except OSError as err:
            print(f"error: output path not writable: {err}", file=sys.stderr)
            return EXIT_OUTPUT
    try:
        report, code = dispatch(config)
    except (PreconditionError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PRECONDITION
    if report is not None:
        if config.output_path is not None:
            write_report(report, config.output_path, config.format)
        else:
            sys.stdout.write(serialize_report(report, config.format).decode("utf-8"))
        for verdict in report.verdicts:
            keys = [f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}"
                    for k, v in verdict.items()
                    if k not in ("status", "exponent", "confidence") and v is not None]
            exponent = verdict.get("exponent")
            expo = f" exponent={exponent:.3f}" if exponent is not None else ""
            print(f"[{report.target}] {' '.join(keys)} -> {verdict['status']}{expo}")
    elif config.command != "selftest":
        print("no report produced")
    return code


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="roughlab",
        description="Refinement-study laboratory for rough power nonlinearities.",
    )
    parser.add_argument("command", nargs="?", choices=COMMANDS, help="command to run")
    parser.add_argument("--config", help="flat key-value run configuration")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config value")
    parser.add_argument("--output", help="report output path")
    parser.add_argument("--format", choices=("csv", "json"), help="report format")
    parser.add_argument("--seed", type=int, help="RNG seed embedded in the report")
    parser.add_argument("--jobs", type=int, help="worker count for independent scan points")
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config, args.command, args.overrides)
        if args.output is not None:
            config.output_path = args.output
        if args.format is not None:
            config.format = args.format
        if args.seed is not None:
            config.seed = args.seed
        if args.jobs is not None:
            config.jobs = args.jobs
        config = RunConfig(
            command=config.command,
            params=config.params,
            output_path=config.output_path,
            format=config.format,
            seed=config.seed,
            jobs=config.jobs,
        )
    except (PreconditionError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PRECONDITION
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
