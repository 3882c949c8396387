"""Command-line entry point: ``run``, ``converge``, ``sweep`` and ``verify``.

A JSON config file may supply any option; flags given on the command line
override it.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .exact import BeyondCriticalTimeError
from .hamiltonian import CflInfeasibleError, ConfigurationError
from .harness import DT_POLICIES, THETA_CFL_MIN, RunConfig, run_alpha_sweep, run_convergence, run_property_suite, run_single
from .numerics import DomainError
from .problems import PROBLEMS, SCHEMES
from .solver import CflViolationError, NumericalFailureError

log = logging.getLogger("caputo_hj")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CFL = 3
EXIT_NUMERICAL = 4
EXIT_PROPERTY = 5


def _theta(text: str) -> float | str:
    return text if text == THETA_CFL_MIN else float(text)


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # defaults are None so that only explicit flags override the config file
    common.add_argument("--config", type=Path, help="JSON file with RunConfig fields")
    common.add_argument("--problem", choices=PROBLEMS)
    common.add_argument("--alpha", type=float)
    common.add_argument("--scheme", choices=SCHEMES)
    common.add_argument("--theta", type=_theta,
                        help="Lax-Friedrichs viscosity, or 'cfl_min' for the lower CFL end")
    common.add_argument("--dt", type=float)
    common.add_argument("--h", type=float, nargs="+", help="spacing, or a halving ladder")
    common.add_argument("--T", type=float, dest="T")
    common.add_argument("--dim", type=int, choices=(1, 2))
    common.add_argument("--box", type=float, nargs=2, metavar=("LO", "HI"))
    common.add_argument("--boundary", choices=("periodic", "dirichlet_from_exact", "dirichlet_frozen"))
    common.add_argument("--out", type=str)
    common.add_argument("--seed", type=int)
    common.add_argument("--allow-unstable", action="store_true", default=None, dest="allow_unstable")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="caputo-hj", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="single solve with snapshot and manifest")
    conv = sub.add_parser("converge", parents=[common], help="error table over an h ladder")
    conv.add_argument("--dt-policy", choices=DT_POLICIES, dest="dt_policy")
    sweep = sub.add_parser("sweep", parents=[common], help="final profiles for several alpha")
    sweep.add_argument("--alphas", type=float, nargs="+")
    ver = sub.add_parser("verify", parents=[common], help="randomised property suite")
    ver.add_argument("--trials", type=int)
    return p


def build_config(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError("config file must hold a JSON object")
    skip = {"config", "command", "verbose"}
    for key, value in vars(args).items():
        if key not in skip and value is not None:
            data[key] = value
    if isinstance(data.get("h"), list) and len(data["h"]) == 1:
        data["h"] = data["h"][0]
    try:
        return RunConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc


def _dispatch(cfg: RunConfig, command: str) -> int:
    if command == "run":
        m = run_single(cfg)
        msg = f"wrote {cfg.out}: {m['steps']} steps, dt={m['dt_used']:g}"
        if "l_inf_error" in m:
            msg += f", l_inf error {m['l_inf_error']:.3e} at t={m['t_compare']:g}"
        print(msg)
        return EXIT_OK
    if command == "converge":
        table = run_convergence(cfg)
        print("h,dt,l_inf_error,observed_rate")
        for r in table.rows:
            rate = "" if r.observed_rate is None else f"{r.observed_rate:.3f}"
            print(f"{r.h:g},{r.dt:g},{r.l_inf_error:.6e},{rate}")
        print(f"summary rate {table.summary_rate:.3f}")
        return EXIT_OK
    if command == "sweep":
        profiles = run_alpha_sweep(cfg)
        print(f"wrote {len(profiles)} profiles to {cfg.out}/profiles.csv")
        return EXIT_OK
    report = run_property_suite(cfg)
    for e in report["entries"]:
        tag = "PASS" if e["passed"] else "FAIL"
        note = " (expected violation)" if e["expected_failure"] else ""
        print(f"{tag} {e['name']}{note}")
    return EXIT_OK if report["passed"] else EXIT_PROPERTY


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = build_config(args)
        return _dispatch(cfg, args.command)
    except (CflInfeasibleError, CflViolationError) as exc:
        log.error("CFL: %s", exc)
        return EXIT_CFL
    except NumericalFailureError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except (ConfigurationError, BeyondCriticalTimeError, DomainError) as exc:
        log.error("configuration: %s", exc)
        return EXIT_CONFIG
    except ValueError as exc:
        # remaining validation errors (grid shape, box) are configuration problems too
        log.error("configuration: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
