"""Command-line front end: describe | verify | list.

``describe`` runs the full pipeline (instantiate, analyze the point, split,
build the normal space) and emits a single deterministic JSON report;
``verify`` runs the invariant suite on a configured point or on all bundled
golden points; ``list`` prints the registry.

Configuration comes from a TOML or JSON file (--config) with CLI flags
overriding file values.  Exit codes: 0 success, 1 failed verification check,
2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .geometry import ChartDomainError, FDConfig, MechanicalGSystem
from .normalspace import (
    NormalFormAssemblyError,
    analyze_point,
    build_normal_space,
    point_splitting,
)
from .residuals import ResidualReport
from .subspaces import DEFAULT_RANK_TOL, LinAlgContractError
from .systems import InvalidParamsError, UnknownSystemError, instantiate, list_systems
from .verify import point_suite
from .wittartin import SplittingError, verify_splitting

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

SCHEMA = "slice-report/1"


class ConfigError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


@dataclass
class RunConfig:
    """A fully resolved run: system, point, covector and numerics."""

    system: str
    params: dict = field(default_factory=dict)
    point: Optional[list] = None
    covector: Optional[list] = None
    eta: Optional[list] = None
    s: Optional[list] = None
    fd_step: Optional[float] = None
    rank_tol: Optional[float] = None
    check_tol: Optional[float] = None
    out: Optional[str] = None
    format: str = "json"

    def resolved_rank_tol(self) -> float:
        return self.rank_tol if self.rank_tol is not None else DEFAULT_RANK_TOL

    def fd_config(self) -> Optional[FDConfig]:
        if self.fd_step is None:
            return None
        base = FDConfig()
        return base.scaled(self.fd_step / base.step)


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    text = blob.decode("utf-8")
    if path.endswith(".json"):
        return json.loads(text)
    if path.endswith(".toml"):
        return _parse_toml(blob)
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return _parse_toml(blob)


def _parse_toml(blob: bytes) -> dict:
    try:
        import tomllib  # python >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib
    try:
        return tomllib.loads(blob.decode("utf-8"))
    except Exception as exc:
        raise ConfigError(f"config file is neither valid JSON nor TOML: {exc}") from exc


_CONFIG_KEYS = {"system", "params", "point", "covector", "eta", "s",
                "fd_step", "rank_tol", "check_tol", "out", "format"}


def build_run_config(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if getattr(args, "config", None):
        file_data = _load_config_file(args.config)
        unknown = set(file_data) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data.update(file_data)
    for key, attr in (("system", "system"), ("point", "point"), ("covector", "covector"),
                      ("eta", "eta"), ("s", "s"), ("fd_step", "fd_step"),
                      ("rank_tol", "rank_tol"), ("check_tol", "check_tol"),
                      ("out", "out"), ("format", "format")):
        val = getattr(args, attr, None)
        if val is not None:
            data[key] = val
    if "system" not in data or not data["system"]:
        raise ConfigError("a system key is required (--system or config file)")
    cfg = RunConfig(
        system=str(data["system"]),
        params=dict(data.get("params") or {}),
        point=list(data["point"]) if data.get("point") is not None else None,
        covector=list(data["covector"]) if data.get("covector") is not None else None,
        eta=list(data["eta"]) if data.get("eta") is not None else None,
        s=list(data["s"]) if data.get("s") is not None else None,
        fd_step=float(data["fd_step"]) if data.get("fd_step") is not None else None,
        rank_tol=float(data["rank_tol"]) if data.get("rank_tol") is not None else None,
        check_tol=float(data["check_tol"]) if data.get("check_tol") is not None else None,
        out=data.get("out"),
        format=str(data.get("format", "json")),
    )
    if cfg.format not in ("json", "text"):
        raise ConfigError(f"unknown format {cfg.format!r}")
    return cfg


def resolve_point(cfg: RunConfig, system: MechanicalGSystem) -> tuple[np.ndarray, np.ndarray]:
    """Validate the config vectors and produce (x, p_x)."""
    if cfg.point is None:
        raise ConfigError("a chart point is required (--point or config file)")
    x = np.asarray(cfg.point, dtype=float)
    if x.shape != (system.chart_dim,):
        raise ConfigError(
            f"point has length {x.size}, chart dimension is {system.chart_dim}")
    has_p = cfg.covector is not None
    has_eta_s = cfg.eta is not None or cfg.s is not None
    if has_p == has_eta_s:
        raise ConfigError("provide exactly one of a covector or an (eta, s) pair")
    if has_p:
        p = np.asarray(cfg.covector, dtype=float)
        if p.shape != (system.chart_dim,):
            raise ConfigError(
                f"covector has length {p.size}, chart dimension is {system.chart_dim}")
        return x, p
    if cfg.eta is None or cfg.s is None:
        raise ConfigError("eta and s must be given together")
    eta = np.asarray(cfg.eta, dtype=float)
    s = np.asarray(cfg.s, dtype=float)
    if eta.shape != (system.algebra.dim,):
        raise ConfigError(
            f"eta has length {eta.size}, algebra dimension is {system.algebra.dim}")
    if s.shape != (system.chart_dim,):
        raise ConfigError(f"s has length {s.size}, chart dimension is {system.chart_dim}")
    from .geometry import generator

    velocity = generator(system, eta, x) + s
    return x, system.metric(x) @ velocity


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()] if value.ndim else float(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (frozenset, set)):
        return sorted(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _assert_finite(node, path="report"):
    if isinstance(node, float):
        if not math.isfinite(node):
            raise NumericalFailure(f"non-finite value at {path}")
    elif isinstance(node, dict):
        for k, v in node.items():
            _assert_finite(v, f"{path}.{k}")
    elif isinstance(node, list):
        for i, v in enumerate(node):
            _assert_finite(v, f"{path}[{i}]")


def build_report(cfg: RunConfig) -> dict:
    system = instantiate(cfg.system, cfg.params, fd=cfg.fd_config())
    x, p_x = resolve_point(cfg, system)
    system.validate_at(x)  # probes the chart domain through the action itself
    rank_tol = cfg.resolved_rank_tol()
    pd = analyze_point(system, x, p_x, rank_tol)
    splitting = point_splitting(pd, rank_tol)
    result = build_normal_space(pd, splitting, rank_tol)
    residuals = [r.as_dict() for r in verify_splitting(splitting, system.algebra, pd.mu, pd.g_px)]
    residuals.append(ResidualReport(
        "normal.block_form", result.block_residual, 1e-8,
        "assembled omega vs block normal form").as_dict())

    frame = pd.frame
    report = {
        "schema": SCHEMA,
        "system": {"key": cfg.system, "params": _jsonable(cfg.params)},
        "point": _jsonable(x),
        "covector": _jsonable(p_x),
        "mu": _jsonable(pd.mu),
        "eta": _jsonable(pd.eta),
        "s": _jsonable(pd.s),
        "alpha": _jsonable(pd.alpha),
        "dims": {
            "g": system.algebra.dim,
            "h": frame.h.dim,
            "r": frame.r.dim,
            "S": frame.s_dim,
            "g_mu": splitting.g_mu.dim,
            "h_mu": splitting.h_mu.dim,
            "p": splitting.p.dim,
            "q_mu": splitting.q_mu.dim,
            "k": splitting.k.dim,
            "B": pd.B.dim,
            "V": result.dim_V,
            "g_px": pd.g_px.dim,
        },
        "blocks": list(result.block_dims),
        "bases": {
            "h": _jsonable(frame.h.basis),
            "r": _jsonable(frame.r.basis),
            "S": _jsonable(frame.S.basis),
            "g_mu": _jsonable(splitting.g_mu.basis),
            "h_mu": _jsonable(splitting.h_mu.basis),
            "p": _jsonable(splitting.p.basis),
            "q_mu": _jsonable(splitting.q_mu.basis),
            "k": _jsonable(splitting.k.basis),
            "B": _jsonable(pd.B.basis),
            "g_px": _jsonable(pd.g_px.basis),
            "V": _jsonable(result.V_basis),
        },
        "omega": _jsonable(result.omega.matrix),
        "omega_block": _jsonable(result.omega_block),
        "block_residual": float(result.block_residual),
        "case_flags": sorted(result.case_flags),
        "j_matrix": _jsonable(result.j_matrix.matrix),
        "jn_tensor": _jsonable(result.JN_tensor),
        "residuals": residuals,
        "numerics": {
            "fd_step": system.fd.step,
            "fd_mixed_step": system.fd.mixed_step,
            "richardson": system.fd.richardson,
            "rank_tol": rank_tol,
        },
        "versions": {
            "sympslice": __version__,
            "schema": SCHEMA,
        },
    }
    _assert_finite(report)
    return report


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_describe(args: argparse.Namespace) -> int:
    cfg = build_run_config(args)
    report = build_report(cfg)
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", cfg.out)
    return EXIT_OK


def _verify_tasks(args: argparse.Namespace) -> list[tuple[str, MechanicalGSystem, np.ndarray, np.ndarray, float, Optional[float]]]:
    tasks = []
    if getattr(args, "all_bundled", False):
        fd = None
        if getattr(args, "fd_step", None) is not None:
            fd = FDConfig().scaled(args.fd_step / FDConfig().step)
        rank_tol = args.rank_tol if getattr(args, "rank_tol", None) is not None else DEFAULT_RANK_TOL
        for desc in list_systems():
            system = instantiate(desc.key, fd=fd)
            for g in desc.golden_points:
                x = np.asarray(g.x, dtype=float)
                p = g.covector(system)
                tasks.append((f"{desc.key}:{g.name}", system, x, p, rank_tol,
                              getattr(args, "check_tol", None)))
        return tasks
    cfg = build_run_config(args)
    system = instantiate(cfg.system, cfg.params, fd=cfg.fd_config())
    x, p = resolve_point(cfg, system)
    system.validate_at(x)
    tasks.append((f"{cfg.system}:config", system, x, p, cfg.resolved_rank_tol(),
                  cfg.check_tol))
    return tasks


def cmd_verify(args: argparse.Namespace) -> int:
    tasks = _verify_tasks(args)

    def run(task):
        name, system, x, p, rank_tol, check_tol = task
        reports = point_suite(system, x, p, rank_tol=rank_tol)
        if check_tol is not None:
            reports = [ResidualReport(r.name, r.residual, float(check_tol), r.context)
                       for r in reports]
        return [(name, r) for r in reports]

    workers = int(os.environ.get("SLICE_NUM_THREADS", "1") or "1")
    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(run, tasks))
    else:
        chunks = [run(t) for t in tasks]
    flat = sorted((item for chunk in chunks for item in chunk),
                  key=lambda pair: (pair[0], pair[1].name))

    fmt = getattr(args, "format", None) or "text"
    if fmt == "json":
        payload = [dict(task=t, **r.as_dict()) for t, r in flat]
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        lines = [f"[{'pass' if r.passed else 'FAIL'}] {t}/{r.name} "
                 f"residual={r.residual:.3e} tol={r.tolerance:.1e}"
                 for t, r in flat]
        ok = all(r.passed for _, r in flat)
        lines.append(f"{'all checks passed' if ok else 'FAILURES PRESENT'} "
                     f"({sum(r.passed for _, r in flat)}/{len(flat)})")
        text = "\n".join(lines) + "\n"
    _emit(text, getattr(args, "out", None))
    return EXIT_OK if all(r.passed for _, r in flat) else EXIT_CHECK_FAILED


def cmd_list(args: argparse.Namespace) -> int:
    descriptors = list_systems()
    fmt = getattr(args, "format", None) or "text"
    if fmt == "json":
        text = json.dumps([d.as_dict() for d in descriptors], indent=2, sort_keys=True) + "\n"
    else:
        lines = []
        for d in descriptors:
            lines.append(f"{d.key}: {d.description}")
            for g in d.golden_points:
                lines.append(f"  - {g.name}: x={list(g.x)}, dim V={g.dim_V}, "
                             f"flags>={sorted(g.required_flags)}")
        text = "\n".join(lines) + "\n"
    _emit(text, getattr(args, "out", None))
    return EXIT_OK


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML or JSON config file")
    p.add_argument("--system", help="bundled system key")
    p.add_argument("--point", nargs="+", type=float, help="chart point")
    p.add_argument("--covector", nargs="+", type=float, help="chart covector p_x")
    p.add_argument("--eta", nargs="+", type=float, help="algebra vector for p = FL(eta_Q(x) + s)")
    p.add_argument("--s", nargs="+", type=float, help="slice vector for p = FL(eta_Q(x) + s)")
    p.add_argument("--fd-step", dest="fd_step", type=float, help="finite-difference step")
    p.add_argument("--rank-tol", dest="rank_tol", type=float, help="relative rank tolerance")
    p.add_argument("--check-tol", dest="check_tol", type=float,
                   help="override every check tolerance (verify)")
    p.add_argument("--out", help="write output to this path instead of stdout")
    p.add_argument("--format", choices=("json", "text"), help="output format")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sympslice",
        description="Symplectic normal spaces of cotangent-lifted actions",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_desc = sub.add_parser("describe", help="compute the normal space at a point")
    _add_common_flags(p_desc)
    p_ver = sub.add_parser("verify", help="run the invariant suite")
    _add_common_flags(p_ver)
    p_ver.add_argument("--all-bundled", action="store_true", dest="all_bundled",
                       help="verify every bundled golden point")
    p_list = sub.add_parser("list", help="list bundled systems")
    p_list.add_argument("--format", choices=("json", "text"), help="output format")
    p_list.add_argument("--out", help="write output to this path")
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    handlers = {"describe": cmd_describe, "verify": cmd_verify, "list": cmd_list}
    try:
        return handlers[args.command](args)
    except (ConfigError, UnknownSystemError, InvalidParamsError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, SplittingError, NormalFormAssemblyError,
            LinAlgContractError, ChartDomainError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
