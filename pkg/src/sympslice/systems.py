"""Bundled example systems with exact action maps.

All bundled actions are isometries of flat or bi-invariant metrics, so exact
invariance holds and finite-difference error dominates every residual.
Rotation actions carry exact chart Jacobians.

Golden points record the expected normal-space dimensions and case flags for
each system; the recorded flag set is the *required subset* (several case
predicates overlap, e.g. abelian groups are always totally isotropic), and
``forbidden_flags`` pins down flags that must be absent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geometry import ChartDomainError, FDConfig, MechanicalGSystem
from .liealg import abelian, so3


class UnknownSystemError(KeyError):
    pass


class InvalidParamsError(ValueError):
    pass


# SO(3) primitives -------------------------------------------------------------

def hat(v: np.ndarray) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(m: np.ndarray) -> np.ndarray:
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def _sinc_coeffs(theta: float) -> tuple[float, float, float]:
    """(sin t / t, (1 - cos t) / t^2, (t - sin t) / t^3) with small-angle series."""
    t2 = theta * theta
    if theta < 1e-4:
        return (
            1.0 - t2 / 6.0 + t2 * t2 / 120.0,
            0.5 - t2 / 24.0 + t2 * t2 / 720.0,
            1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0,
        )
    s, c = math.sin(theta), math.cos(theta)
    return s / theta, (1.0 - c) / t2, (theta - s) / (t2 * theta)


def rotation(xi: np.ndarray) -> np.ndarray:
    """Rotation matrix Exp(hat(xi)) by the Rodrigues formula."""
    xi = np.asarray(xi, dtype=float)
    theta = float(np.linalg.norm(xi))
    a, b, _ = _sinc_coeffs(theta)
    k = hat(xi)
    return np.eye(3) + a * k + b * (k @ k)


def rotation_log(r: np.ndarray, max_angle: float = math.pi - 0.15) -> np.ndarray:
    """Inverse of :func:`rotation` for angles safely below pi."""
    c = (np.trace(r) - 1.0) / 2.0
    theta = math.acos(min(1.0, max(-1.0, c)))
    if theta > max_angle:
        raise ChartDomainError(f"rotation angle {theta:.3f} outside the exponential chart")
    w = vee(0.5 * (r - r.T))  # equals sin(theta) * axis
    a, _, _ = _sinc_coeffs(theta)
    return w / a


def so3_right_jacobian(x: np.ndarray) -> np.ndarray:
    """J with d/dt Exp(x(t)) = Exp(x) hat(J(x) xdot); bi-invariant metric Gram is J^T J."""
    x = np.asarray(x, dtype=float)
    theta = float(np.linalg.norm(x))
    _, b, c = _sinc_coeffs(theta)
    k = hat(x)
    return np.eye(3) - b * k + c * (k @ k)


def planar_rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


# system builders --------------------------------------------------------------

def _so3_r3(params: dict) -> MechanicalGSystem:
    _reject_params(params, ())
    def action(xi, x):
        return rotation(xi) @ np.asarray(x, dtype=float)
    return MechanicalGSystem(
        algebra=so3(),
        chart_dim=3,
        action=action,
        metric=lambda x: np.eye(3),
        action_dx=lambda xi, x: rotation(xi),
        generator_fn=lambda xi, x: np.cross(xi, x),
        label="so3_r3",
    )


def _so3_two_body(params: dict) -> MechanicalGSystem:
    masses = _reject_params(params, ("masses",)).get("masses", (1.0, 1.0))
    try:
        m1, m2 = (float(m) for m in masses)
    except (TypeError, ValueError) as exc:
        raise InvalidParamsError(f"masses must be a pair of reals, got {masses!r}") from exc
    if m1 <= 0 or m2 <= 0:
        raise InvalidParamsError("masses must be positive")
    g = np.diag([m1, m1, m1, m2, m2, m2])

    def action(xi, x):
        r = rotation(xi)
        x = np.asarray(x, dtype=float)
        return np.concatenate([r @ x[:3], r @ x[3:]])

    def action_dx(xi, x):
        r = rotation(xi)
        out = np.zeros((6, 6))
        out[:3, :3] = r
        out[3:, 3:] = r
        return out

    def generator_fn(xi, x):
        x = np.asarray(x, dtype=float)
        return np.concatenate([np.cross(xi, x[:3]), np.cross(xi, x[3:])])

    return MechanicalGSystem(
        algebra=so3(),
        chart_dim=6,
        action=action,
        metric=lambda x: g,
        action_dx=action_dx,
        generator_fn=generator_fn,
        label="so3_two_body",
    )


def _torus2_r4(params: dict) -> MechanicalGSystem:
    _reject_params(params, ())

    def block(xi):
        out = np.zeros((4, 4))
        out[:2, :2] = planar_rotation(float(xi[0]))
        out[2:, 2:] = planar_rotation(float(xi[1]))
        return out

    def generator_fn(xi, x):
        return np.array([-xi[0] * x[1], xi[0] * x[0], -xi[1] * x[3], xi[1] * x[2]])

    return MechanicalGSystem(
        algebra=abelian(2, label="torus2"),
        chart_dim=4,
        action=lambda xi, x: block(xi) @ np.asarray(x, dtype=float),
        metric=lambda x: np.eye(4),
        action_dx=lambda xi, x: block(xi),
        generator_fn=generator_fn,
        label="torus2_r4",
    )


def _so3_on_so3(params: dict) -> MechanicalGSystem:
    _reject_params(params, ())

    def action(xi, x):
        return rotation_log(rotation(xi) @ rotation(x))

    def metric(x):
        j = so3_right_jacobian(x)
        return j.T @ j

    def action_dx(xi, x):
        z = action(xi, x)
        return np.linalg.solve(so3_right_jacobian(z), so3_right_jacobian(x))

    def generator_fn(xi, x):
        # spatial velocity of t |-> Exp(t xi) Exp(x) is xi, so the chart
        # velocity solves J_l(x) zdot = xi with J_l the left Jacobian
        return np.linalg.solve(so3_right_jacobian(x).T, np.asarray(xi, dtype=float))

    return MechanicalGSystem(
        algebra=so3(),
        chart_dim=3,
        action=action,
        metric=metric,
        action_dx=action_dx,
        generator_fn=generator_fn,
        label="so3_on_so3",
    )


def _reject_params(params: dict, allowed: tuple) -> dict:
    params = dict(params or {})
    unknown = set(params) - set(allowed)
    if unknown:
        raise InvalidParamsError(f"unknown parameters: {sorted(unknown)}")
    return params


# registry ---------------------------------------------------------------------

@dataclass(frozen=True)
class GoldenPoint:
    """A fixture point with its expected normal-space dimensions and flags."""

    name: str
    x: tuple
    p: Optional[tuple] = None
    eta: Optional[tuple] = None
    s: Optional[tuple] = None
    dim_V: int = 0
    blocks: tuple = (0, 0, 0)
    required_flags: frozenset = frozenset()
    forbidden_flags: frozenset = frozenset()
    j_is_zero: Optional[bool] = None
    note: str = ""

    def covector(self, system: MechanicalGSystem) -> np.ndarray:
        """The chart covector, either stored directly or as FL(eta_Q(x) + s)."""
        if self.p is not None:
            return np.asarray(self.p, dtype=float)
        x = np.asarray(self.x, dtype=float)
        from .geometry import generator  # local to avoid import cycles at module load

        v = generator(system, np.asarray(self.eta, dtype=float), x) + np.asarray(self.s, dtype=float)
        return system.metric(x) @ v


@dataclass(frozen=True)
class SystemDescriptor:
    key: str
    description: str
    builder: Callable[[dict], MechanicalGSystem] = field(repr=False)
    params: dict = field(default_factory=dict)
    golden_points: tuple = ()

    def as_dict(self) -> dict:
        return {
            "key": self.key,
            "description": self.description,
            "params": dict(self.params),
            "golden_points": [
                {
                    "name": g.name,
                    "x": list(g.x),
                    "p": list(g.p) if g.p is not None else None,
                    "eta": list(g.eta) if g.eta is not None else None,
                    "s": list(g.s) if g.s is not None else None,
                    "dim_V": g.dim_V,
                    "blocks": list(g.blocks),
                    "required_flags": sorted(g.required_flags),
                    "forbidden_flags": sorted(g.forbidden_flags),
                    "j_is_zero": g.j_is_zero,
                    "note": g.note,
                }
                for g in self.golden_points
            ],
        }


_REGISTRY: dict[str, SystemDescriptor] = {}


def _register(descriptor: SystemDescriptor) -> None:
    _REGISTRY[descriptor.key] = descriptor


_register(SystemDescriptor(
    key="so3_r3",
    description="SO(3) acting on R^3 by rotations, Euclidean metric",
    builder=_so3_r3,
    golden_points=(
        GoldenPoint(
            name="tangential_covector",
            x=(0.0, 0.0, 1.0),
            p=(0.0, -1.0, 0.0),
            dim_V=2,
            blocks=(0, 1, 1),
            required_flags=frozenset({"VerticalCovector"}),
            forbidden_flags=frozenset({"TotallyIsotropic", "LocallyFree", "HsubGmu", "Generic"}),
            j_is_zero=True,
            note="nonzero momentum along the orbit; N is T*S",
        ),
        GoldenPoint(
            name="zero_covector",
            x=(0.0, 0.0, 1.0),
            p=(0.0, 0.0, 0.0),
            dim_V=2,
            blocks=(0, 1, 1),
            required_flags=frozenset(
                {"TotallyIsotropic", "VerticalCovector", "TrivialSliceAction"}
            ),
            forbidden_flags=frozenset({"LocallyFree", "Generic"}),
            j_is_zero=True,
            note="zero momentum; isotropy acts trivially on the radial slice",
        ),
    ),
))

_register(SystemDescriptor(
    key="so3_two_body",
    description="SO(3) acting diagonally on R^3 x R^3, mass-weighted flat metric",
    builder=_so3_two_body,
    params={"masses": (1.0, 1.0)},
    golden_points=(
        GoldenPoint(
            name="generic_two_body",
            x=(0.0, 0.0, 1.0, 0.0, 0.0, 0.0),
            eta=(1.0, 0.0, 0.0),
            s=(0.0, 0.0, 0.3, 0.2, 0.5, 0.1),
            dim_V=8,
            blocks=(0, 4, 4),
            required_flags=frozenset({"Generic"}),
            forbidden_flags=frozenset(
                {"TotallyIsotropic", "VerticalCovector", "LocallyFree",
                 "TrivialSliceAction", "HsubGmu"}
            ),
            j_is_zero=False,
            note="the j != 0 exercise point: off-axis slice momentum",
        ),
    ),
))

_register(SystemDescriptor(
    key="torus2_r4",
    description="T^2 acting on R^4 by independent plane rotations",
    builder=_torus2_r4,
    golden_points=(
        GoldenPoint(
            name="free_point",
            x=(1.0, 0.0, 1.0, 0.0),
            p=(0.3, 1.1, -0.4, 0.8),
            dim_V=4,
            blocks=(0, 2, 2),
            required_flags=frozenset({"TotallyIsotropic", "LocallyFree", "HsubGmu"}),
            forbidden_flags=frozenset({"VerticalCovector", "Generic"}),
            j_is_zero=True,
            note="free abelian point; omega purely canonical",
        ),
        GoldenPoint(
            name="fixed_plane_point",
            x=(1.0, 0.0, 0.0, 0.0),
            p=(0.0, 1.0, 0.0, 0.0),
            dim_V=6,
            blocks=(0, 3, 3),
            required_flags=frozenset({"TotallyIsotropic", "HsubGmu"}),
            forbidden_flags=frozenset({"LocallyFree", "Generic"}),
            j_is_zero=True,
            note="nontrivial isotropy with nontrivial slice action and momentum map",
        ),
    ),
))

_register(SystemDescriptor(
    key="so3_on_so3",
    description="SO(3) on itself by left translation, exponential chart, bi-invariant metric",
    builder=_so3_on_so3,
    golden_points=(
        GoldenPoint(
            name="identity_generic",
            x=(0.0, 0.0, 0.0),
            p=(0.7, 0.2, 0.5),
            dim_V=2,
            blocks=(2, 0, 0),
            required_flags=frozenset({"LocallyFree"}),
            forbidden_flags=frozenset({"TotallyIsotropic", "Generic"}),
            j_is_zero=True,
            note="free transitive action (S = 0, so the covector is trivially "
                 "vertical); N carries the full coadjoint-orbit KKS block",
        ),
    ),
))


def list_systems() -> list[SystemDescriptor]:
    """All bundled system descriptors, in stable key order."""
    return [_REGISTRY[k] for k in sorted(_REGISTRY)]


def instantiate(key: str, params: Optional[dict] = None, fd: Optional[FDConfig] = None) -> MechanicalGSystem:
    """Build a bundled system, validating it at its golden points.

    Validation covers the action-identity and metric-definiteness contracts
    plus a metric-invariance probe; the Jacobi identity is enforced by the
    algebra constructor.
    """
    if key not in _REGISTRY:
        raise UnknownSystemError(f"unknown system {key!r}; known: {sorted(_REGISTRY)}")
    desc = _REGISTRY[key]
    merged = dict(desc.params)
    merged.update(params or {})
    system = desc.builder(merged)
    if fd is not None:
        system = system.with_fd(fd)
    from .fdchecks import metric_invariance_check  # late import: fdchecks sits above systems

    rng = np.random.default_rng(1)
    for g in desc.golden_points:
        x = np.asarray(g.x, dtype=float)
        system.validate_at(x)
        probe = metric_invariance_check(
            system, x, rng.standard_normal(system.algebra.dim),
            rng.standard_normal(system.chart_dim), rng.standard_normal(system.chart_dim))
        if probe.residual > 1e-6:
            raise InvalidParamsError(
                f"system {key!r} fails metric invariance at {g.name} "
                f"(residual {probe.residual:.3e})")
    return system
