"""Potentials, problem configuration, and the discretized doubled action.

The dynamics of a point particle of mass m in a potential V(x) is recast as
free geodesic motion in a metric with temporal component

    g00(x) = c^2 + 2 V(x) / m,    g11 = -1,

and both t(gamma) and x(gamma) become unknowns over the world-line parameter
gamma.  For a causal initial value problem the degrees of freedom are
doubled into a forward branch (t1, x1) and a backward branch (t2, x2) that
enters the action with opposite sign.  Eight Lagrange multipliers enforce
the four initial conditions on branch 1 and the four conditions connecting
the two branches at the final grid point.

The discrete action evaluated here is

    E = 1/2 (Dr t1)^T diag[g00(x1)] Hb (Dr t1) - 1/2 (Dr x1)^T Hb (Dr x1)
      - (same with branch 2)
      + lam . constraints

with Dr the regularized SBP operator, Hb the zero-padded quadrature, and
the constraint rows built from the classical operator D.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .sbp import MIN_POINTS, SbpOperator, build_operator, regularize

__all__ = [
    "InvalidConfig",
    "Potential",
    "free_potential",
    "linear_potential",
    "quartic_potential",
    "custom_potential",
    "ProblemConfig",
    "StateVector",
    "DiscreteAction",
    "metric_g00",
    "action_value",
    "action_gradient",
    "action_hessian",
]


class InvalidConfig(ValueError):
    """Raised when a problem configuration violates its invariants."""


@dataclass(frozen=True)
class Potential:
    """Scalar potential with first and second derivatives.

    ``v``, ``dv`` and ``d2v`` accept scalars or arrays elementwise.  The
    label doubles as the serialization type tag; ``params`` holds the
    named coefficients of the built-in families.
    """

    v: Callable
    dv: Callable
    d2v: Callable
    label: str
    params: dict = field(default_factory=dict)

    @property
    def is_free(self) -> bool:
        return self.label == "free"


def free_potential() -> Potential:
    """V = 0: flat metric, straight-line geodesics."""
    zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))
    return Potential(v=zero, dv=zero, d2v=zero, label="free")


def linear_potential(alpha: float) -> Potential:
    """V = alpha * x, a constant force."""
    alpha = float(alpha)
    return Potential(
        v=lambda x: alpha * np.asarray(x, dtype=float),
        dv=lambda x: np.full_like(np.asarray(x, dtype=float), alpha),
        d2v=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        label="linear",
        params={"alpha": alpha},
    )


def quartic_potential(kappa: float) -> Potential:
    """V = kappa * x^4, strongly anharmonic."""
    kappa = float(kappa)
    return Potential(
        v=lambda x: kappa * np.asarray(x, dtype=float) ** 4,
        dv=lambda x: 4.0 * kappa * np.asarray(x, dtype=float) ** 3,
        d2v=lambda x: 12.0 * kappa * np.asarray(x, dtype=float) ** 2,
        label="quartic",
        params={"kappa": kappa},
    )


def custom_potential(v, dv, d2v=None, label="custom") -> Potential:
    """User-supplied potential; d2v falls back to differencing dv."""
    if d2v is None:

        def d2v(x, _dv=dv):
            x = np.asarray(x, dtype=float)
            h = 1e-5 * (1.0 + np.abs(x))
            return (_dv(x + h) - _dv(x - h)) / (2.0 * h)

    return Potential(v=v, dv=dv, d2v=d2v, label=label)


_POTENTIAL_BUILDERS = {
    "free": lambda params: free_potential(),
    "linear": lambda params: linear_potential(params["alpha"]),
    "quartic": lambda params: quartic_potential(params["kappa"]),
}


@dataclass(frozen=True)
class ProblemConfig:
    """Physical constants, initial data, grid, and operator choice.

    The initial world-line velocities tdot_i and xdot_i are individually
    free; only their ratio xdot_i/tdot_i is the physical initial velocity,
    which must stay below c.  The simulated time window is not prescribed:
    it emerges from the evolution and scales with tdot_i.
    """

    potential: Potential
    m: float = 1.0
    c: float = 1.0
    t_i: float = 0.0
    x_i: float = 1.0
    tdot_i: float = 1.0
    xdot_i: float = 0.1
    n_gamma: int = 32
    gamma_i: float = 0.0
    gamma_f: float = 1.0
    order: str = "sbp21"

    def __post_init__(self):
        object.__setattr__(self, "order", self.order.lower())
        if self.order not in MIN_POINTS:
            raise InvalidConfig(f"unknown operator order {self.order!r}")
        if self.m <= 0 or self.c <= 0:
            raise InvalidConfig("mass and speed of light must be positive")
        if not self.tdot_i > 0:
            raise InvalidConfig("tdot_i must be positive: time flows forward")
        if not self.gamma_f > self.gamma_i:
            raise InvalidConfig("gamma_f must exceed gamma_i")
        if self.n_gamma < MIN_POINTS[self.order]:
            raise InvalidConfig(
                f"{self.order} needs n_gamma >= {MIN_POINTS[self.order]}, "
                f"got {self.n_gamma}"
            )
        if not abs(self.v_init) < self.c:
            raise InvalidConfig(
                f"initial velocity {self.v_init} is not below the speed of light"
            )

    @property
    def v_init(self) -> float:
        """Physical initial velocity dx/dt."""
        return self.xdot_i / self.tdot_i

    @property
    def dgamma(self) -> float:
        return (self.gamma_f - self.gamma_i) / (self.n_gamma - 1)

    @property
    def gamma_grid(self) -> np.ndarray:
        return np.linspace(self.gamma_i, self.gamma_f, self.n_gamma)

    def build_operator(self) -> SbpOperator:
        return build_operator(self.order, self.n_gamma, self.dgamma)

    def to_json_dict(self) -> dict:
        if self.potential.label not in _POTENTIAL_BUILDERS:
            raise InvalidConfig(
                f"potential {self.potential.label!r} is not serializable"
            )
        return {
            "m": self.m,
            "c": self.c,
            "t_i": self.t_i,
            "x_i": self.x_i,
            "tdot_i": self.tdot_i,
            "xdot_i": self.xdot_i,
            "n_gamma": self.n_gamma,
            "gamma_i": self.gamma_i,
            "gamma_f": self.gamma_f,
            "order": self.order,
            "potential": {"type": self.potential.label, **self.potential.params},
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ProblemConfig":
        try:
            pot_spec = dict(data["potential"])
            pot_type = pot_spec.pop("type")
            potential = _POTENTIAL_BUILDERS[pot_type](pot_spec)
        except KeyError as exc:
            raise InvalidConfig(f"bad potential specification: {exc}") from exc
        kwargs = {k: v for k, v in data.items() if k != "potential"}
        try:
            return cls(potential=potential, **kwargs)
        except TypeError as exc:
            raise InvalidConfig(str(exc)) from exc

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ProblemConfig":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class StateVector:
    """Unknowns of the discrete variational problem.

    Four coordinate vectors of length n plus eight multipliers; packs to a
    flat vector of length 4n + 8 in the order (t1, t2, x1, x2, lam).
    """

    t1: np.ndarray
    t2: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        for name in ("t1", "t2", "x1", "x2", "lam"):
            object.__setattr__(
                self, name, np.asarray(getattr(self, name), dtype=float)
            )
        n = self.t1.shape
        if not (self.t2.shape == self.x1.shape == self.x2.shape == n):
            raise ValueError("coordinate vectors must share one length")
        if self.lam.shape != (8,):
            raise ValueError("exactly eight Lagrange multipliers are required")

    @property
    def n(self) -> int:
        return self.t1.shape[0]

    def pack(self) -> np.ndarray:
        return np.concatenate([self.t1, self.t2, self.x1, self.x2, self.lam])

    @classmethod
    def unpack(cls, z: np.ndarray, n: int) -> "StateVector":
        z = np.asarray(z, dtype=float)
        if z.shape != (4 * n + 8,):
            raise ValueError(f"expected a packed vector of length {4 * n + 8}")
        return cls(
            t1=z[:n],
            t2=z[n : 2 * n],
            x1=z[2 * n : 3 * n],
            x2=z[3 * n : 4 * n],
            lam=z[4 * n :],
        )


def metric_g00(x, cfg: ProblemConfig):
    """Temporal metric component c^2 + 2 V(x)/m, elementwise."""
    x = np.asarray(x, dtype=float)
    return cfg.c ** 2 + 2.0 * cfg.potential.v(x) / cfg.m


class DiscreteAction:
    """Evaluator for the discrete action, its gradient, and its Hessian.

    Operators are assembled once at construction.  The initial-data targets
    of the multiplier constraints are kept as plain attributes, separate
    from the shift absorbed into the regularized operators, so the two
    roles of the initial values can be probed independently.
    """

    def __init__(self, cfg: ProblemConfig):
        self.cfg = cfg
        self.n = cfg.n_gamma
        self.op = cfg.build_operator()
        self.reg_t = regularize(self.op, cfg.t_i)
        self.reg_x = regularize(self.op, cfg.x_i)
        # the linear part is shared; only the shift column differs
        self.m_block = self.reg_t.m_block
        self.shift_t = self.reg_t.shift
        self.shift_x = self.reg_x.shift
        self.h_diag = self.op.h_diag
        self.d_first = self.op.d[0]
        self.d_last = self.op.d[-1]
        # constraint targets for lam_1..lam_4
        self.t_init = cfg.t_i
        self.tdot_init = cfg.tdot_i
        self.x_init = cfg.x_i
        self.xdot_init = cfg.xdot_i

    # metric helpers, all elementwise on x
    def _g00(self, x):
        return self.cfg.c ** 2 + 2.0 * self.cfg.potential.v(x) / self.cfg.m

    def _g00_prime(self, x):
        return 2.0 * self.cfg.potential.dv(x) / self.cfg.m

    def _g00_second(self, x):
        return 2.0 * self.cfg.potential.d2v(x) / self.cfg.m

    def _check(self, s: StateVector) -> None:
        if s.n != self.n:
            raise ValueError(
                f"state has {s.n} grid points but the action expects {self.n}"
            )

    def _branches(self, s: StateVector):
        yield 1.0, s.t1, s.x1
        yield -1.0, s.t2, s.x2

    def constraints(self, s: StateVector) -> np.ndarray:
        """The eight multiplier residuals, in order lam_1..lam_8."""
        self._check(s)
        return np.array(
            [
                s.t1[0] - self.t_init,
                self.d_first @ s.t1 - self.tdot_init,
                s.x1[0] - self.x_init,
                self.d_first @ s.x1 - self.xdot_init,
                s.t1[-1] - s.t2[-1],
                s.x1[-1] - s.x2[-1],
                self.d_last @ s.t1 - self.d_last @ s.t2,
                self.d_last @ s.x1 - self.d_last @ s.x2,
            ]
        )

    def value(self, s: StateVector) -> float:
        self._check(s)
        total = 0.0
        for sign, t, x in self._branches(s):
            wt = self.m_block @ t + self.shift_t
            wx = self.m_block @ x + self.shift_x
            g00 = self._g00(x)
            total += 0.5 * sign * (
                np.dot(g00 * self.h_diag, wt * wt) - np.dot(self.h_diag, wx * wx)
            )
        return float(total + np.dot(s.lam, self.constraints(s)))

    def gradient(self, s: StateVector) -> np.ndarray:
        self._check(s)
        coord_grads = []
        for sign, t, x in self._branches(s):
            wt = self.m_block @ t + self.shift_t
            wx = self.m_block @ x + self.shift_x
            g00 = self._g00(x)
            gp = self._g00_prime(x)
            grad_t = sign * (self.m_block.T @ (g00 * self.h_diag * wt))
            grad_x = sign * (
                0.5 * gp * self.h_diag * wt * wt
                - self.m_block.T @ (self.h_diag * wx)
            )
            coord_grads.append((grad_t, grad_x))

        (gt1, gx1), (gt2, gx2) = coord_grads
        lam = s.lam
        gt1[0] += lam[0]
        gt1 += lam[1] * self.d_first
        gx1[0] += lam[2]
        gx1 += lam[3] * self.d_first
        gt1[-1] += lam[4]
        gt2[-1] -= lam[4]
        gx1[-1] += lam[5]
        gx2[-1] -= lam[5]
        gt1 += lam[6] * self.d_last
        gt2 -= lam[6] * self.d_last
        gx1 += lam[7] * self.d_last
        gx2 -= lam[7] * self.d_last

        return np.concatenate([gt1, gt2, gx1, gx2, self.constraints(s)])

    def constraint_jacobian(self) -> np.ndarray:
        """8 x 4n Jacobian of the constraints w.r.t. the coordinate blocks."""
        n = self.n
        jac = np.zeros((8, 4 * n))
        jac[0, 0] = 1.0
        jac[1, :n] = self.d_first
        jac[2, 2 * n] = 1.0
        jac[3, 2 * n : 3 * n] = self.d_first
        jac[4, n - 1] = 1.0
        jac[4, 2 * n - 1] = -1.0
        jac[5, 3 * n - 1] = 1.0
        jac[5, 4 * n - 1] = -1.0
        jac[6, :n] = self.d_last
        jac[6, n : 2 * n] = -self.d_last
        jac[7, 2 * n : 3 * n] = self.d_last
        jac[7, 3 * n : 4 * n] = -self.d_last
        return jac

    def hessian(self, s: StateVector) -> np.ndarray:
        self._check(s)
        n = self.n
        dim = 4 * n + 8
        hess = np.zeros((dim, dim))
        offsets = ((0, 2 * n), (n, 3 * n))

        for (t_off, x_off), (sign, t, x) in zip(offsets, self._branches(s)):
            wt = self.m_block @ t + self.shift_t
            g00 = self._g00(x)
            gp = self._g00_prime(x)
            gpp = self._g00_second(x)

            h_tt = sign * ((self.m_block.T * (g00 * self.h_diag)) @ self.m_block)
            h_xx = sign * (
                np.diag(0.5 * gpp * self.h_diag * wt * wt)
                - (self.m_block.T * self.h_diag) @ self.m_block
            )
            h_tx = sign * (self.m_block.T * (gp * self.h_diag * wt))

            hess[t_off : t_off + n, t_off : t_off + n] = h_tt
            hess[x_off : x_off + n, x_off : x_off + n] = h_xx
            hess[t_off : t_off + n, x_off : x_off + n] = h_tx
            hess[x_off : x_off + n, t_off : t_off + n] = h_tx.T

        jac = self.constraint_jacobian()
        hess[4 * n :, : 4 * n] = jac
        hess[: 4 * n, 4 * n :] = jac.T
        return hess


def action_value(s: StateVector, cfg: ProblemConfig) -> float:
    """Value of the discrete doubled action at state ``s``."""
    return DiscreteAction(cfg).value(s)


def action_gradient(s: StateVector, cfg: ProblemConfig) -> np.ndarray:
    """Analytic gradient w.r.t. all 4n + 8 unknowns."""
    return DiscreteAction(cfg).gradient(s)


def action_hessian(s: StateVector, cfg: ProblemConfig) -> np.ndarray:
    """Analytic symmetric Hessian w.r.t. all 4n + 8 unknowns."""
    return DiscreteAction(cfg).hessian(s)
