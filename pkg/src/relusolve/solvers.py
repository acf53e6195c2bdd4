"""End-to-end ReLU solver networks for sparse SPD systems.

Two builders share one skeleton: an exact affine rescale layer, m (or m+1)
step networks chained by sparse concatenation, and an exact affine output
layer.  The Richardson step maps (A, r, c) to (A, Ar, r + c); the cg-type
step runs the Clenshaw recurrence b_k = alpha_k r + 2 B b_next - b_nextnext
against the Chebyshev coefficients of the optimal solver polynomial.  Both
networks take the concatenation (A^v, r) of matrix values and right-hand
side as input and approximate A^{-1} r to the configured accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .arithmetic import SparsityPattern, sparse_matvec_net
from .calculus import identity_net, parallelize_shared, pipeline, scale_add_net
from .network import Layer, ReluNetwork, make_layer, stats

__all__ = [
    "ChebyshevPlan",
    "SolverConfig",
    "SpectralClass",
    "audit_complexity",
    "build_cg_net",
    "build_richardson_net",
    "cheb_plan",
    "clenshaw_step_net",
    "m_cg",
    "m_richardson",
    "rho_alpha",
    "richardson_step_net",
]

METHODS = ("richardson", "cg")


@dataclass(frozen=True)
class SpectralClass:
    """Spectral bracket [lam, Lam] for the admissible matrix class.

    lam == Lam (condition number 1) is permitted; the builders short-circuit
    it to an exact affine solve.
    """

    lam: float
    Lam: float

    def __post_init__(self):
        if not (math.isfinite(self.lam) and math.isfinite(self.Lam)):
            raise ValueError("spectral bounds must be finite")
        if not 0 < self.lam <= self.Lam:
            raise ValueError("need 0 < lam <= Lam")

    @property
    def kappa(self) -> float:
        return self.Lam / self.lam

    @property
    def omega(self) -> float:
        return 2.0 / (self.lam + self.Lam)

    def rho(self, alpha: float) -> float:
        return rho_alpha(self, alpha)


def rho_alpha(spec: SpectralClass, alpha: float) -> float:
    """Convergence factor (kappa^alpha - 1)/(kappa^alpha + 1)."""
    ka = spec.kappa**alpha
    return (ka - 1.0) / (ka + 1.0)


@dataclass(frozen=True)
class SolverConfig:
    method: str
    epsilon: float
    c_sc: float = 1.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.c_sc < 1.0:
            raise ValueError("c_sc must be at least 1")

    def validate_against(self, spec: SpectralClass) -> None:
        """Check the method-specific admissible c_sc range."""
        kappa = spec.kappa
        limit = (1.0 + kappa) / 2.0 if self.method == "richardson" else kappa
        if self.c_sc > limit:
            raise ValueError(
                f"c_sc={self.c_sc} exceeds the admissible bound {limit} "
                f"for method {self.method} at kappa={kappa}"
            )


def m_richardson(eps: float, c_sc: float, rho1: float) -> int:
    """Step count ceil(|log2(eps/(2 c_sc))| / |log2 rho1|); 1 when rho1 = 0."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if c_sc < 1.0:
        raise ValueError("c_sc must be at least 1")
    if not 0.0 <= rho1 < 1.0:
        raise ValueError("rho must lie in [0, 1)")
    if rho1 == 0.0:
        return 1
    return max(1, math.ceil(abs(math.log2(eps / (2.0 * c_sc))) / abs(math.log2(rho1))))


def m_cg(eps: float, c_sc: float, rho_half: float) -> int:
    """Step count ceil(|log2(eps/(4 c_sc))| / |log2 rho_half|); 1 when rho = 0."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if c_sc < 1.0:
        raise ValueError("c_sc must be at least 1")
    if not 0.0 <= rho_half < 1.0:
        raise ValueError("rho must lie in [0, 1)")
    if rho_half == 0.0:
        return 1
    return max(1, math.ceil(abs(math.log2(eps / (4.0 * c_sc))) / abs(math.log2(rho_half))))


@dataclass(frozen=True)
class ChebyshevPlan:
    """Normalized coefficients of the degree-(m-1) cg-type solver polynomial.

    coeffs[l] = alpha_l / alpha_max with denormalized alpha_l = 2 T_{m-1-l}
    at sigma0 for l <= m-2 and alpha_{m-1} = 1; final_scale maps the
    normalized Clenshaw output b_0 back to the solution estimate.
    """

    degree: int
    sigma0: float
    coeffs: tuple = field(repr=False)
    alpha_max: float
    final_scale: float


def _log_cheb_t(j: int, t0: float) -> float:
    # log T_j(cosh t0) = log cosh(j t0), stable for large j*t0
    return j * t0 + math.log1p(math.exp(-2.0 * j * t0)) - math.log(2.0)


def cheb_plan(m: int, spec: SpectralClass) -> ChebyshevPlan:
    """Coefficient plan for the cg-type builder, computed in log space."""
    if m < 1:
        raise ValueError("degree must be at least 1")
    kappa = spec.kappa
    if kappa == 1.0 or not math.isfinite((kappa + 1.0) / (kappa - 1.0)):
        raise ValueError(
            "condition number too close to 1 for the Chebyshev construction; "
            "use the Richardson builder (or the exact affine short-circuit)"
        )
    sigma0 = (kappa + 1.0) / (kappa - 1.0)
    u = 2.0 / (kappa - 1.0)
    t0 = math.log1p(u + math.sqrt(u * (2.0 + u)))  # arccosh(sigma0)
    log_alpha = [math.log(2.0) + _log_cheb_t(m - 1 - l, t0) for l in range(m - 1)]
    log_alpha.append(0.0)
    log_max = max(log_alpha)
    coeffs = tuple(math.exp(la - log_max) for la in log_alpha)
    slope = 2.0 * kappa / (kappa - 1.0)
    final_scale = math.exp(math.log(slope) + log_max - _log_cheb_t(m, t0))
    return ChebyshevPlan(
        degree=m,
        sigma0=sigma0,
        coeffs=coeffs,
        alpha_max=math.exp(log_max),
        final_scale=final_scale,
    )


def richardson_step_net(pattern: SparsityPattern, delta: float, z: float) -> ReluNetwork:
    """One iteration map (A^v, r, c) -> (A^v, A r, r + c) on eta + 2n channels.

    The matrix block is carried by exact identity channels, r + c by an exact
    scale_add, and A r by a matvec at accuracy delta for ||A||_2 <= 1,
    ||r||_2 <= z.
    """
    n, eta = pattern.n, pattern.eta
    mv = sparse_matvec_net(pattern, delta, z, scale=1.0)
    members = [identity_net(eta, mv.depth), mv, scale_add_net(1.0, n)]
    maps = [range(eta), range(eta + n), range(eta, eta + 2 * n)]
    return parallelize_shared(members, maps, eta + 2 * n)


def _fuse_output_affine(C, net: ReluNetwork) -> ReluNetwork:
    """Replace the final affine layer W, b with C W, C b.

    Exact whenever each row of C reads output blocks whose final-layer rows
    occupy disjoint columns, as every product entry is then a single float
    multiplication.
    """
    last = net.layers[-1]
    fused = Layer(C @ last.weight, C @ last.bias)
    return ReluNetwork(list(net.layers[:-1]) + [fused])


def clenshaw_step_net(
    pattern: SparsityPattern, alpha_bar: float, delta: float, z: float
) -> ReluNetwork:
    """One Clenshaw update on the state (B^v, b_next, b_nextnext, rhat).

    Output is (B^v, alpha_bar*rhat + 2 B b_next - b_nextnext, b_next, rhat)
    with error <= delta confined to the second block: the doubled matvec is
    the only approximate piece, everything else rides identity channels and
    the exactly fused output combination.
    """
    if not 0.0 <= alpha_bar <= 1.0:
        raise ValueError("normalized coefficient must lie in [0, 1]")
    n, eta = pattern.n, pattern.eta
    mv = sparse_matvec_net(pattern, delta, z, scale=2.0)
    d = mv.depth
    members = [identity_net(eta, d), mv, identity_net(n, d), identity_net(n, d), identity_net(n, d)]
    maps = [
        range(eta),
        range(eta + n),
        range(eta + 2 * n, eta + 3 * n),  # rhat copy
        range(eta + n, eta + 2 * n),  # b_nextnext copy
        range(eta, eta + n),  # b_next copy
    ]
    par = parallelize_shared(members, maps, eta + 3 * n)
    # combine blocks [B^v, w=2Bb, rhat, b_nn, b_next] into the next state
    rows, cols, vals = [], [], []
    for p in range(eta):
        rows.append(p)
        cols.append(p)
        vals.append(1.0)
    for i in range(n):
        r = eta + i
        rows.extend([r, r, r])
        cols.extend([eta + i, eta + n + i, eta + 2 * n + i])
        vals.extend([1.0, alpha_bar, -1.0])
        rows.append(eta + n + i)
        cols.append(eta + 3 * n + i)
        vals.append(1.0)
        rows.append(eta + 2 * n + i)
        cols.append(eta + n + i)
        vals.append(1.0)
    keep = [v != 0.0 for v in vals]
    C = sp.csr_matrix(
        (
            [v for v, k in zip(vals, keep) if k],
            (
                [r for r, k in zip(rows, keep) if k],
                [c for c, k in zip(cols, keep) if k],
            ),
        ),
        shape=(eta + 3 * n, eta + 4 * n),
    )
    return _fuse_output_affine(C, par)


def _degenerate_affine_solver(pattern: SparsityPattern, spec: SpectralClass) -> ReluNetwork:
    # kappa = 1 means A = lam * I on the spectrum, so x = r / lam exactly
    n, eta = pattern.n, pattern.eta
    idx = np.arange(n)
    layer = make_layer((n, eta + n), idx, eta + idx, np.full(n, 1.0 / spec.lam))
    return ReluNetwork([layer])


def _header(method, pattern, spec, config, m, **extra):
    meta = {
        "method": method,
        "n": pattern.n,
        "eta": pattern.eta,
        "lambda": spec.lam,
        "Lambda": spec.Lam,
        "epsilon": config.epsilon,
        "c_sc": config.c_sc,
        "m": m,
        "kappa": spec.kappa,
    }
    meta.update(extra)
    return meta


def build_richardson_net(
    pattern: SparsityPattern, spec: SpectralClass, config: SolverConfig
) -> ReluNetwork:
    """Solver net for A x = r via m+1 damped fixed-point steps.

    Input (A^v, r) of length eta + n, output of length n; for every
    symmetric A in the pattern class with spectrum in [lam, Lam] and
    ||r||_2 <= c_sc * lam the output is within epsilon of A^{-1} r.
    """
    if config.method != "richardson":
        raise ValueError("config.method must be 'richardson'")
    if not pattern.has_full_diagonal():
        raise ValueError("pattern must contain every diagonal position")
    config.validate_against(spec)
    n, eta = pattern.n, pattern.eta
    if spec.kappa == 1.0:
        net = _degenerate_affine_solver(pattern, spec)
        net.metadata = _header("richardson", pattern, spec, config, 0)
        return net
    omega = spec.omega
    m = m_richardson(config.epsilon, config.c_sc, rho_alpha(spec, 1.0))
    delta = config.epsilon / (2.0 * m * m)
    z = float(m + 3)
    step = richardson_step_net(pattern, delta, z)
    # rescale layer: A^v -> I - omega A over the pattern, r -> omega r, c = 0
    rows = list(range(eta)) + [eta + i for i in range(n)]
    cols = list(range(eta)) + [eta + i for i in range(n)]
    vals = [-omega] * eta + [omega] * n
    bias = np.zeros(eta + 2 * n)
    bias[pattern.diagonal_positions()] = 1.0
    pre = ReluNetwork([make_layer((eta + 2 * n, eta + n), rows, cols, vals, bias)])
    idx = np.arange(n)
    post = ReluNetwork([make_layer((n, eta + 2 * n), idx, eta + n + idx, np.ones(n))])
    net = pipeline([pre] + [step] * (m + 1) + [post])
    net.metadata = _header(
        "richardson", pattern, spec, config, m, omega=omega, delta=delta, z=z
    )
    return net


def build_cg_net(
    pattern: SparsityPattern, spec: SpectralClass, config: SolverConfig
) -> ReluNetwork:
    """Solver net for A x = r via the Clenshaw chain of the cg-type polynomial.

    Same input/output contract as build_richardson_net, with the step count
    driven by rho_{1/2} instead of rho_1.
    """
    if config.method != "cg":
        raise ValueError("config.method must be 'cg'")
    if not pattern.has_full_diagonal():
        raise ValueError("pattern must contain every diagonal position")
    config.validate_against(spec)
    n, eta = pattern.n, pattern.eta
    if spec.kappa == 1.0:
        net = _degenerate_affine_solver(pattern, spec)
        net.metadata = _header("cg", pattern, spec, config, 0)
        return net
    m = m_cg(config.epsilon, config.c_sc, rho_alpha(spec, 0.5))
    plan = cheb_plan(m, spec)
    delta = config.epsilon / (2.0 * (m + 1) ** 2 * max(1.0, abs(plan.final_scale)))
    z = 3.0 * m * m
    steps = [
        clenshaw_step_net(pattern, plan.coeffs[k], delta, z) for k in range(m - 1, -1, -1)
    ]
    # rescale layer: B^v = sigma0 I - (slope/Lam) A over the pattern,
    # rhat = r / Lam, Clenshaw carries start at zero
    slope = 2.0 * spec.kappa / (spec.kappa - 1.0)
    rows = list(range(eta)) + [eta + 2 * n + i for i in range(n)]
    cols = list(range(eta)) + [eta + i for i in range(n)]
    vals = [-slope / spec.Lam] * eta + [1.0 / spec.Lam] * n
    bias = np.zeros(eta + 3 * n)
    bias[pattern.diagonal_positions()] = plan.sigma0
    pre = ReluNetwork([make_layer((eta + 3 * n, eta + n), rows, cols, vals, bias)])
    idx = np.arange(n)
    post = ReluNetwork(
        [make_layer((n, eta + 3 * n), idx, eta + idx, np.full(n, plan.final_scale))]
    )
    net = pipeline([pre] + steps + [post])
    net.metadata = _header(
        "cg",
        pattern,
        spec,
        config,
        m,
        sigma0=plan.sigma0,
        final_scale=plan.final_scale,
        delta=delta,
        z=z,
    )
    return net


@dataclass(frozen=True)
class AuditRecord:
    depth: int
    weights: int
    denom: float
    ratio_L: float
    ratio_M: float


def audit_complexity(net: ReluNetwork, m: int, eps: float, n: int, eta: int) -> AuditRecord:
    """Measured (depth, weights) against the m(log2(1/eps)+log2 n+log2 m) shape.

    ratio_L divides the depth by that factor, ratio_M additionally by eta.
    """
    if m < 1:
        raise ValueError("audit needs an iterative build (m >= 1)")
    st = stats(net)
    denom = m * (math.log2(1.0 / eps) + math.log2(n) + math.log2(m))
    return AuditRecord(
        depth=st.depth,
        weights=st.weights,
        denom=denom,
        ratio_L=st.depth / denom,
        ratio_M=st.weights / (denom * eta),
    )
