"""Segregated pressure-correction flow step on the staggered grid.

One flow step runs: rescale the old pressure gradient, predict face
velocities with the old gradient (implicit in the convection), measure the
kinetic energy the prediction dissipated, then solve the coupled
mass/enthalpy/EOS correction system for the end-of-step pressure, density
and sensible enthalpy with the velocity eliminated through the correction
relation.  The pieces are arranged so that a discrete total energy -
sensible plus chemical plus kinetic including a pressure-gradient storage
term - is conserved to the nonlinear solver tolerance.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import StepFailure
from .thermo import chemical_enthalpy
from .transport import (
    dual_density,
    dual_mass_flux,
    primal_mass_flux,
    upwind_face_values,
)


@dataclass(frozen=True)
class CorrectionSolveConfig:
    """Tolerances of the nonlinear correction solve.

    ``nonlinear_tol`` is relative (residuals are scaled by the natural size
    of each equation).  When Newton fails to converge, a damped fixed-point
    sweep with ``under_relaxation`` on the pressure takes over.
    """

    nonlinear_tol: float = 1e-12
    max_iterations: int = 100
    under_relaxation: float = 0.8

    def __post_init__(self):
        if not 0.0 < self.nonlinear_tol < 1.0:
            raise ValueError("nonlinear_tol must lie in (0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if not 0.0 < self.under_relaxation <= 1.0:
            raise ValueError("under_relaxation must lie in (0, 1]")


@dataclass
class CorrectionResult:
    u: np.ndarray
    rho: np.ndarray
    h_s: np.ndarray
    p: np.ndarray
    grad_p: np.ndarray
    flux: np.ndarray
    iterations: int
    residual: float
    converged: bool
    used_fallback: bool


@dataclass
class EulerResult:
    """Everything one flow step produces (velocities at faces, scalars at cells)."""

    u: np.ndarray
    rho: np.ndarray
    h_s: np.ndarray
    p: np.ndarray
    grad_p: np.ndarray
    flux: np.ndarray
    u_tilde: np.ndarray
    kinetic_residual: np.ndarray
    source: np.ndarray
    iterations: int
    residual: float
    used_fallback: bool


def pressure_gradient(p, grid):
    """Face pressure gradient (p_K - p_L)/|D_sigma|; zero at the walls."""
    p = np.asarray(p)
    g = np.zeros(grid.n_faces)
    g[1:-1] = (p[1:] - p[:-1]) / grid.dual_volumes[1:-1]
    return g


def scale_pressure_gradient(grad_p, rho_dual_n, rho_dual_nm1):
    """Old gradient rescaled by sqrt(rho^n_D / rho^{n-1}_D).

    This is the exact factor that lets the pressure-gradient storage term of
    the kinetic energy telescope between steps.
    """
    return np.sqrt(np.asarray(rho_dual_n) / np.asarray(rho_dual_nm1)) * np.asarray(grad_p)


def predict_velocity(state, dual_flux, sgp, dt):
    """Implicit momentum prediction with the rescaled old pressure gradient.

    Solves, on every interior face, the dual-cell momentum balance with
    centred face velocities and the frozen gradient ``sgp``; wall velocities
    stay zero.  Returns the full face array.
    """
    grid = state.grid
    n = grid.n_cells
    rho_d_n = dual_density(grid, state.rho)
    rho_d_nm1 = dual_density(grid, state.rho_prev)
    hdt = grid.dual_volumes / dt
    j = np.arange(1, n)
    diag = hdt[j] * rho_d_n[j] + 0.5 * (dual_flux[j] - dual_flux[j - 1])
    upper = 0.5 * dual_flux[j]
    lower = -0.5 * dual_flux[j - 1]
    rhs = hdt[j] * rho_d_nm1[j] * state.u[j] - grid.dual_volumes[j] * sgp[j]
    nn = n - 1
    ab = np.zeros((3, nn))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    u_tilde = np.zeros(n + 1)
    u_tilde[1:n] = solve_banded((1, 1), ab, rhs)
    return u_tilde


def kinetic_residuals(state_n, u_tilde, u_next, dt):
    """Kinetic energy dissipated by the prediction on each dual cell.

    R_sigma = |D_sigma| rho^{n-1}_D (u_tilde - u^n)^2 / (2 dt); walls carry
    none.  (``u_next`` is accepted for signature parity with callers that
    have already corrected the velocity; the residual only involves the
    prediction.)
    """
    grid = state_n.grid
    rho_d_nm1 = dual_density(grid, state_n.rho_prev)
    R = grid.dual_volumes * rho_d_nm1 / (2.0 * dt) * (u_tilde - state_n.u) ** 2
    R[0] = 0.0
    R[-1] = 0.0
    return R


def compensation_source(R, grid):
    """Distribute the prediction residuals back to the cells.

    Each interior face residual is split evenly between its two cells; a
    boundary face residual goes entirely to its one cell.  The total is
    preserved: sum |K| S_K = sum R_sigma.
    """
    n = grid.n_cells
    w = np.full(grid.n_faces, 0.5)
    w[0] = 1.0
    w[-1] = 1.0
    wR = w * np.asarray(R)
    return (wR[:-1] + wR[1:]) / grid.cell_volumes


def cell_kinetic_energy(state):
    """Cell kinetic energy: half the dual-volume-weighted face values.

    The face kinetic energy pairs the new velocity with the previous-level
    dual density and stores the pressure-gradient term that the correction
    equation exchanges with it.
    """
    grid = state.grid
    rho_d_prev = dual_density(grid, state.rho_prev)
    g = pressure_gradient(state.p, grid)
    ek = 0.5 * rho_d_prev * state.u**2 + state.dt**2 * g**2 / (2.0 * rho_d_prev)
    dv = grid.dual_volumes
    return (dv[:-1] * ek[:-1] + dv[1:] * ek[1:]) / (2.0 * grid.cell_volumes)


def total_energy(state):
    """Discrete total energy of a state (J per unit cross-section).

    Sensible and chemical internal energy over the cells (the chemical part
    weighted by the previous-level density, matching the two-level species
    balance) plus kinetic energy over the interior dual cells, including the
    pressure-gradient storage term.  Exactly conserved by the full step up
    to the nonlinear solver tolerance.
    """
    grid = state.grid
    mix = state.mixture
    hc = chemical_enthalpy(mix, state.y_F, state.y_O, state.y_N, state.y_P)
    e_int = np.sum(grid.cell_volumes * (state.rho * state.e_s + state.rho_prev * hc))
    rho_d_prev = dual_density(grid, state.rho_prev)
    g = pressure_gradient(state.p, grid)
    ek = 0.5 * rho_d_prev * state.u**2 + state.dt**2 * g**2 / (2.0 * rho_d_prev)
    e_kin = np.sum(grid.dual_volumes[1:-1] * ek[1:-1])
    return float(e_int + e_kin)


def _upwind_cells(u, n):
    """Index of the upwind cell for each interior face, given face velocities."""
    j = np.arange(1, n)
    return np.where(u[1:n] >= 0.0, j - 1, j)


class _CorrectionSystem:
    """Residual and Jacobian of the coupled correction equations.

    Unknown layout: X[3i] = p_i, X[3i+1] = rho_i, X[3i+2] = h_i.  Row layout
    mirrors it: 3i = mass, 3i+1 = enthalpy, 3i+2 = EOS.  The velocity is
    eliminated: u_j = a_j + b_j (p_{j-1} - p_j) on interior faces, zero at
    the walls.  Upwind switches freeze per linearisation (semismooth
    Newton).
    """

    def __init__(self, state, u_tilde, sgp, dt, source):
        grid = state.grid
        self.n = grid.n_cells
        self.h = grid.cell_volumes
        self.hdt = grid.cell_volumes / dt
        self.dt = dt
        self.kappa = (state.mixture.gamma - 1.0) / state.mixture.gamma
        rho_d_n = dual_density(grid, state.rho)
        j = np.arange(1, self.n)
        self.a_face = u_tilde[j] + dt / rho_d_n[j] * sgp[j]
        self.b_face = dt / (rho_d_n[j] * grid.dual_volumes[j])
        self.rho_n = state.rho
        self.p_n = state.p
        self.rhoh_n = state.rho * state.h_s
        self.source = source
        self.rho_ref = max(float(np.max(np.abs(state.rho))), 1e-300)
        self.rhoh_ref = max(float(np.max(np.abs(self.rhoh_n))), 1e-300)
        self.p_ref = max(float(np.max(np.abs(state.p))), 1e-300)

    def unpack(self, X):
        return X[0::3], X[1::3], X[2::3]

    def velocity(self, p):
        u = np.zeros(self.n + 1)
        u[1:-1] = self.a_face + self.b_face * (p[:-1] - p[1:])
        return u

    def residual(self, X):
        n = self.n
        p, rho, hs = self.unpack(X)
        u = self.velocity(p)
        up = _upwind_cells(u, n)
        F = np.zeros(n + 1)
        F[1:n] = u[1:n] * rho[up]
        h_face = np.zeros(n + 1)
        h_face[1:n] = hs[up]
        p_face = np.zeros(n + 1)
        p_face[1:n] = p[up]

        r_mass = self.hdt * (rho - self.rho_n) + F[1:] - F[:-1]

        conv = F[1:] * h_face[1:] - F[:-1] * h_face[:-1]
        # -(u . grad p) with upwind face pressures: the term of the upwind
        # cell vanishes identically (p_sigma = p_K there), so the whole
        # contribution u_j (p_{j-1} - p_j) lands in the downwind cell
        dn = np.arange(1, n) + np.arange(0, n - 1) - up
        updp = np.zeros(n)
        dp = u[1:n] * (p[:-1] - p[1:])
        np.add.at(updp, dn, dp)
        r_hs = (
            self.hdt * (rho * hs - self.rhoh_n)
            + conv
            - self.hdt * (p - self.p_n)
            + updp
            - self.h * self.source
        )

        r_eos = p - self.kappa * rho * hs

        R = np.empty(3 * n)
        R[0::3] = r_mass
        R[1::3] = r_hs
        R[2::3] = r_eos
        return R, u, up, F

    def norm(self, R):
        hdt0 = float(self.hdt[0])
        return max(
            float(np.max(np.abs(R[0::3]))) / (hdt0 * self.rho_ref),
            float(np.max(np.abs(R[1::3]))) / (hdt0 * self.rhoh_ref),
            float(np.max(np.abs(R[2::3]))) / self.p_ref,
        )

    def jacobian(self, X, u, up):
        n = self.n
        p, rho, hs = self.unpack(X)
        ab = np.zeros((9, 3 * n))
        i = np.arange(n)
        j = np.arange(1, n)
        jm = j - 1  # left cell of the face
        jc = j      # right cell of the face
        uj = u[1:n]
        bj = self.b_face
        rho_up = rho[up]
        hs_up = hs[up]
        pos = up == jm

        def add(rows, cols, vals):
            ab[4 + rows - cols, cols] += vals

        # --- mass rows (3i)
        add(3 * i, 3 * i + 1, self.hdt)
        # d F_j / d rho_up, into +row(jm) and -row(jc)
        add(3 * jm, 3 * up + 1, uj)
        add(3 * jc, 3 * up + 1, -uj)
        # d F_j / d p: F depends on p through u
        br = bj * rho_up
        add(3 * jm, 3 * jm, br)
        add(3 * jm, 3 * jc, -br)
        add(3 * jc, 3 * jm, -br)
        add(3 * jc, 3 * jc, br)

        # --- enthalpy rows (3i+1)
        add(3 * i + 1, 3 * i + 1, self.hdt * hs)
        add(3 * i + 1, 3 * i + 2, self.hdt * rho)
        add(3 * i + 1, 3 * i, -self.hdt)
        # convective flux F_j h_up
        add(3 * jm + 1, 3 * up + 1, uj * hs_up)
        add(3 * jc + 1, 3 * up + 1, -uj * hs_up)
        add(3 * jm + 1, 3 * up + 2, uj * rho_up)
        add(3 * jc + 1, 3 * up + 2, -uj * rho_up)
        brh = br * hs_up
        add(3 * jm + 1, 3 * jm, brh)
        add(3 * jm + 1, 3 * jc, -brh)
        add(3 * jc + 1, 3 * jm, -brh)
        add(3 * jc + 1, 3 * jc, brh)
        # u (p_jm - p_jc) in the downwind row
        dn = jm + jc - up
        c = uj + (p[:-1] - p[1:]) * bj
        add(3 * dn + 1, 3 * jm, c)
        add(3 * dn + 1, 3 * jc, -c)

        # --- EOS rows (3i+2)
        add(3 * i + 2, 3 * i, np.ones(n))
        add(3 * i + 2, 3 * i + 1, -self.kappa * hs)
        add(3 * i + 2, 3 * i + 2, -self.kappa * rho)
        return ab


def _fixed_point(sys_, X, cfg):
    """Segregated fallback: u(p) -> mass solve -> enthalpy solve -> EOS."""
    n = sys_.n
    p, rho, hs = (np.array(v) for v in sys_.unpack(X))
    omega = cfg.under_relaxation
    for it in range(10 * cfg.max_iterations):
        u = sys_.velocity(p)
        uin = u[1:n]
        # mass: tridiagonal in rho with frozen upwind switches
        diag = sys_.hdt.copy()
        lower = np.zeros(n)
        upper = np.zeros(n)
        posR = uin >= 0.0  # face j = i+1 seen from cell i = j-1
        diag[:-1] += np.where(posR, uin, 0.0)
        upper[:-1] += np.where(posR, 0.0, uin)
        diag[1:] -= np.where(posR, 0.0, uin)
        lower[1:] -= np.where(posR, uin, 0.0)
        rho = _tridiag(lower, diag, upper, sys_.hdt * sys_.rho_n)
        up = _upwind_cells(u, n)
        F = np.zeros(n + 1)
        F[1:n] = uin * rho[up]
        # enthalpy: tridiagonal in h with rho, u, p frozen
        diag = sys_.hdt * rho
        lower = np.zeros(n)
        upper = np.zeros(n)
        FR = F[1:n]
        diag[:-1] += np.maximum(FR, 0.0)
        upper[:-1] += np.minimum(FR, 0.0)
        diag[1:] -= np.minimum(FR, 0.0)
        lower[1:] -= np.maximum(FR, 0.0)
        dn = np.arange(1, n) + np.arange(0, n - 1) - up
        updp = np.zeros(n)
        np.add.at(updp, dn, uin * (p[:-1] - p[1:]))
        rhs = (
            sys_.hdt * sys_.rhoh_n
            + sys_.hdt * (p - sys_.p_n)
            - updp
            + sys_.h * sys_.source
        )
        hs = _tridiag(lower, diag, upper, rhs)
        p = p + omega * (sys_.kappa * rho * hs - p)
        X = np.empty(3 * n)
        X[0::3], X[1::3], X[2::3] = p, rho, hs
        R, _, _, _ = sys_.residual(X)
        if sys_.norm(R) < cfg.nonlinear_tol:
            return X, it + 1, True
    return X, 10 * cfg.max_iterations, False


def _tridiag(lower, diag, upper, rhs):
    n = diag.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    return solve_banded((1, 1), ab, rhs)


def correction_solve(state, u_tilde, sgp, dt, source, cfg):
    """Solve the coupled correction system for (u, rho, h_s, p) at step end.

    Semismooth Newton on the 3N unknowns with the upwind switches frozen per
    iteration and a positivity-damped line step; falls back to an
    under-relaxed segregated sweep if Newton stalls.  Raises StepFailure if
    neither converges.
    """
    sys_ = _CorrectionSystem(state, u_tilde, sgp, dt, source)
    n = sys_.n
    X = np.empty(3 * n)
    X[0::3] = state.p
    X[1::3] = state.rho
    X[2::3] = state.h_s
    used_fallback = False
    iterations = 0
    converged = False
    for it in range(cfg.max_iterations + 1):
        R, u, up, F = sys_.residual(X)
        res = sys_.norm(R)
        if res < cfg.nonlinear_tol:
            converged = True
            iterations = it
            break
        if it == cfg.max_iterations:
            break
        ab = sys_.jacobian(X, u, up)
        try:
            delta = solve_banded((4, 4), ab, -R)
        except np.linalg.LinAlgError:
            break
        alpha = 1.0
        while alpha > 1e-6:
            Xt = X + alpha * delta
            if (
                np.min(Xt[1::3]) > 0.0
                and np.min(Xt[2::3]) > 0.0
                and np.min(Xt[0::3]) > 0.0
            ):
                break
            alpha *= 0.5
        X = X + alpha * delta
    if not converged:
        X, extra, converged = _fixed_point(sys_, X, cfg)
        used_fallback = True
        iterations = cfg.max_iterations + extra
        R, u, up, F = sys_.residual(X)
        res = sys_.norm(R)
    if not converged:
        raise StepFailure(
            f"correction solve stalled at residual {res:.3e} "
            f"(tolerance {cfg.nonlinear_tol:.1e})"
        )
    p, rho, hs = sys_.unpack(X)
    u = sys_.velocity(p)
    flux = primal_mass_flux(rho, u)
    grad_p = pressure_gradient(p, state.grid)
    return CorrectionResult(
        u=u, rho=rho, h_s=hs, p=p, grad_p=grad_p, flux=flux,
        iterations=iterations, residual=res, converged=converged,
        used_fallback=used_fallback,
    )


def euler_step(state, omega_theta, dt, cfg):
    """One full flow step from an accepted state (chemistry already done).

    Returns the corrected fields plus the prediction by-products needed for
    the energy audit.
    """
    grid = state.grid
    F_n = state.flux
    dual_flux = dual_mass_flux(F_n)
    grad_p = pressure_gradient(state.p, grid)
    rho_d_n = dual_density(grid, state.rho)
    rho_d_nm1 = dual_density(grid, state.rho_prev)
    sgp = scale_pressure_gradient(grad_p, rho_d_n, rho_d_nm1)
    u_tilde = predict_velocity(state, dual_flux, sgp, dt)
    R = kinetic_residuals(state, u_tilde, None, dt)
    S = compensation_source(R, grid)
    corr = correction_solve(state, u_tilde, sgp, dt, omega_theta + S, cfg)
    return EulerResult(
        u=corr.u, rho=corr.rho, h_s=corr.h_s, p=corr.p, grad_p=corr.grad_p,
        flux=corr.flux, u_tilde=u_tilde, kinetic_residual=R, source=S,
        iterations=corr.iterations, residual=corr.residual,
        used_fallback=corr.used_fallback,
    )


def internal_energy_residual(state_n, state_next, chem_face_values, S):
    """Residual of the implied internal-energy balance of one accepted step.

    The sensible part inherits the correction-solve residual; the chemical
    part cancels against the applied heat release exactly, provided the face
    values are the ones the chemistry step actually convected.  Returns the
    per-cell residual of the balance (per unit volume and time).
    """
    grid = state_next.grid
    mix = state_next.mixture
    dt = state_next.dt
    dh = mix.formation_enthalpies
    hc_next = chemical_enthalpy(mix, state_next.y_F, state_next.y_O,
                                state_next.y_N, state_next.y_P)
    hc_n = chemical_enthalpy(mix, state_n.y_F, state_n.y_O,
                             state_n.y_N, state_n.y_P)
    rho_e_next = state_next.rho * state_next.e_s + state_next.rho_prev * hc_next
    rho_e_n = state_n.rho * state_n.e_s + state_n.rho_prev * hc_n

    es_face = upwind_face_values(state_next.e_s, state_next.flux)
    sens_flux = state_next.flux * es_face
    hc_face = (
        dh[0] * chem_face_values["y_F"]
        + dh[1] * chem_face_values["y_O"]
        + dh[2] * chem_face_values["y_N"]
        + dh[3] * chem_face_values["y_P"]
    )
    chem_flux = state_n.flux * hc_face
    div = (sens_flux[1:] - sens_flux[:-1] + chem_flux[1:] - chem_flux[:-1])
    div /= grid.cell_volumes
    p_div_u = state_next.p * (state_next.u[1:] - state_next.u[:-1]) / grid.cell_volumes
    return (rho_e_next - rho_e_n) / dt + div + p_div_u - S
