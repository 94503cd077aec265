"""Thermodynamics: stiffened-free ideal gas EOS, mixture data, field state."""

import warnings
from dataclasses import dataclass, field

import numpy as np

R_UNIVERSAL = 8.31446261815324  # J/(mol K)


@dataclass(frozen=True)
class MixtureSpec:
    """Four-species mixture (fuel, oxidant, neutral, product) with one-step
    stoichiometry ``nu_F F + nu_O O -> nu_P P``.

    Molar masses ``W_*`` are in kg/mol, formation enthalpies ``dh_*`` in J/kg.
    ``gamma`` is the (common) adiabatic exponent.  Construction checks the
    stoichiometric mass balance ``nu_F W_F + nu_O W_O == nu_P W_P`` and warns
    if the reaction heat per unit product mass turns out negative
    (endothermic data are accepted but are almost certainly a typo).
    """

    nu_F: float
    nu_O: float
    nu_P: float
    W_F: float
    W_O: float
    W_N: float
    W_P: float
    dh_F: float = 0.0
    dh_O: float = 0.0
    dh_N: float = 0.0
    dh_P: float = 0.0
    gamma: float = 1.4

    # algebraic signs of the species in the reaction (fuel and oxidant are
    # consumed, product is created, neutral inert)
    zeta: tuple = field(default=(-1.0, -1.0, 0.0, 1.0), init=False, repr=False)

    def __post_init__(self):
        for name in ("nu_F", "nu_O", "nu_P", "W_F", "W_O", "W_N", "W_P"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.gamma <= 1.0:
            raise ValueError("gamma must exceed 1")
        lhs = self.nu_F * self.W_F + self.nu_O * self.W_O
        rhs = self.nu_P * self.W_P
        if abs(lhs - rhs) > 1e-12 * max(abs(lhs), abs(rhs)):
            raise ValueError(
                f"stoichiometric mass balance violated: "
                f"nu_F*W_F + nu_O*W_O = {lhs!r} but nu_P*W_P = {rhs!r}"
            )
        if self.reaction_heat_coefficient < 0.0:
            warnings.warn(
                "negative reaction heat coefficient: the reaction is endothermic",
                stacklevel=2,
            )

    @property
    def reaction_heat_coefficient(self):
        """Heat released per mole of reaction event (J/mol), from the
        formation-enthalpy balance of the consumed and created masses."""
        return (
            self.nu_F * self.W_F * self.dh_F
            + self.nu_O * self.W_O * self.dh_O
            - self.nu_P * self.W_P * self.dh_P
        )

    @property
    def formation_enthalpies(self):
        """Formation enthalpies as an array ordered (F, O, N, P)."""
        return np.array([self.dh_F, self.dh_O, self.dh_N, self.dh_P])

    @property
    def molar_masses(self):
        return np.array([self.W_F, self.W_O, self.W_N, self.W_P])


@dataclass
class FieldState:
    """All discrete unknowns of one accepted time level.

    Cell arrays have shape (n_cells,), the velocity and flux arrays shape
    (n_cells + 1,).  ``rho_prev`` is the density of the *previous* level; the
    scheme is two-level in the density, so a state is complete only with it.
    ``flux`` holds the per-face mass fluxes of the last accepted step, which
    satisfy the discrete mass balance between ``rho_prev`` and ``rho`` with
    the fixed step ``dt``.
    """

    grid: object
    mixture: MixtureSpec
    dt: float
    rho_prev: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    p: np.ndarray
    h_s: np.ndarray
    y_F: np.ndarray
    y_O: np.ndarray
    y_N: np.ndarray
    y_P: np.ndarray
    z: np.ndarray
    G: np.ndarray
    flux: np.ndarray

    @property
    def e_s(self):
        """Sensible internal energy, via the gamma-free identity e_s = h_s - p/rho."""
        return self.h_s - self.p / self.rho

    def species_matrix(self):
        """Mass fractions stacked as rows ordered (F, O, N, P), shape (4, n)."""
        return np.vstack([self.y_F, self.y_O, self.y_N, self.y_P])

    def copy(self):
        return FieldState(
            grid=self.grid,
            mixture=self.mixture,
            dt=self.dt,
            rho_prev=self.rho_prev.copy(),
            rho=self.rho.copy(),
            u=self.u.copy(),
            p=self.p.copy(),
            h_s=self.h_s.copy(),
            y_F=self.y_F.copy(),
            y_O=self.y_O.copy(),
            y_N=self.y_N.copy(),
            y_P=self.y_P.copy(),
            z=self.z.copy(),
            G=self.G.copy(),
            flux=self.flux.copy(),
        )


def pressure_from_state(rho, h_s, gamma):
    """EOS written in enthalpy form: p = ((gamma-1)/gamma) rho h_s."""
    return (gamma - 1.0) / gamma * rho * h_s


def e_s_from_pressure(rho, p, gamma):
    """Invert p = (gamma-1) rho e_s."""
    return p / ((gamma - 1.0) * rho)


def sensible_enthalpy(e_s, gamma):
    """h_s = gamma e_s for a perfect gas."""
    return gamma * e_s


def gas_constant_mix(mixture, y_F, y_O, y_N, y_P):
    """Specific gas constant of the local mixture, R_u * sum_i y_i / W_i."""
    return R_UNIVERSAL * (
        y_F / mixture.W_F + y_O / mixture.W_O + y_N / mixture.W_N + y_P / mixture.W_P
    )


def temperature(mixture, e_s, y_F, y_O, y_N, y_P):
    """T = (gamma - 1) e_s / R_mix."""
    r_mix = gas_constant_mix(mixture, y_F, y_O, y_N, y_P)
    return (mixture.gamma - 1.0) * e_s / r_mix


def z_from_fractions(mixture, y_F, y_O):
    """Linear reaction invariant z = y_F/(nu_F W_F) - y_O/(nu_O W_O).

    It is transported like a passive scalar because the reaction consumes
    fuel and oxidant in the stoichiometric mass ratio.
    """
    return y_F / (mixture.nu_F * mixture.W_F) - y_O / (mixture.nu_O * mixture.W_O)


def y_O_from_z(mixture, y_F, z):
    """Recover the oxidant fraction from the fuel fraction and the invariant."""
    return mixture.nu_O * mixture.W_O * (y_F / (mixture.nu_F * mixture.W_F) - z)


def mass_fractions_from_molar(mixture, x_F, x_O, x_N, x_P=0.0):
    """Convert molar fractions to mass fractions; the input must sum to 1."""
    total = x_F + x_O + x_N + x_P
    if abs(total - 1.0) > 1e-12:
        raise ValueError(f"molar fractions sum to {total!r}, expected 1")
    w = (
        x_F * mixture.W_F
        + x_O * mixture.W_O
        + x_N * mixture.W_N
        + x_P * mixture.W_P
    )
    return (
        x_F * mixture.W_F / w,
        x_O * mixture.W_O / w,
        x_N * mixture.W_N / w,
        x_P * mixture.W_P / w,
    )


def chemical_enthalpy(mixture, y_F, y_O, y_N, y_P):
    """Formation-enthalpy content sum_i y_i dh_i (J/kg)."""
    return (
        y_F * mixture.dh_F + y_O * mixture.dh_O + y_N * mixture.dh_N + y_P * mixture.dh_P
    )
