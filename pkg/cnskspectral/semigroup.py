"""Evolução exata no tempo do sistema linearizado pelo símbolo de Green.

Cada modo de Fourier evolui por uma combinação de exponenciais
``e^{λ+ t}``, ``e^{λ- t}`` e ``e^{-ν|ξ|²t}``. A classe `ModeAmplitude` guarda
essa decomposição para toda a lattice de uma só vez e é a base das integrais
espaço-tempo em forma fechada; a quadratura trapezoidal existe apenas como
oráculo independente.
"""
import enum
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import integrate, stats

from . import exceptions
from . import symbols
from .domain import FitResult
from .grid import (
    Grid2D,
    ScalarField,
    VectorField,
    Representation,
    apply_symbol,
)

__all__ = [
    "Component",
    "SpectralState",
    "ModeAmplitude",
    "green_matrix",
    "evolve",
    "project_helmholtz",
    "diffusion_wave_momentum",
    "scalar_wave_amplitude",
    "mode_amplitudes",
    "mode_amplitude",
    "component_field",
    "spacetime_l2_closed_form",
    "spacetime_l2_quadrature",
    "quadrature_times",
    "high_freq_part",
    "low_freq_part",
    "semigroup_property_check",
    "energy_norm",
    "contraction_defect",
    "plateau_rate",
    "decay_rate_fit",
]

LOGGER = logging.getLogger(__name__)

MOMENT_SERIES_TERMS = 25
MIN_QUADRATURE_STEPS = 16


class Component(enum.Enum):
    PHI = "phi"
    DW_MOMENTUM = "dw_momentum"
    K1_MOMENTUM = "k1_momentum"
    STOKES_MOMENTUM = "stokes_momentum"
    MOMENTUM = "momentum"


@dataclass(frozen=True)
class SpectralState:
    """Estado ``u = (φ, m)`` em representação espectral no instante `time`."""

    phi_hat: ScalarField
    m_hat: VectorField
    params: symbols.ModelParams
    time: float = 0.0

    def __post_init__(self):
        for name in ("phi_hat", "m_hat"):
            value = getattr(self, name)
            if value.representation is not Representation.SPECTRAL:
                raise exceptions.RepresentationMismatch(
                    "cannot build state: %s is in physical representation" % name
                )
        if self.phi_hat.grid != self.m_hat.grid:
            raise exceptions.ParameterDomainError(
                "cannot build state: phi_hat and m_hat live on different grids"
            )
        if self.time < 0:
            raise exceptions.ParameterDomainError(
                "cannot build state: negative time %r" % self.time
            )

    @property
    def grid(self) -> Grid2D:
        return self.phi_hat.grid

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.phi_hat.values[np.newaxis], self.m_hat.values])

    def with_values(self, stacked: np.ndarray, time: float = None) -> "SpectralState":
        return SpectralState(
            ScalarField.spectral(self.grid, stacked[0]),
            VectorField.spectral(self.grid, stacked[1:]),
            self.params,
            self.time if time is None else float(time),
        )

    def scaled(self, weight) -> "SpectralState":
        return self.with_values(self.stacked() * weight)


def _projectors(xi1, xi2):
    """Par ``(P, Q)`` com ``Q = ξξᵀ/|ξ|²`` (nulo em ξ = 0) e ``P = I - Q``."""
    P = symbols.helmholtz_symbols(xi1, xi2)
    Q = np.eye(2).reshape((2, 2) + (1,) * (P.ndim - 2)) - P
    return P, Q


def green_matrix(t, xi1, xi2, params: symbols.ModelParams) -> np.ndarray:
    """Símbolo de Green 3×3 sobre ``(φ, m₁, m₂)`` com forma ``(3, 3, ...)``.
    """
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    x = xi1 * xi1 + xi2 * xi2
    E0, E1 = symbols.divided_differences(t, x, params)
    E0, E1 = np.asarray(E0), np.asarray(E1)
    H = np.asarray(symbols.heat_symbol(t, x, params.nu))
    P, Q = _projectors(xi1, xi2)
    xi = np.array([xi1, xi2])
    coupling = (params.gamma + params.kappa0 * x) * E0

    G = np.zeros((3, 3) + x.shape, dtype=complex)
    G[0, 0] = E1 + 2.0 * params.A * x * E0
    G[0, 1:] = -1j * params.gamma * E0 * xi
    G[1:, 0] = -1j * xi * coupling
    G[1:, 1:] = H * P + E1 * Q
    return G


def _green_on_grid(t, grid: Grid2D, params) -> np.ndarray:
    G = green_matrix(t, grid.xi1, grid.xi2, params)
    G[0, 1:] *= grid.nyquist_mask
    G[1:, 0] *= grid.nyquist_mask
    return G


def evolve(state0: SpectralState, t: float) -> SpectralState:
    if state0.time != 0:
        raise exceptions.ParameterDomainError(
            "cannot evolve state: initial state must be at time 0, got %r" % state0.time
        )
    if t < 0:
        raise exceptions.ParameterDomainError("cannot evolve state: negative time %r" % t)
    G = _green_on_grid(t, state0.grid, state0.params)
    u = np.einsum("ij...,j...->i...", G, state0.stacked())
    return state0.with_values(u, time=t)


def project_helmholtz(m: VectorField) -> Tuple[VectorField, VectorField]:
    """Retorna ``(solenoidal, potencial)``."""
    grid = m.grid
    solenoidal = apply_symbol(m, symbols.helmholtz_symbols(grid.xi1, grid.xi2))
    return solenoidal, m - solenoidal


def _moments(a: int, z) -> np.ndarray:
    """``I_a(z) = ∫₀¹ s^a e^{zs} ds`` elemento a elemento.

    Série de Taylor para ``|z| < 1`` e recorrência ascendente
    ``I_a = (e^z - a·I_{a-1})/z`` fora do disco unitário.
    """
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1.0

    series = np.zeros_like(z)
    term = np.ones_like(z)
    for k in range(MOMENT_SERIES_TERMS):
        series = series + term / (a + k + 1)
        term = term * z / (k + 1)

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        zz = np.where(small, 1.0, z)
        ez = np.exp(zz)
        value = (ez - 1.0) / zz
        for order in range(1, a + 1):
            value = (ez - order * value) / zz
    return np.where(small, series, value)


class ModeAmplitude:
    """Decomposição exata ``Σ c·t^d·e^{μt}`` de um componente em cada modo.

    As bases são ``(λ+, λ-, -ν|ξ|²)``; os termos são pares (base, grau) em
    `TERMS`. O termo de grau 1 só é ativado nos modos confluentes, onde
    ``λ+ = λ- = -A|ξ|²``. `coefficients` tem forma ``(termos, componentes,
    ...)``.
    """

    TERMS = ((0, 0), (1, 0), (0, 1), (2, 0))

    def __init__(self, bases, coefficients, confluent=None):
        bases = np.asarray(bases, dtype=complex)
        coefficients = np.asarray(coefficients, dtype=complex)
        if np.any(bases.real > 0):
            raise exceptions.UnstableExponent(
                "cannot build mode amplitude: exponent with positive real part"
            )
        if coefficients.shape[0] != len(self.TERMS):
            raise ValueError(
                "cannot build mode amplitude: expected %d terms, got %d"
                % (len(self.TERMS), coefficients.shape[0])
            )
        self.bases = bases
        self.coefficients = coefficients
        self.confluent = (
            np.zeros(bases.shape[1:], dtype=bool) if confluent is None else np.asarray(confluent)
        )

    @property
    def exponents(self) -> np.ndarray:
        return np.array([self.bases[base] for base, _ in self.TERMS])

    @property
    def degrees(self):
        return tuple(degree for _, degree in self.TERMS)

    def terms(self, atol: float = 0.0):
        """Lista ``(coeficiente, expoente, grau)`` dos termos não nulos; útil
        para amplitudes de um único modo.
        """
        result = []
        for index, (base, degree) in enumerate(self.TERMS):
            c = self.coefficients[index]
            if np.max(np.abs(c)) > atol:
                result.append((c, self.bases[base], degree))
        return result

    def evaluate(self, t) -> np.ndarray:
        t = float(t)
        total = 0
        for index, (base, degree) in enumerate(self.TERMS):
            factor = (t ** degree) * np.exp(self.bases[base] * t)
            total = total + self.coefficients[index] * factor
        return total

    def derivative(self) -> "ModeAmplitude":
        coefficients = self.coefficients * self.exponents[:, np.newaxis]
        for index, (base, degree) in enumerate(self.TERMS):
            if degree == 0:
                continue
            lower = self.TERMS.index((base, degree - 1))
            coefficients[lower] = coefficients[lower] + degree * self.coefficients[index]
        return ModeAmplitude(self.bases, coefficients, self.confluent)

    def antiderivative(self, t, power: int = 0) -> np.ndarray:
        """``∫₀ᵗ s^p f(s) ds`` por modo e componente."""
        t = float(t)
        total = 0
        for index, (base, degree) in enumerate(self.TERMS):
            order = degree + power
            integral = t ** (order + 1) * _moments(order, self.bases[base] * t)
            total = total + self.coefficients[index] * integral
        return total

    def quadratic_integral(self, T, weight=1.0, power: int = 0) -> float:
        """``∫₀ᵀ τ^p Σ_modos weight·|f(τ)|² dτ`` em forma fechada.
        """
        T = float(T)
        weight = np.asarray(weight, dtype=float)
        total = 0.0
        for k, (base_k, degree_k) in enumerate(self.TERMS):
            ck = self.coefficients[k]
            if not np.any(ck):
                continue
            for l, (base_l, degree_l) in enumerate(self.TERMS):
                cl = self.coefficients[l]
                if not np.any(cl):
                    continue
                order = power + degree_k + degree_l
                mu = self.bases[base_k] + np.conj(self.bases[base_l])
                kernel = T ** (order + 1) * _moments(order, mu * T)
                pair = np.sum(ck * np.conj(cl), axis=0) * kernel
                total += float(np.sum(weight * pair.real))
        if not math.isfinite(total):
            raise exceptions.UnstableExponent(
                "cannot accumulate space-time integral: non-finite value"
            )
        return total


def _function_coefficients(x, params):
    """Coeficientes de E0, E1, Ĝ_φφ e do calor sobre `ModeAmplitude.TERMS`."""
    roots = symbols.lambda_pm(x, params)
    lam_plus = np.asarray(roots.lambda_plus, dtype=complex)
    lam_minus = np.asarray(roots.lambda_minus, dtype=complex)
    delta = lam_plus - lam_minus
    confluent = np.abs(delta) <= symbols.CONFLUENT_RTOL * params.A * x
    double = -params.A * x + 0j
    lam_plus = np.where(confluent, double, lam_plus)
    lam_minus = np.where(confluent, double, lam_minus)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(confluent, 0.0, 1.0 / np.where(confluent, 1.0, delta))

    zero = np.zeros_like(lam_plus)
    one = np.ones_like(lam_plus)
    E0 = np.array([inv, -inv, np.where(confluent, one, zero), zero])
    E1 = np.array([
        np.where(confluent, one, lam_plus * inv),
        -lam_minus * inv,
        np.where(confluent, double, zero),
        zero,
    ])
    G = np.array([
        np.where(confluent, one, -lam_minus * inv),
        lam_plus * inv,
        np.where(confluent, -double, zero),
        zero,
    ])
    heat = np.array([zero, zero, zero, one])
    bases = np.array([lam_plus, lam_minus, -params.nu * x + 0j])
    return bases, confluent, {"E0": E0, "E1": E1, "G": G, "H": heat}


def scalar_wave_amplitude(grid: Grid2D, params, value, rate) -> ModeAmplitude:
    """Solução de ``z'' + (ν+ν̃)|ξ|²z' + (κ₀γ|ξ|⁴ + γ²|ξ|²)z = 0`` com
    ``z(0) = value`` e ``z'(0) = rate``, isto é ``Ĝ_φφ·value + E0·rate``.
    """
    bases, confluent, fn = _function_coefficients(grid.xi_sq, params)
    coefficients = (
        fn["G"] * np.asarray(value)[np.newaxis] + fn["E0"] * np.asarray(rate)[np.newaxis]
    )
    return ModeAmplitude(bases, coefficients[:, np.newaxis], confluent)


def mode_amplitudes(state0: SpectralState, component) -> ModeAmplitude:
    """Amplitudes de `component` em toda a lattice."""
    component = Component(component)
    grid = state0.grid
    params = state0.params
    x = grid.xi_sq
    mask = grid.nyquist_mask
    xi = np.array([grid.xi1, grid.xi2])
    phi0 = state0.phi_hat.values
    m0 = state0.m_hat.values

    if component is Component.PHI:
        div_m0 = np.sum(xi * m0, axis=0) * mask
        return scalar_wave_amplitude(grid, params, phi0, -1j * params.gamma * div_m0)

    bases, confluent, fn = _function_coefficients(x, params)
    P, Q = _projectors(grid.xi1, grid.xi2)

    def vector(name, data):
        return fn[name][:, np.newaxis] * data[np.newaxis]

    potential = np.einsum("ij...,j...->i...", Q, m0)
    solenoidal = np.einsum("ij...,j...->i...", P, m0)
    coupling = -1j * xi * (params.gamma + params.kappa0 * x) * phi0 * mask
    k1 = vector("E1", potential)
    if component is Component.K1_MOMENTUM:
        coefficients = k1
    elif component is Component.STOKES_MOMENTUM:
        coefficients = vector("H", solenoidal)
    elif component is Component.DW_MOMENTUM:
        coefficients = k1 + vector("E0", coupling)
    else:
        coefficients = k1 + vector("E0", coupling) + vector("H", solenoidal)
    return ModeAmplitude(bases, coefficients, confluent)


def mode_amplitude(state0: SpectralState, component, xi) -> ModeAmplitude:
    """Amplitude de `component` no modo da lattice de número de onda `xi`."""
    grid = state0.grid
    k = np.asarray(xi, dtype=float) / grid.dxi
    if not np.allclose(k, np.rint(k), atol=1e-9):
        raise exceptions.ParameterDomainError(
            "cannot select mode %r: not on the lattice of spacing %s" % (tuple(xi), grid.dxi)
        )
    i2, i1 = grid.index_of(int(np.rint(k[0])), int(np.rint(k[1])))
    amplitude = mode_amplitudes(state0, component)
    return ModeAmplitude(
        amplitude.bases[:, i2, i1],
        amplitude.coefficients[:, :, i2, i1],
        amplitude.confluent[i2, i1],
    )


def _as_field(grid, values):
    if values.shape[0] == 1:
        return ScalarField.spectral(grid, values[0])
    return VectorField.spectral(grid, values)


def component_field(state0: SpectralState, component, t: float):
    if t < 0:
        raise exceptions.ParameterDomainError("cannot evaluate component: negative time %r" % t)
    return _as_field(state0.grid, mode_amplitudes(state0, component).evaluate(t))


def diffusion_wave_momentum(state0: SpectralState, t: float) -> VectorField:
    """``m(t)`` menos o fluxo de calor da parte solenoidal de ``m₀``."""
    return component_field(state0, Component.DW_MOMENTUM, t)


def spacetime_l2_closed_form(state0: SpectralState, component, T: float) -> float:
    if not T > 0:
        raise exceptions.ParameterDomainError("cannot integrate: horizon must be positive, got %r" % T)
    amplitude = mode_amplitudes(state0, component)
    return amplitude.quadratic_integral(T, state0.grid.parseval_weight)


def quadrature_times(T: float, steps: int) -> np.ndarray:
    """Grade ``0``, depois ``steps//2`` pontos geométricos de ``T·1e-4`` a
    ``T/10`` e o restante uniforme até ``T``.
    """
    if steps < MIN_QUADRATURE_STEPS:
        raise exceptions.ParameterDomainError(
            "cannot build quadrature grid: steps must be at least %d, got %r"
            % (MIN_QUADRATURE_STEPS, steps)
        )
    geometric = steps // 2
    uniform = steps - geometric
    return np.concatenate([
        [0.0],
        np.geomspace(T * 1e-4, T / 10.0, geometric),
        np.linspace(T / 10.0, T, uniform + 1)[1:],
    ])


def spacetime_l2_quadrature(state0: SpectralState, component, T: float, steps: int) -> float:
    times = quadrature_times(T, steps)
    amplitude = mode_amplitudes(state0, component)
    weight = state0.grid.parseval_weight
    values = [weight * float(np.sum(np.abs(amplitude.evaluate(t)) ** 2)) for t in times]
    return float(integrate.trapezoid(values, times))


def high_freq_part(state: SpectralState, params: symbols.ModelParams = None) -> SpectralState:
    params = params or state.params
    weights = symbols.cutoff_weights(state.grid.xi_norm, params)
    return state.scaled(weights.wM + weights.wInf)


def low_freq_part(state: SpectralState, params: symbols.ModelParams = None) -> SpectralState:
    params = params or state.params
    return state.scaled(symbols.cutoff_weights(state.grid.xi_norm, params).w1)


def semigroup_property_check(state0: SpectralState, t: float, s: float) -> float:
    """Maior defeito relativo ``‖Ĝ(t+s) - Ĝ(t)Ĝ(s)‖ / (1 + ‖Ĝ(t)‖‖Ĝ(s)‖)``
    sobre a lattice (norma de Frobenius por modo).
    """
    grid, params = state0.grid, state0.params
    Gt = green_matrix(t, grid.xi1, grid.xi2, params)
    Gs = green_matrix(s, grid.xi1, grid.xi2, params)
    Gts = green_matrix(t + s, grid.xi1, grid.xi2, params)
    product = np.einsum("ij...,jk...->ik...", Gt, Gs)

    def frobenius(M):
        return np.sqrt(np.sum(np.abs(M) ** 2, axis=(0, 1)))

    defect = frobenius(Gts - product) / (1.0 + frobenius(Gt) * frobenius(Gs))
    return float(np.max(defect))


def _energy_density(state: SpectralState) -> np.ndarray:
    params = state.params
    x = state.grid.xi_sq
    phi = np.abs(state.phi_hat.values) ** 2
    m = np.sum(np.abs(state.m_hat.values) ** 2, axis=0)
    return (params.gamma + params.kappa0 * x) * phi + params.gamma * m


def energy_norm(state: SpectralState) -> float:
    """``√(Σ w[(γ+κ₀|ξ|²)|φ̂|² + γ|m̂|²])``, não crescente ao longo do fluxo."""
    return math.sqrt(state.grid.parseval_weight * float(np.sum(_energy_density(state))))


def contraction_defect(state0: SpectralState, times) -> float:
    """Maior crescimento, modo a modo, da densidade de energia entre instantes
    consecutivos, relativo à energia total inicial.
    """
    times = np.sort(np.asarray(times, dtype=float))
    reference = float(np.sum(_energy_density(state0)))
    if reference == 0:
        return 0.0
    previous = _energy_density(evolve(state0, times[0]))
    worst = 0.0
    for t in times[1:]:
        current = _energy_density(evolve(state0, t))
        worst = max(worst, float(np.max(current - previous)))
        previous = current
    return max(worst, 0.0) / reference


def _high_region(grid, params) -> np.ndarray:
    return symbols.cutoff_weights(grid.xi_norm, params).w1 == 0


def plateau_rate(state0: SpectralState) -> float:
    """Maior parte real entre os expoentes efetivamente presentes nos modos
    onde φ₁ se anula.
    """
    region = _high_region(state0.grid, state0.params)
    rate = -math.inf
    for component in (Component.PHI, Component.MOMENTUM):
        amplitude = mode_amplitudes(state0, component)
        for coefficient, exponent, _ in amplitude.terms():
            present = np.any(np.abs(coefficient) > 0, axis=0) & region
            if np.any(present):
                rate = max(rate, float(np.max(exponent.real[present])))
    if rate == -math.inf:
        raise exceptions.InadmissibleData(
            "cannot compute plateau rate: data has no modes in the high-frequency region"
        )
    return rate


def decay_rate_fit(state0: SpectralState, T: float, samples: int = 64) -> FitResult:
    """Ajuste linear de ``log ‖E_∞u(t)‖`` (norma de energia) em ``[T/2, T]``."""
    times = np.linspace(T / 2.0, T, samples)
    high0 = high_freq_part(state0)
    norms = [energy_norm(evolve(high0, t)) for t in times]
    if not all(value > 0 for value in norms):
        raise exceptions.UnstableExponent(
            "cannot fit decay rate: high-frequency norm vanished before T=%r" % T
        )
    fit = stats.linregress(times, np.log(norms))
    LOGGER.debug("high-frequency decay fit: %s", fit)
    return FitResult(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=float(fit.rvalue ** 2),
        samples=samples,
        window=(T / 2.0, T),
    )

