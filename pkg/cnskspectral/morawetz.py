"""Verificadores numéricos para a equação escalar duplamente dissipativa

    φ_tt - Δφ_t - Δφ + κ₀Δ²φ = 0,   φ(0) = φ₀,   φ_t(0) = -div m₀,

e para as funções auxiliares Φ, w e v das estimativas do tipo Morawetz.

Todas as funções exigem a normalização ν+ν̃ = 1, γ = 1 (ver
`symbols.normalize_params`). As integrais no tempo são calculadas modo a modo
em forma fechada por `semigroup.ModeAmplitude`.

A função auxiliar usada aqui é ``w = ∫₀ᵗ φ + div Φ``, com ``w(0) = div Φ`` e
``w_t(0) = φ₀``; com ``(-Δ + κ₀Δ²)Φ = m₀ + ∇φ₀`` é este o sinal que satisfaz a
equação homogênea.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import exceptions
from . import symbols
from .grid import (
    Grid2D,
    ScalarField,
    VectorField,
    apply_symbol,
    l1_norm,
    l2_norm,
)
from .semigroup import ModeAmplitude, scalar_wave_amplitude

__all__ = [
    "ScalarWaveState",
    "EnergyLedger",
    "evolve_scalar",
    "energy_ledger",
    "energy_identity_check",
    "solve_Phi",
    "phi_residual",
    "build_w",
    "build_v",
    "check_density_bound",
    "check_density_decay",
    "check_stokes_bound",
    "check_w_estimates",
    "hardy_surrogate",
    "j0_constant",
    "j1_constant",
    "check_admissible",
    "horizon_guard",
]

LOGGER = logging.getLogger(__name__)

ZERO_MEAN_RTOL = 1e-12
SOLENOIDAL_RTOL = 1e-10
W_GAUSS_ORDER = 16
MAX_W_PANELS = 4096


@dataclass(frozen=True)
class ScalarWaveState:
    phi_hat: ScalarField
    phi_t_hat: ScalarField
    params: symbols.ModelParams
    time: float


@dataclass(frozen=True)
class EnergyLedger:
    t: float
    kinetic: float
    gradient: float
    capillary: float
    dissipated: float

    @property
    def total(self) -> float:
        return self.kinetic + self.gradient + self.capillary

    @property
    def balance(self) -> float:
        return self.total + self.dissipated


@dataclass(frozen=True)
class WConstruction:
    w: ScalarField
    w_t: ScalarField
    residual: float
    value_defect: float
    rate_defect: float


@dataclass(frozen=True)
class VConstruction:
    v: ScalarField
    v_t: ScalarField
    residual: float


@dataclass(frozen=True)
class DensityBound:
    """Integrais ``∫₀ᵀ‖φ‖²`` por horizonte. `zero_mode` guarda a parcela do
    modo ``ξ = 0``, que na caixa periódica é conservado e cresce como
    ``|φ̂₀(0)|²T``.
    """

    horizons: Tuple[float, ...]
    integrals: Tuple[float, ...]
    J0: float
    zero_mode: Tuple[float, ...] = ()

    @property
    def mean_free(self) -> Tuple[float, ...]:
        """Integrais sem a parcela do modo ``ξ = 0``."""
        if not self.zero_mode:
            return self.integrals
        return tuple(total - zero for total, zero in zip(self.integrals, self.zero_mode))

    @property
    def ratios(self):
        if self.J0 == 0:
            return tuple(math.nan for _ in self.integrals)
        return tuple(value / self.J0 for value in self.integrals)

    @property
    def saturation(self):
        """Razões entre integrais de horizontes consecutivos."""
        pairs = zip(self.integrals[:-1], self.integrals[1:])
        return tuple(b / a if a > 0 else math.nan for a, b in pairs)

    @property
    def increments(self):
        pairs = zip(self.integrals[:-1], self.integrals[1:])
        return tuple(b - a for a, b in pairs)


@dataclass(frozen=True)
class DensityDecay:
    times: Tuple[float, ...]
    values: Tuple[float, ...]
    J0: float

    @property
    def sup(self) -> float:
        return max(self.values) if self.values else 0.0

    @property
    def sup_time(self) -> float:
        return self.times[int(np.argmax(self.values))] if self.values else 0.0

    def _decade_max(self, lo, hi):
        selected = [v for t, v in zip(self.times, self.values) if lo <= t <= hi]
        return max(selected) if selected else math.nan

    @property
    def last_decade_max(self) -> float:
        t_max = self.times[-1]
        return self._decade_max(t_max / 10.0, t_max)

    @property
    def previous_decade_max(self) -> float:
        t_max = self.times[-1]
        return self._decade_max(t_max / 100.0, t_max / 10.0)

    @property
    def constant(self) -> float:
        """``sup (1+t)‖φ(t)‖² / J₀``."""
        if self.J0 == 0:
            return 0.0 if self.sup == 0 else math.inf
        return self.sup / self.J0

    @property
    def decay_ratio(self) -> float:
        previous = self.previous_decade_max
        if previous == 0:
            return 0.0 if self.last_decade_max == 0 else math.inf
        return self.last_decade_max / previous


@dataclass(frozen=True)
class StokesBound:
    T: float
    lhs: float
    rhs_surrogate: float
    identity_defect: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs_surrogate if self.rhs_surrogate > 0 else math.nan


@dataclass(frozen=True)
class WEstimate:
    T: float
    w_base_defect: float
    b_identity_defect: float
    t_energy_w: float
    energy_w_lhs: float
    capillary_w_lhs: float
    v_lhs: float
    v_residual: float


def _require_normalized(params: symbols.ModelParams, action: str) -> None:
    if not symbols.is_normalized(params):
        raise exceptions.ParameterDomainError(
            "cannot %s: parameters must satisfy nu + nu_tilde = 1 and gamma = 1, "
            "use normalize_params first" % action
        )


def _weighted_sq(grid: Grid2D, values, weight=1.0) -> float:
    return grid.parseval_weight * float(np.sum(weight * np.abs(values) ** 2))


def _relative(grid, residual, scale_terms) -> float:
    scale = math.sqrt(_weighted_sq(grid, sum(np.abs(term) for term in scale_terms)))
    value = math.sqrt(_weighted_sq(grid, residual))
    if scale == 0:
        return 0.0 if value == 0 else math.inf
    return value / scale


def _phi_amplitude(phi0: ScalarField, m0: VectorField, params) -> ModeAmplitude:
    rate = -m0.divergence().values
    return scalar_wave_amplitude(phi0.grid, params, phi0.values, rate)


def evolve_scalar(phi0: ScalarField, m0: VectorField, t: float, params) -> ScalarWaveState:
    _require_normalized(params, "evolve scalar equation")
    if t < 0:
        raise exceptions.ParameterDomainError("cannot evolve scalar equation: negative time %r" % t)
    amplitude = _phi_amplitude(phi0, m0, params)
    grid = phi0.grid
    return ScalarWaveState(
        ScalarField.spectral(grid, amplitude.evaluate(t)[0]),
        ScalarField.spectral(grid, amplitude.derivative().evaluate(t)[0]),
        params,
        float(t),
    )


def initial_energy(phi0: ScalarField, m0: VectorField, params) -> float:
    """``½(‖div m₀‖² + ‖∇φ₀‖² + κ₀‖Δφ₀‖²)``."""
    grid = phi0.grid
    x = grid.xi_sq
    return 0.5 * (
        _weighted_sq(grid, m0.divergence().values)
        + _weighted_sq(grid, phi0.values, x)
        + params.kappa0 * _weighted_sq(grid, phi0.values, x * x)
    )


def energy_ledger(phi0: ScalarField, m0: VectorField, params, t: float) -> EnergyLedger:
    _require_normalized(params, "build energy ledger")
    grid = phi0.grid
    x = grid.xi_sq
    amplitude = _phi_amplitude(phi0, m0, params)
    rate = amplitude.derivative()
    phi = amplitude.evaluate(t)
    phi_t = rate.evaluate(t)
    dissipated = rate.quadratic_integral(t, grid.parseval_weight * x) if t > 0 else 0.0
    return EnergyLedger(
        t=float(t),
        kinetic=0.5 * _weighted_sq(grid, phi_t),
        gradient=0.5 * _weighted_sq(grid, phi, x),
        capillary=0.5 * params.kappa0 * _weighted_sq(grid, phi, x * x),
        dissipated=dissipated,
    )


def energy_ledgers(phi0, m0, params, t_grid) -> List[EnergyLedger]:
    return [energy_ledger(phi0, m0, params, t) for t in t_grid]


def energy_identity_check(phi0: ScalarField, m0: VectorField, params, t_grid) -> float:
    """Maior violação relativa de
    ``½(‖φ_t‖² + ‖∇φ‖² + κ₀‖Δφ‖²) + ∫₀ᵗ‖∇φ_τ‖²dτ = energia inicial``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0):
        raise exceptions.ParameterDomainError("cannot check energy identity: time grid must increase")
    reference = initial_energy(phi0, m0, params)
    if reference == 0:
        return 0.0
    ledgers = energy_ledgers(phi0, m0, params, t_grid)
    defect = max(abs(ledger.balance - reference) for ledger in ledgers) / reference
    LOGGER.debug("energy identity defect over %d samples: %s", len(ledgers), defect)
    return defect


def _phi_rhs(phi0: ScalarField, m0: VectorField) -> np.ndarray:
    return m0.values + phi0.gradient().values


def solve_Phi(phi0: ScalarField, m0: VectorField, params) -> VectorField:
    """Resolve ``(-Δ + κ₀Δ²)Φ = m₀ + ∇φ₀`` com ``Φ̂(0) = 0``."""
    grid = phi0.grid
    rhs = _phi_rhs(phi0, m0)
    i2, i1 = grid.index_of(0, 0)
    zero_mode = float(np.linalg.norm(rhs[:, i2, i1]))
    scale = float(np.max(np.abs(rhs))) if rhs.size else 0.0
    if zero_mode > ZERO_MEAN_RTOL * scale:
        raise exceptions.InadmissibleData(
            "cannot solve for Phi: m0 + grad(phi0) must have zero mean "
            "(Hardy-space surrogate), mean mode has magnitude %r" % zero_mode
        )
    dl, _ = symbols.inverse_elliptic_symbols(grid.xi_sq, params.kappa0)
    return VectorField.spectral(grid, dl * rhs)


def phi_residual(Phi: VectorField, phi0: ScalarField, m0: VectorField, params) -> float:
    """Resíduo relativo, em L² discreto, da equação de Φ."""
    grid = Phi.grid
    x = grid.xi_sq
    rhs = _phi_rhs(phi0, m0)
    residual = (x + params.kappa0 * x * x) * Phi.values - rhs
    norm = math.sqrt(_weighted_sq(grid, rhs))
    value = math.sqrt(_weighted_sq(grid, residual))
    return value / norm if norm > 0 else value


def _w_amplitude(phi0: ScalarField, Phi: VectorField, params) -> ModeAmplitude:
    return scalar_wave_amplitude(phi0.grid, params, Phi.divergence().values, phi0.values)


def _gauss_primitive(amplitude: ModeAmplitude, t: float) -> np.ndarray:
    """``∫₀ᵗ φ̂`` por Gauss-Legendre composto, com painéis de largura até
    ``1/max|μ|``.
    """
    if t == 0:
        return np.zeros_like(amplitude.evaluate(0.0)[0])
    rate = float(np.max(np.abs(amplitude.exponents)))
    panels = min(MAX_W_PANELS, int(math.ceil(t * rate)) + 1)
    nodes, weights = leggauss(W_GAUSS_ORDER)
    edges = np.linspace(0.0, t, panels + 1)
    total = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        for node, weight in zip(nodes, weights):
            total = total + half * weight * amplitude.evaluate(lo + half * (node + 1.0))[0]
    return total


def build_w(phi0: ScalarField, m0: VectorField, Phi: VectorField, params, t: float) -> WConstruction:
    """Constrói ``w(t) = ∫₀ᵗφ + div Φ`` pela primitiva da decomposição
    exponencial de φ̂ e mede o resíduo de ``w_tt - Δw_t - Δw + κ₀Δ²w = 0``
    relativo à escala dos dados iniciais.

    `value_defect` compara a primitiva fechada com quadratura de Gauss-Legendre
    de φ̂ em ``[0, t]``.
    """
    _require_normalized(params, "build w")
    if t < 0:
        raise exceptions.ParameterDomainError("cannot build w: negative time %r" % t)
    grid = phi0.grid
    x = grid.xi_sq
    stiffness = x + params.kappa0 * x * x
    amplitude = _phi_amplitude(phi0, m0, params)
    rate = amplitude.derivative()
    w0 = Phi.divergence().values

    w = amplitude.antiderivative(t)[0] + w0
    w_t = amplitude.evaluate(t)[0]
    w_tt = rate.evaluate(t)[0]
    residual = w_tt + x * w_t + stiffness * w
    scale_terms = (rate.evaluate(0.0)[0], x * phi0.values, stiffness * w0)

    primitive = amplitude.antiderivative(t)[0]
    value_defect = _relative(grid, primitive - _gauss_primitive(amplitude, t), (primitive,))
    rate_defect = _relative(grid, amplitude.evaluate(0.0)[0] - phi0.values, (phi0.values,))
    return WConstruction(
        w=ScalarField.spectral(grid, w),
        w_t=ScalarField.spectral(grid, w_t),
        residual=_relative(grid, residual, scale_terms),
        value_defect=value_defect,
        rate_defect=rate_defect,
    )


def build_v(phi0: ScalarField, m0: VectorField, Phi: VectorField, params, t: float) -> VConstruction:
    """Constrói ``v(t) = ∫₀ᵗ w``, solução de
    ``v_tt - Δv_t - Δv + κ₀Δ²v = φ₀ - Δ div Φ`` com ``v(0) = 0`` e
    ``v_t(0) = div Φ``.
    """
    _require_normalized(params, "build v")
    grid = phi0.grid
    x = grid.xi_sq
    stiffness = x + params.kappa0 * x * x
    w_amp = _w_amplitude(phi0, Phi, params)
    div_Phi = Phi.divergence().values

    v = w_amp.antiderivative(t)[0]
    v_t = w_amp.evaluate(t)[0]
    v_tt = w_amp.derivative().evaluate(t)[0]
    source = phi0.values + x * div_Phi
    residual = v_tt + x * v_t + stiffness * v - source
    return VConstruction(
        v=ScalarField.spectral(grid, v),
        v_t=ScalarField.spectral(grid, v_t),
        residual=_relative(grid, residual, (phi0.values, x * div_Phi)),
    )


def hardy_surrogate(field) -> float:
    """``‖f‖_{L¹} + Σ_j ‖R_j f‖_{L¹}`` somado sobre os componentes, no lugar da
    norma de ℋ¹.
    """
    grid = field.grid
    riesz = symbols.riesz_symbols(grid.xi1, grid.xi2)
    if isinstance(field, VectorField):
        return sum(hardy_surrogate(field.component(i)) for i in range(2))
    total = l1_norm(field)
    for j in range(2):
        total += l1_norm(apply_symbol(field, riesz[j], odd=True))
    return total


def h1_norm_sq(field) -> float:
    return _weighted_sq(field.grid, field.values, 1.0 + field.grid.xi_sq)


def _laplacian_sq(phi0: ScalarField) -> float:
    return _weighted_sq(phi0.grid, phi0.values, phi0.grid.xi_sq ** 2)


def j1_constant(phi0: ScalarField, m0: VectorField) -> float:
    """``h(m₀+∇φ₀)² + h(φ₀)² + ‖φ₀‖²`` com h o substituto de ℋ¹."""
    combined = VectorField.spectral(phi0.grid, _phi_rhs(phi0, m0))
    return hardy_surrogate(combined) ** 2 + hardy_surrogate(phi0) ** 2 + l2_norm(phi0) ** 2


def j0_constant(phi0: ScalarField, m0: VectorField, params) -> float:
    kappa0 = params.kappa0
    combined = VectorField.spectral(phi0.grid, _phi_rhs(phi0, m0))
    capillary = (kappa0 + kappa0 ** 2) * (
        h1_norm_sq(phi0) + h1_norm_sq(m0) + _laplacian_sq(phi0)
    )
    return (
        capillary
        + (1.0 + kappa0) * hardy_surrogate(combined) ** 2
        + hardy_surrogate(phi0) ** 2
        + l2_norm(phi0) ** 2
    )


def check_admissible(phi0: ScalarField, m0: VectorField, rtol: float = ZERO_MEAN_RTOL) -> None:
    """Exige média nula de φ₀ e de m₀ + ∇φ₀ (relativa à norma L¹) e normas L¹
    finitas.
    """
    grid = phi0.grid
    i2, i1 = grid.index_of(0, 0)
    combined = VectorField.spectral(grid, _phi_rhs(phi0, m0))
    checks = (
        ("phi0", abs(phi0.values[i2, i1]), l1_norm(phi0)),
        ("m0 + grad(phi0)", float(np.linalg.norm(combined.values[:, i2, i1])), l1_norm(combined)),
    )
    for name, mean, norm in checks:
        if not math.isfinite(norm):
            raise exceptions.InadmissibleData(
                "cannot accept data: %s has no finite L1 norm" % name
            )
        if mean > rtol * norm:
            raise exceptions.InadmissibleData(
                "cannot accept data: %s must have zero mean (Hardy-space surrogate), "
                "|mean| = %r for L1 norm %r" % (name, mean, norm)
            )


def horizon_guard(grid: Grid2D, nu: float, T: float) -> None:
    horizon = grid.box_horizon(nu)
    if T > horizon:
        raise exceptions.ParameterDomainError(
            "cannot run to T=%r: exceeds the box horizon 0.05*(L/pi)**2/nu = %r" % (T, horizon)
        )


def check_density_bound(
    phi0: ScalarField, m0: VectorField, params, horizons, require_admissible: bool = True
) -> DensityBound:
    """``∫₀ᵀ‖φ‖²`` em forma fechada para cada horizonte, com ``J₀``."""
    _require_normalized(params, "check density bound")
    if require_admissible:
        check_admissible(phi0, m0)
    grid = phi0.grid
    amplitude = _phi_amplitude(phi0, m0, params)
    weight = grid.parseval_weight
    zero_weight = np.zeros(grid.shape)
    zero_weight[grid.index_of(0, 0)] = weight
    integrals = tuple(amplitude.quadratic_integral(T, weight) for T in horizons)
    zero_mode = tuple(amplitude.quadratic_integral(T, zero_weight) for T in horizons)
    return DensityBound(
        tuple(float(T) for T in horizons), integrals, j0_constant(phi0, m0, params), zero_mode
    )


def check_density_decay(
    phi0: ScalarField, m0: VectorField, params, t_grid, require_admissible: bool = True
) -> DensityDecay:
    """``(1+t)‖φ(t)‖²`` ao longo de `t_grid`."""
    _require_normalized(params, "check density decay")
    if require_admissible:
        check_admissible(phi0, m0)
    grid = phi0.grid
    amplitude = _phi_amplitude(phi0, m0, params)
    values = tuple(
        (1.0 + t) * _weighted_sq(grid, amplitude.evaluate(t)) for t in t_grid
    )
    return DensityDecay(tuple(float(t) for t in t_grid), values, j0_constant(phi0, m0, params))


def check_stokes_bound(m0_in: VectorField, nu: float, T: float) -> StokesBound:
    """Fluxo de calor puro ``û(t) = e^{-ν|ξ|²t}m̂₀`` e a identidade
    ``∫₀ᵀ‖u‖² + (ν/2)‖∇v(T)‖² = (u₀, v(T))`` com ``v = ∫₀ᵀu``.
    """
    grid = m0_in.grid
    x = grid.xi_sq
    m = m0_in.values
    divergence = np.abs(np.sum(np.array([grid.xi1, grid.xi2]) * m, axis=0))
    scale = float(np.max(np.sqrt(x) * np.sqrt(np.sum(np.abs(m) ** 2, axis=0))))
    if float(np.max(divergence)) > SOLENOIDAL_RTOL * scale:
        raise exceptions.InadmissibleData(
            "cannot check Stokes bound: m0_in is not divergence free"
        )

    rate = nu * x
    positive = rate > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        safe = np.where(positive, rate, 1.0)
        energy_factor = np.where(positive, -np.expm1(-2.0 * safe * T) / (2.0 * safe), T)
        v_factor = np.where(positive, -np.expm1(-safe * T) / safe, T)
    m_sq = np.sum(np.abs(m) ** 2, axis=0)
    v = v_factor * m

    lhs = grid.parseval_weight * float(np.sum(energy_factor * m_sq))
    gradient_v = _weighted_sq(grid, v, x)
    pairing = grid.parseval_weight * float(np.real(np.sum(m * np.conj(v))))
    if pairing > 0:
        defect = abs(lhs + 0.5 * nu * gradient_v - pairing) / pairing
    else:
        defect = 0.0
    return StokesBound(float(T), lhs, l1_norm(m0_in) ** 2, defect)


def check_w_estimates(phi0: ScalarField, m0: VectorField, params, horizons) -> List[WEstimate]:
    """Identidades e lados esquerdos das estimativas de w e v para cada
    horizonte.
    """
    _require_normalized(params, "check w estimates")
    Phi = solve_Phi(phi0, m0, params)
    grid = phi0.grid
    pw = grid.parseval_weight
    x = grid.xi_sq
    kappa0 = params.kappa0
    phi_amp = _phi_amplitude(phi0, m0, params)
    w_amp = _w_amplitude(phi0, Phi, params)
    w0 = Phi.divergence().values

    estimates = []
    for T in horizons:
        phi_T = phi_amp.evaluate(T)[0]
        w_T = w_amp.evaluate(T)[0]
        int_phi_sq = phi_amp.quadratic_integral(T, pw)
        int_grad_w = w_amp.quadratic_integral(T, pw * x)
        int_lap_w = kappa0 * w_amp.quadratic_integral(T, pw * x * x)
        int_grad_phi = phi_amp.quadratic_integral(T, pw * x)
        int_s_grad_phi = phi_amp.quadratic_integral(T, pw * x, power=1)

        grad_w_T = _weighted_sq(grid, w_T, x)
        grad_w_0 = _weighted_sq(grid, w0, x)
        pair_T = pw * float(np.real(np.sum(phi_T * np.conj(w_T))))
        pair_0 = pw * float(np.real(np.sum(phi0.values * np.conj(w0))))
        rhs_terms = (int_grad_w, int_lap_w, 0.5 * grad_w_T, pair_T, -0.5 * grad_w_0, -pair_0)
        w_base_scale = abs(int_phi_sq) + sum(abs(term) for term in rhs_terms)
        w_base_defect = (
            abs(int_phi_sq - sum(rhs_terms)) / w_base_scale if w_base_scale > 0 else 0.0
        )

        energy_w_T = _weighted_sq(grid, phi_T) + _weighted_sq(grid, w_T, x + kappa0 * x * x)
        int_energy_w = int_phi_sq + int_grad_w + int_lap_w
        b_lhs = T * energy_w_T + 2.0 * int_s_grad_phi
        b_defect = abs(b_lhs - int_energy_w) / int_energy_w if int_energy_w > 0 else 0.0

        v = build_v(phi0, m0, Phi, params, T)
        v_lhs = (
            0.5 * _weighted_sq(grid, v.v_t.values)
            + 0.25 * _weighted_sq(grid, v.v.values, x)
            + int_grad_w
            + 0.5 * kappa0 * _weighted_sq(grid, v.v.values, x * x)
        )
        estimates.append(
            WEstimate(
                T=float(T),
                w_base_defect=w_base_defect,
                b_identity_defect=b_defect,
                t_energy_w=T * energy_w_T,
                energy_w_lhs=energy_w_T + int_grad_phi,
                capillary_w_lhs=int_lap_w,
                v_lhs=v_lhs,
                v_residual=v.residual,
            )
        )
    return estimates
