"""Parâmetros do modelo e símbolos de Fourier do sistema linearizado.

Todas as funções deste módulo são puras e vetorizadas sobre `xi_sq` (quadrado
do número de onda) e, quando aplicável, sobre `t`. Nenhuma delas conhece a
grade espectral: recebem números de onda e devolvem os multiplicadores
correspondentes.

As diferenças divididas

    E0(t, ξ) = (e^{λ+ t} - e^{λ- t}) / (λ+ - λ-)
    E1(t, ξ) = (λ+ e^{λ+ t} - λ- e^{λ- t}) / (λ+ - λ-)

são avaliadas na forma analítica ``e^{-A|ξ|²t} sinh(Ast)/(As)``, com série de
Taylor de ``sinh(z)/z`` quando ``|Ast| < 1e-4``, de modo que o limite confluente
(raiz dupla) é exato até a precisão de máquina.
"""
import enum
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import exceptions

__all__ = [
    "Regime",
    "ModelParams",
    "RootPair",
    "CutoffWeights",
    "CutoffRadii",
    "Rescaling",
    "derive_params",
    "normalize_params",
    "lambda_pm",
    "divided_diff_E0",
    "divided_diff_E1",
    "green_phi_phi",
    "cutoff_radii",
    "cutoff_weights",
    "lowfreq_radius",
    "heat_symbol",
    "helmholtz_symbol",
    "helmholtz_symbols",
    "inverse_elliptic_symbols",
    "riesz_symbols",
    "characteristic_residual",
]

LOGGER = logging.getLogger(__name__)

SERIES_THRESHOLD = 1e-4
CONFLUENT_RTOL = 1e-8


class Regime(enum.Enum):
    SUB_CRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPER_CRITICAL = "supercritical"

    @classmethod
    def of(cls, K: float) -> "Regime":
        """Classifica `K` por comparação exata com 1, sem tolerância.
        """
        if K < 1:
            return cls.SUB_CRITICAL
        elif K == 1:
            return cls.CRITICAL
        return cls.SUPER_CRITICAL


@dataclass(frozen=True)
class ModelParams:
    """Coeficientes físicos ν, ν̃, γ, κ₀ e os derivados A, B, K.

    Instâncias devem ser obtidas por meio de `derive_params`, que valida o
    domínio e garante a consistência dos campos derivados.
    """

    nu: float
    nu_tilde: float
    gamma: float
    kappa0: float
    A: float
    B: float
    K: float
    regime: Regime

    @property
    def total_viscosity(self) -> float:
        return self.nu + self.nu_tilde

    def as_dict(self) -> dict:
        return {
            "nu": self.nu,
            "nu_tilde": self.nu_tilde,
            "gamma": self.gamma,
            "kappa0": self.kappa0,
            "A": self.A,
            "B": self.B,
            "K": self.K,
            "regime": self.regime.value,
        }


class RootPair(NamedTuple):
    lambda_plus: np.ndarray
    lambda_minus: np.ndarray
    discriminant: np.ndarray


class CutoffWeights(NamedTuple):
    w1: np.ndarray
    wM: np.ndarray
    wInf: np.ndarray


class CutoffRadii(NamedTuple):
    """Raios dos platôs: φ₁ = 1 em ``|ξ| <= low_inner`` e 0 em
    ``|ξ| >= low_outer``; φ_∞ = 0 em ``|ξ| <= high_inner`` e 1 em
    ``|ξ| >= high_outer``.
    """

    low_inner: float
    low_outer: float
    high_inner: float
    high_outer: float


class Rescaling(NamedTuple):
    """Mudança de variáveis ``t = time * s`` e ``x = length * y`` que leva o
    problema à normalização ν+ν̃ = 1, γ = 1.
    """

    time: float
    length: float

    def horizon(self, T: float) -> float:
        return T / self.time

    def half_width(self, L: float) -> float:
        return L / self.length

    def as_dict(self) -> dict:
        return {"time": self.time, "length": self.length}


def _out(value):
    value = np.asarray(value)
    return value[()] if value.ndim == 0 else value


def _check_time(t) -> None:
    if np.any(np.asarray(t) < 0):
        raise exceptions.ParameterDomainError(
            "cannot evaluate symbol: negative time %r" % (t,)
        )


def derive_params(nu: float, nu_tilde: float, gamma: float, kappa0: float) -> ModelParams:
    problems = []
    if not nu > 0:
        problems.append("nu must be positive, got %r" % nu)
    if not nu + nu_tilde > 0:
        problems.append("nu + nu_tilde must be positive, got %r" % (nu + nu_tilde))
    if not gamma > 0:
        problems.append("gamma must be positive, got %r" % gamma)
    if not kappa0 >= 0:
        problems.append("kappa0 must be non-negative, got %r" % kappa0)
    if problems:
        raise exceptions.ParameterDomainError(
            "cannot derive model parameters: %s" % "; ".join(problems)
        )

    total = float(nu) + float(nu_tilde)
    K = 2.0 * math.sqrt(float(kappa0) * float(gamma)) / total
    params = ModelParams(
        nu=float(nu),
        nu_tilde=float(nu_tilde),
        gamma=float(gamma),
        kappa0=float(kappa0),
        A=total / 2.0,
        B=2.0 * float(gamma) / total,
        K=K,
        regime=Regime.of(K),
    )
    LOGGER.debug("derived model parameters: %s", params)
    return params


def normalize_params(params: ModelParams):
    """Reduz `params` ao caso ν+ν̃ = 1, γ = 1.

    Retorna o par ``(normalizados, Rescaling)``. O número K é invariante pela
    mudança de escala e κ₀ passa a valer ``κ₀γ/(ν+ν̃)²``.
    """
    total = params.total_viscosity
    rescaling = Rescaling(time=total / params.gamma ** 2, length=total / params.gamma)
    normalized = derive_params(
        params.nu / total,
        params.nu_tilde / total,
        1.0,
        params.kappa0 * params.gamma / total ** 2,
    )
    return normalized, rescaling


def is_normalized(params: ModelParams) -> bool:
    return math.isclose(params.total_viscosity, 1.0, rel_tol=1e-14) and math.isclose(
        params.gamma, 1.0, rel_tol=1e-14
    )


def lambda_pm(xi_sq, params: ModelParams) -> RootPair:
    """Raízes ``λ± = -A(|ξ|² ± √(|ξ|⁴ - B²|ξ|² - K²|ξ|⁴))`` com a raiz
    quadrada principal do discriminante.

    Quando o discriminante é não negativo, a raiz de menor módulo é calculada
    como ``-A(B²|ξ|² + K²|ξ|⁴)/(|ξ|² + √disc)``, evitando o cancelamento de
    ``|ξ|² - √disc`` em altas frequências.
    """
    x = np.asarray(xi_sq, dtype=float)
    if np.any(x < 0):
        raise exceptions.ParameterDomainError(
            "cannot compute roots: negative squared wavenumber"
        )
    A, B, K = params.A, params.B, params.K
    disc = x * x - B * B * x - K * K * x * x
    s = np.sqrt(disc.astype(complex))
    lam_plus = -A * (x + s)
    lam_minus = -A * (x - s)

    real = (disc >= 0) & (x > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = (B * B * x + K * K * x * x) / (x + s.real)
    lam_minus = np.where(real, -A * small + 0j, lam_minus)
    return RootPair(_out(lam_plus), _out(lam_minus), _out(disc))


def characteristic_residual(z, xi_sq, params: ModelParams):
    """Resíduo de ``z² + (ν+ν̃)|ξ|²z + κ₀γ|ξ|⁴ + γ²|ξ|²``.
    """
    x = np.asarray(xi_sq, dtype=float)
    z = np.asarray(z, dtype=complex)
    return _out(
        z * z
        + params.total_viscosity * x * z
        + params.kappa0 * params.gamma * x * x
        + params.gamma ** 2 * x
    )


def _sinhc(z):
    small = np.abs(z) < SERIES_THRESHOLD
    z2 = z * z
    series = 1.0 + z2 / 6.0 * (1.0 + z2 / 20.0 * (1.0 + z2 / 42.0))
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        direct = np.sinh(z) / np.where(small, 1.0, z)
    return np.where(small, series, direct)


def divided_differences(t, xi_sq, params: ModelParams):
    """Retorna o par ``(E0, E1)`` avaliado em `t` e `xi_sq` (com broadcast).

    Para ``Re(Ast) > 1`` (raízes reais bem separadas) usa-se a forma das
    exponenciais, que não transborda; caso contrário a forma com ``sinh``.
    """
    _check_time(t)
    x, t = np.broadcast_arrays(
        np.asarray(xi_sq, dtype=float), np.asarray(t, dtype=float)
    )
    roots = lambda_pm(x, params)
    lam_plus = np.asarray(roots.lambda_plus)
    lam_minus = np.asarray(roots.lambda_minus)
    s = np.sqrt(np.asarray(roots.discriminant).astype(complex))
    z = params.A * s * t
    damp = np.exp(-params.A * x * t)
    sinhc = _sinhc(z)
    wide = z.real > 1.0

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        delta = lam_plus - lam_minus
        exp_plus = np.exp(lam_plus * t)
        exp_minus = np.exp(lam_minus * t)
        e0_far = (exp_plus - exp_minus) / delta
        e1_far = (lam_plus * exp_plus - lam_minus * exp_minus) / delta
        e0_near = t * damp * sinhc
        e1_near = damp * (np.cosh(z) - params.A * x * t * sinhc)

    E0 = np.where(wide, e0_far, e0_near)
    E1 = np.where(wide, e1_far, e1_near)
    return _out(E0), _out(E1)


def divided_diff_E0(t, xi_sq, params: ModelParams):
    return divided_differences(t, xi_sq, params)[0]


def divided_diff_E1(t, xi_sq, params: ModelParams):
    return divided_differences(t, xi_sq, params)[1]


def green_phi_phi(t, xi_sq, params: ModelParams):
    """Núcleo φφ pela identidade ``G = E1 + 2A|ξ|²E0``.
    """
    E0, E1 = divided_differences(t, xi_sq, params)
    x = np.asarray(xi_sq, dtype=float)
    return _out(E1 + 2.0 * params.A * x * E0)


def cutoff_radii(params: ModelParams) -> CutoffRadii:
    """Raios das funções de corte conforme a análise de casos em
    ``b = B/(2√|1-K²|)``.

    Quando ``b == 1`` o platô interno de φ₁ degeneraria no raio externo; nesse
    caso usa-se o raio interno 1/2, como no primeiro caso.
    """
    if params.K == 1:
        return CutoffRadii(0.5, 1.0, 0.5, 1.0)

    gap = math.sqrt(abs(1.0 - params.K ** 2))
    b = params.B / (2.0 * gap)
    middle = params.B / math.sqrt(2.0 * abs(1.0 - params.K ** 2))
    if b > 1:
        low = (0.5, 1.0)
    elif middle > 1:
        low = (b if b < 1 else 0.5, 1.0)
    else:
        low = (b, middle)
    return CutoffRadii(low[0], low[1], math.sqrt(2.0) * params.B / gap, 2.0 * params.B / gap)


def lowfreq_radius(params: ModelParams) -> float:
    """Raio c₁ da bola de baixas frequências.
    """
    return cutoff_radii(params).low_outer


def _smooth_step(s):
    """Transição C∞ ``f(s)/(f(s) + f(1-s))`` com ``f(s) = e^{-1/s}``.
    """
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        f = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        g = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return f / (f + g)


def cutoff_weights(xi_norm, params: ModelParams) -> CutoffWeights:
    r = np.asarray(xi_norm, dtype=float)
    radii = cutoff_radii(params)
    w1 = 1.0 - _smooth_step((r - radii.low_inner) / (radii.low_outer - radii.low_inner))
    if params.K == 1:
        return CutoffWeights(_out(w1), _out(np.zeros_like(w1)), _out(1.0 - w1))

    w_inf = _smooth_step((r - radii.high_inner) / (radii.high_outer - radii.high_inner))
    w_mid = 1.0 - w1 - w_inf
    return CutoffWeights(_out(w1), _out(w_mid), _out(w_inf))


def heat_symbol(t, xi_sq, nu: float):
    _check_time(t)
    return _out(np.exp(-nu * np.asarray(xi_sq, dtype=float) * np.asarray(t, dtype=float)))


def helmholtz_symbols(xi1, xi2):
    """Projetor ``I₂ - ξξᵀ/|ξ|²`` sobre a lattice, com forma ``(2, 2, ...)``.
    O modo zero é atribuído à parte solenoidal.
    """
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    x = xi1 * xi1 + xi2 * xi2
    nonzero = x > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(nonzero, 1.0 / np.where(nonzero, x, 1.0), 0.0)
    p11 = 1.0 - xi1 * xi1 * inv
    p22 = 1.0 - xi2 * xi2 * inv
    p12 = -xi1 * xi2 * inv
    return np.array([[p11, p12], [p12, p22]])


def helmholtz_symbol(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    return helmholtz_symbols(xi[0], xi[1])


def inverse_elliptic_symbols(xi_sq, kappa0: float):
    """Retorna ``(dl, t_op)``: o símbolo de ``(-Δ + κ₀Δ²)⁻¹`` (nulo no modo
    zero) e o de ``T = (I - κ₀Δ)⁻¹``.
    """
    x = np.asarray(xi_sq, dtype=float)
    denom = x + kappa0 * x * x
    with np.errstate(divide="ignore"):
        dl = np.where(x > 0, 1.0 / np.where(x > 0, denom, 1.0), 0.0)
    t_op = 1.0 / (1.0 + kappa0 * x)
    return _out(dl), _out(t_op)


def riesz_symbols(xi1, xi2) -> np.ndarray:
    """Símbolos ``-iξ_j/|ξ|`` das transformadas de Riesz, nulos em ξ = 0.
    """
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    norm = np.hypot(xi1, xi2)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(norm > 0, 1.0 / np.where(norm > 0, norm, 1.0), 0.0)
    return np.array([-1j * xi1 * inv, -1j * xi2 * inv])
