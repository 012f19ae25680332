import math

from dataclasses import dataclass
from typing import Optional, Tuple

from toroidal_pdo.pdo_logger import PDOLogger

LOGGER = PDOLogger(__name__).get_logger()


@dataclass(frozen=True)
class ThresholdParams:
    """Exponents governing H^p boundedness of an operator in S^m_{ρ,δ}

    :param lam: λ = max{0, (δ-ρ)/2}
    :param q: 1/q = 1/2 + β/n
    :param p0: Critical Hardy exponent
    :param theta: θ = (n/2+ω-β)/(n/2+ω/α), the molecule interpolation parameter
    :param m_max: Largest admissible order -β-nλ
    :param boundary: True when β sits at the endpoint n/2
    """

    n: int
    rho: float
    delta: float
    beta: float
    omega: float
    alpha: float
    lam: float
    q: float
    p0: float
    theta: float
    m_max: float
    boundary: bool

    @property
    def beta_min(self) -> float:
        return (1.0 - self.rho) * self.n / 2.0

    def admits_order(self, m: float) -> bool:
        return m <= self.m_max + 1e-12

    def mu_upper_small(self) -> float:
        """2β/(1-θ), infinite when θ = 1"""
        if self.theta >= 1.0:
            return math.inf
        return 2.0 * self.beta / (1.0 - self.theta)

    def mu_upper_large(self) -> float:
        return self.n + 2.0 * self.omega / self.alpha

    def mu_window(self, p: float, small_scale: bool) -> Tuple[float, float]:
        """Open window (lower, upper) for μ; σ < 1 adds μ < 2β/(1-θ)"""
        lower = 2.0 * self.n / p - self.n
        upper = self.mu_upper_large()
        if small_scale:
            upper = min(upper, self.mu_upper_small())
        return lower, upper

    def window_consistent(self) -> bool:
        """Whether 2β/(1-θ) ≤ n + 2ω/α holds for these parameters"""
        return self.mu_upper_small() <= self.mu_upper_large() + 1e-12


def critical_exponents(n: int, rho: float, delta: float, beta: float, omega: float = 1.0,
                       alpha: Optional[float] = None, allow_beta_endpoint: bool = False) -> ThresholdParams:
    """λ, q, p₀ and the molecule parameters for a toroidal class S^m_{ρ,δ}

    p₀ follows 1/p₀ = 1/2 + β(ω/α + n/2) / (n(ω/α - ω + β)). When α = 1 this is n/(n+ω) exactly, and is
    evaluated in that closed form.

    :param n: Dimension
    :param rho: ρ ∈ (0,1]
    :param delta: δ ∈ [0,1)
    :param beta: β with (1-ρ)n/2 ≤ β < n/2
    :param omega: Kernel regularity ω ∈ (0,1], 1 for pseudo-differential kernels
    :param alpha: Kernel scaling α ∈ (0,1], defaults to ρ
    :param allow_beta_endpoint: Admit β = n/2, which only the H^p → H^p statement allows
    :return: ThresholdParams
    """

    alpha = rho if alpha is None else alpha
    if not 0 < rho <= 1:
        raise ValueError(f'rho must lie in (0,1] (got rho = {rho})')
    if not 0 <= delta < 1:
        raise ValueError(f'delta must lie in [0,1) (got delta = {delta})')
    if not 0 < alpha <= 1:
        raise ValueError(f'alpha must lie in (0,1] (got alpha = {alpha})')
    if not 0 < omega <= 1:
        raise ValueError(f'omega must lie in (0,1] (got omega = {omega})')

    beta_min = (1.0 - rho) * n / 2.0
    beta_max = n / 2.0
    if beta < beta_min - 1e-12:
        raise ValueError(f'beta = {beta} violates (1-rho)n/2 <= beta with (1-rho)n/2 = {beta_min}')
    if beta > beta_max + 1e-12 or (beta >= beta_max - 1e-12 and not allow_beta_endpoint):
        relation = '<=' if allow_beta_endpoint else '<'
        raise ValueError(f'beta = {beta} violates beta {relation} n/2 = {beta_max}')

    boundary = abs(beta - beta_max) <= 1e-12
    if boundary:
        LOGGER.warning(f'beta = {beta} sits at the endpoint n/2, only the H^p -> H^p statement covers it')

    lam = max(0.0, (delta - rho) / 2.0)
    q = 1.0 / (0.5 + beta / n)
    if alpha == 1.0:
        p0 = n / (n + omega)
    else:
        ratio = omega / alpha
        p0 = 1.0 / (0.5 + beta * (ratio + n / 2.0) / (n * (ratio - omega + beta)))
    theta = (n / 2.0 + omega - beta) / (n / 2.0 + omega / alpha)

    return ThresholdParams(n=n, rho=rho, delta=delta, beta=beta, omega=omega, alpha=alpha, lam=lam, q=q, p0=p0,
                           theta=theta, m_max=-beta - n * lam, boundary=boundary)
