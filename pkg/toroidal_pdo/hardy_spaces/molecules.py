import numpy as np

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from toroidal_pdo.pdo_logger import PDOLogger
from toroidal_pdo.torus_fft import PeriodicFunction, ball_volume
from toroidal_pdo.hardy_spaces.annuli import AnnulusDecomposition
from toroidal_pdo.hardy_spaces.atoms import Atom, AtomReport, atom_validate, moment_order
from toroidal_pdo.hardy_spaces.exponents import ThresholdParams

LOGGER = PDOLogger(__name__).get_logger()


@dataclass
class Molecule:
    """Measured (p, θ, μ)-molecule constants of a function around B(z, σ)

    For σ ≥ 1 the constants compare ∫|M|² and ∫|M|²|x-z|^μ with σ^(n(1-2/p)) and σ^(μ+n(1-2/p)); for σ < 1
    with σ^(n(1/q-2/p)) and σ^(θμ+n(1/q-2/p)).
    """

    z: np.ndarray
    sigma: float
    p: float
    mu: float
    params: ThresholdParams
    c1: float
    c2: float
    residual: float
    l1_norm: float
    l1_inner: float
    l1_outer: float
    cap: float
    residual_tolerance: float

    @property
    def small_scale(self) -> bool:
        return self.sigma < 1.0

    @property
    def passed(self) -> bool:
        return self.c1 <= self.cap and self.c2 <= self.cap and self.residual <= self.residual_tolerance

    def todict(self) -> dict:
        return {'sigma': self.sigma, 'p': self.p, 'mu': self.mu, 'theta': self.params.theta, 'q': self.params.q,
                'c1': self.c1, 'c2': self.c2, 'residual': self.residual, 'l1_norm': self.l1_norm,
                'l1_inner': self.l1_inner, 'l1_outer': self.l1_outer,
                'window_consistent': self.params.window_consistent(), 'passed': self.passed}


def molecule_validate(M: PeriodicFunction, z: np.ndarray, sigma: float, p: float, params: ThresholdParams,
                      mu: Optional[float] = None, cap: float = 1e3, residual_tolerance: float = 1e-8) -> Molecule:
    """Measure the molecule constants, the cancellation residual |∫M| and the L¹ norm of M

    :param M: Candidate molecule
    :param z: Centre of the associated ball
    :param sigma: Radius of the associated ball
    :param p: Hardy exponent
    :param params: θ, q, ω, α and β come from here
    :param mu: Weight exponent, defaults to the midpoint of its admissible window
    :param cap: Largest admissible constant
    :param residual_tolerance: Largest admissible |∫M|
    :return: A Molecule holding the measurements
    """

    grid = M.grid
    n = grid.n
    lower, upper = params.mu_window(p, small_scale=sigma < 1.0)
    if mu is None:
        mu = 0.5 * (lower + upper)
    if not mu > lower:
        raise ValueError(f'mu = {mu} violates 2n/p - n < mu with 2n/p - n = {lower}')
    if not mu < upper:
        bound = '2*beta/(1-theta)' if sigma < 1.0 and upper < params.mu_upper_large() else 'n + 2*omega/alpha'
        raise ValueError(f'mu = {mu} violates mu < {bound} = {upper}')
    if not params.window_consistent():
        LOGGER.warning(f'2*beta/(1-theta) = {params.mu_upper_small():.4g} exceeds n + 2*omega/alpha = '
                       f'{params.mu_upper_large():.4g}')

    distances = grid.distance_to(z)
    energy = np.abs(M.values) ** 2
    first = float(np.real(grid.integrate(energy)))
    second = float(np.real(grid.integrate(energy * distances ** mu)))
    if sigma >= 1.0:
        first_power = n * (1.0 - 2.0 / p)
        second_power = mu + n * (1.0 - 2.0 / p)
    else:
        first_power = n * (1.0 / params.q - 2.0 / p)
        second_power = params.theta * mu + n * (1.0 / params.q - 2.0 / p)

    magnitude = np.abs(M.values)
    inner = distances < sigma
    return Molecule(z=np.asarray(z, dtype=float), sigma=sigma, p=p, mu=mu, params=params,
                    c1=first / sigma ** first_power, c2=second / sigma ** second_power,
                    residual=float(abs(M.integral())), l1_norm=float(np.real(grid.integrate(magnitude))),
                    l1_inner=float(np.real(grid.integrate(magnitude * inner))),
                    l1_outer=float(np.real(grid.integrate(magnitude * ~inner))),
                    cap=cap, residual_tolerance=residual_tolerance)


@dataclass
class AtomicDecomposition:
    """M = Σ_j λ_j a_j built from the shells around B(z, σ)

    Shell k of the decomposition is the k-th non-empty shell of the AnnulusDecomposition (the core ball first).
    Block k is ψ_0 for k = 0 and ψ_k + φ_(k-1) afterwards; it lives on B(z, radii[k]).
    """

    z: np.ndarray
    sigma: float
    p: float
    shells: List[int]
    radii: List[float]
    means: np.ndarray
    nu: np.ndarray
    psi: List[PeriodicFunction]
    phi: List[PeriodicFunction]
    coefficients: np.ndarray
    atoms: List[Atom] = field(default_factory=list)

    @property
    def hp_bound(self) -> float:
        """(Σ|λ_j|^p)^(1/p)"""
        return float(np.sum(np.abs(self.coefficients) ** self.p) ** (1.0 / self.p))

    def reconstruct(self) -> PeriodicFunction:
        grid = self.psi[0].grid
        total = np.zeros(grid.shape, dtype=complex)
        for coefficient, atom in zip(self.coefficients, self.atoms):
            total += coefficient * atom.function.values
        return PeriodicFunction(grid, total)

    def reconstruction_error(self, M: PeriodicFunction) -> float:
        return float(np.max(np.abs(self.reconstruct().values - M.values)))

    def validate_atoms(self, tolerance: float = 1e-9) -> List[AtomReport]:
        return [atom_validate(atom, tolerance) for atom in self.atoms]

    def todict(self, tolerance: float = 1e-9) -> Dict:
        reports = self.validate_atoms(tolerance)
        return {'z': [float(v) for v in np.atleast_1d(self.z)],
                'sigma': self.sigma,
                'p': self.p,
                'hp_bound': self.hp_bound,
                'blocks': [{'shell': shell, 'radius': radius, 'lambda': float(abs(coefficient)),
                            'mean': complex(mean).real, 'nu': complex(nu).real, 'atom': report.todict()}
                           for shell, radius, coefficient, mean, nu, report in
                           zip(self.shells, self.radii, self.coefficients, self.means, self.nu, reports)]}


def molecule_decompose(M: PeriodicFunction, z: np.ndarray, sigma: float, p: float,
                       tolerance: float = 1e-8) -> AtomicDecomposition:
    """Split a mean-zero M into (λ_j, a_j) pairs with a_j a (p,2)-atom on B(z, 2^(j+1)σ)

    With shells S_k, annulus means M_k and tails ν_k = ∫ over the complement of S_0 ∪ ... ∪ S_k of M,
    ψ_k = (M - M_k)χ_(S_k) and φ_k = ν_k(|S_(k+1)|^(-1)χ_(S_(k+1)) - |S_k|^(-1)χ_(S_k)), so that
    M = ψ_0 + Σ_(k≥1)(ψ_k + φ_(k-1)). Measures are grid measures, so the identity holds to roundoff.

    A non-zero ∫M is left behind as the constant ∫M/|S_0| on the core, so the admissible |∫M| scales with the
    core measure.

    :param M: Function with |∫M| ≤ tolerance·|S_0|
    :param z: Centre
    :param sigma: Scale of the core ball B(z, 2σ)
    :param p: Hardy exponent
    :param tolerance: Largest admissible reconstruction defect |∫M|/|S_0|
    :return: The decomposition with every intermediate retained
    """

    grid = M.grid
    if moment_order(grid.n, p) > 0:
        LOGGER.warning(f'p = {p} requires moments up to order {moment_order(grid.n, p)}; decomposition blocks '
                       f'only cancel the mean')

    annuli = AnnulusDecomposition(grid, z, sigma)
    shells = annuli.shells(min_cells=1)
    masks = [annuli.mask(j) for j in shells]
    measures = np.array([annuli.measure(j) for j in shells])
    total = M.integral()
    if abs(total) > tolerance * measures[0]:
        raise ValueError(f'Cannot decompose: |integral of M| = {abs(total):.3e} leaves a defect of '
                         f'{abs(total) / measures[0]:.3e} on the core (measure {measures[0]:.3e}), above {tolerance:g}')
    integrals = np.array([grid.integrate(M.values * mask) for mask in masks])
    means = integrals / measures
    # ν_k = ∫ over the shells beyond k; the last tail is empty
    nu = np.concatenate([np.cumsum(integrals[::-1])[::-1][1:], [0.0]])

    psi = [PeriodicFunction(grid, (M.values - mean) * mask) for mean, mask in zip(means, masks)]
    phi = [PeriodicFunction(grid, nu[k] * (masks[k + 1] / measures[k + 1] - masks[k] / measures[k]))
           for k in range(len(shells) - 1)]

    blocks = [psi[0]] + [psi[k] + phi[k - 1] for k in range(1, len(shells))]
    radii = [annuli.outer_radius(j) for j in shells]
    coefficients = []
    atoms = []
    for block, radius in zip(blocks, radii):
        normalisation = ball_volume(radius, grid.n) ** (0.5 - 1.0 / p)
        coefficient = grid.lp_norm(block.values, 2) / normalisation
        scaled = block.values / coefficient if coefficient > 0 else np.zeros(grid.shape)
        coefficients.append(coefficient)
        atoms.append(Atom(PeriodicFunction(grid, scaled), np.asarray(z, dtype=float).reshape(grid.n), radius, p, 2))

    decomposition = AtomicDecomposition(z=np.asarray(z, dtype=float), sigma=sigma, p=p, shells=shells, radii=radii,
                                        means=means, nu=nu, psi=psi, phi=phi, coefficients=np.array(coefficients),
                                        atoms=atoms)
    LOGGER.info("{0:65}: {val:.4g}".format(f'H^p bound of decomposition at sigma = {sigma:g}',
                                           val=decomposition.hp_bound))
    return decomposition
