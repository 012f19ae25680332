from toroidal_pdo.hardy_spaces.annuli import AnnulusDecomposition, n_sigma
from toroidal_pdo.hardy_spaces.atoms import Atom, AtomReport, atom_validate, make_atom
from toroidal_pdo.hardy_spaces.exponents import ThresholdParams, critical_exponents
from toroidal_pdo.hardy_spaces.maximal import BallFamily, SharpMaximal, bmo_norm, maximal_p, sharp_maximal
from toroidal_pdo.hardy_spaces.molecules import AtomicDecomposition, Molecule, molecule_decompose, molecule_validate
