from toroidal_pdo.symbol_calculus.symbol import Symbol, bessel_symbol, catalog, difference_op, exotic, \
    multiplier, parse_symbol_spec, separable, trig, x_derivative
from toroidal_pdo.symbol_calculus.class_membership import SymbolClassReport, class_membership
