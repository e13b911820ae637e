"""hypme: exact-arithmetic toolkit for hyperbolicity obstructions and
discrete measure-equivalence couplings.

Subpackages by concern:

  graphs         exact finite-graph metrics, geodesic point sets, generators
  hyperbolicity  thin-triangle and four-point constants, path-distance bounds
  cycles         bi-Lipschitz cycle embeddings and the obstruction inequality
  groups         marked groups, Cayley balls, growth and entropy
  integrability  the weight-function families (power, exp_power, poly_plus)
  coupling       subgroup couplings, cocycles, coboundedness, measure bounds
  rigidity       thresholds and the vanishing/schedule condition checkers
  cli            the command-line front door
"""

__version__ = "0.1.0"
