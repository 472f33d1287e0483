"""Independent numerical checks behind the solver.

* the Nystrom far field of a disk against the separation-of-variables series
* the logarithmic quadrature weights on known integrals
* the boundary derivative of the far field against central differences
"""

from refball.checks import run_suite

for result in run_suite("all"):
    print(result.line())
