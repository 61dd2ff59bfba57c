"""Fair principal components with the containment property.

Each component minimises the worst group's rank-1 loss on Grams deflated by
the previous components, so a rank-``r`` basis is a prefix of every longer
one.
"""

from .core import (DualWeights, FairBasis, FairComponentResult, GramSet, GroupedDataset,
                   Solver, build_gram_set, deflate)
from .errors import (DimensionMismatchError, EigenConvergenceError, FairPCError,
                     IngestError, InputError, NotUnitVectorError, SolverError)
from .metrics import (LossReport, build_loss_report, incremental_loss, marginal_loss,
                      reconstruction_loss, standard_pca_basis)
from .oracle import grid_oracle_2d, random_oracle
from .orthonormalization import fit, truncate
from .solvers import (DEFAULT_CONFIG, SolverConfig, brent_two_group, dual_gradient,
                      dual_objective, frank_wolfe, primal_value, q_function, solve_fair_pc)

__version__ = "0.1.0"
