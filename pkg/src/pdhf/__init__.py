"""Primal-dual half-forward splitting toolkit.

Solves monotone inclusions built from up to four structured terms: a
set-valued primal term, a set-valued term composed with a linear
coupling, a Lipschitz-only forward term, and a cocoercive forward term.
One iteration activates each resolvent once, the cocoercive term once,
the Lipschitz term twice, and the coupling once in each direction.
Without the Lipschitz term the recursion is Condat-Vu; without the
coupling it is forward-backward-half-forward; without both forward
terms it is the Chambolle-Pock primal-dual method.

Subpackages map onto the toolkit's capabilities:

* :mod:`pdhf.linops` / :mod:`pdhf.imaging` -- matrix-free operators,
  image grids, the discrete gradient pair, orthonormal Haar
  transforms, periodic Gaussian blur, PGM input/output;
* :mod:`pdhf.prox` -- resolvents, forward operators, Moreau plumbing;
* :mod:`pdhf.solver` -- the recursions, step-size theory, diagnostics;
* :mod:`pdhf.blocks` -- coupled systems on product spaces;
* :mod:`pdhf.saddle` -- convex-concave saddle problems;
* :mod:`pdhf.deblur` -- the image deblurring benchmark;
* :mod:`pdhf.cli` -- the ``pdhf`` command-line entry point.
"""

from ._version import __version__
from .linops import (LinearMap, adjoint_gap, identity_map, linearity_gap,
                     matrix_map, power_iteration_norm)
from .imaging import (ImageGrid, blur_map, discrete_divergence,
                      discrete_gradient, gaussian_blur, gaussian_kernel,
                      gradient_map, gradient_norm_bound, haar_dwt, haar_idwt,
                      haar_map, read_pgm, write_pgm)
from .prox import (ForwardOp, ResolventOp, affine_cocoercive, box_resolvent,
                   huber_gradient, huber_value, l1_resolvent, linear_lipschitz,
                   linear_resolvent, prox_box, prox_l1,
                   quadratic_data_gradient, quadratic_data_term,
                   resolvent_of_inverse)
from .solver import (IterState, OracleSolution, ProblemSpec, RunReport,
                     StepSizes, StepVerdict, check_step_conditions,
                     condat_vu_epsilon, condat_vu_step, fbhf_epsilon,
                     fbhf_step, fbhf_step_bound, fixed_point_residual,
                     lyapunov_gamma, pdfbf_step, pdhf_step, run,
                     validate_steps)
from .blocks import (BlockProblem, BlockVector, assemble, blockdiag_forward,
                     coupling_sq_bound, default_block_steps,
                     load_block_problem, run_multivariate)
from .saddle import (SaddleProblem, build_saddle_spec, coupling_forward,
                     run_saddle, two_track_iterates)
from .deblur import (DeblurConfig, build_deblur_problem, default_step_recipe,
                     load_manifest, make_observation, make_phantom,
                     run_experiment)

__all__ = [
    "__version__",
    # linops
    "LinearMap", "adjoint_gap", "identity_map", "linearity_gap", "matrix_map",
    "power_iteration_norm",
    # imaging
    "ImageGrid", "blur_map", "discrete_divergence", "discrete_gradient",
    "gaussian_blur", "gaussian_kernel", "gradient_map", "gradient_norm_bound",
    "haar_dwt", "haar_idwt", "haar_map", "read_pgm", "write_pgm",
    # prox
    "ForwardOp", "ResolventOp", "affine_cocoercive", "box_resolvent",
    "huber_gradient", "huber_value", "l1_resolvent", "linear_lipschitz",
    "linear_resolvent", "prox_box", "prox_l1", "quadratic_data_gradient",
    "quadratic_data_term", "resolvent_of_inverse",
    # solver
    "IterState", "OracleSolution", "ProblemSpec", "RunReport", "StepSizes",
    "StepVerdict", "check_step_conditions", "condat_vu_epsilon",
    "condat_vu_step", "fbhf_epsilon", "fbhf_step", "fbhf_step_bound",
    "fixed_point_residual", "lyapunov_gamma", "pdfbf_step", "pdhf_step",
    "run", "validate_steps",
    # blocks
    "BlockProblem", "BlockVector", "assemble", "blockdiag_forward",
    "coupling_sq_bound", "default_block_steps", "load_block_problem",
    "run_multivariate",
    # saddle
    "SaddleProblem", "build_saddle_spec", "coupling_forward", "run_saddle",
    "two_track_iterates",
    # deblur
    "DeblurConfig", "build_deblur_problem", "default_step_recipe",
    "load_manifest", "make_observation", "make_phantom", "run_experiment",
]
