"""mvir: restoration of manifold-valued images by half-quadratic minimization.

Denoising and inpainting of images whose pixels live on a Riemannian
manifold (circle, 2-sphere, rotations, SPD matrices), with edge-preserving
penalties, an alternating reweighting solver, synthetic experiment
generators and a CLI.
"""

from .energy import (ANISOTROPIC, ISOTROPIC, GradientField, WeightField,
                     apply_approx_hessian, eval_J, eval_augmented,
                     grad_J1_direct, grad_augmented, hessian_diag,
                     weights_from_image)
from .errors import CutLocusError, SolverError, ValidationError
from .estimator import HalfQuadraticRestoration
from .grid import Mask, edge_count, neighbors, neighbors_minus, neighbors_plus
from .images import ManifoldImage, constant_image, random_image
from .manifolds import (Circle, Euclidean, Manifold, Rotations3, Spd, Sphere2,
                        manifold_by_name, spd_exp_matrix, spd_log_matrix)
from .mvi import load_mvi, save_mvi
from .penalties import (Additive, ExpNeg, Huber, Multiplicative, Penalty,
                        SqrtEps, c_transform_check, conjugate_bruteforce,
                        make_penalty)
from .solver import (ArmijoParams, RestorationResult, SolverConfig,
                     nearest_neighbor_fill, run, u_update, v_update)
from .synth import (CbImage, NoiseSpec, add_noise, add_rgb_noise, atan2_image,
                    block_mask, cb_decompose, cb_recompose, center_block_mask,
                    disc_mask, err_metric, psnr, random_mask, so3_grain_image,
                    sphere_field, spd_jump_image, spiral_signal,
                    synthetic_rgb)
from .view import export_view, render, write_ppm

__version__ = "0.1.0"
