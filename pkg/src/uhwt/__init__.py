"""Unbalanced Haar wavelet tree regression on grids, tensors and spheres.

Greedy and Bayesian tree fitting backed by an orthonormal piecewise-
constant system on data-driven recursive partitions, with boosted and
rotation-averaged ensembles, quantile forests, and a verification harness
for the orthogonality/reconstruction/risk-bound identities.
"""

from .core import (
    Cell,
    Dataset,
    Split,
    UHAtom,
    UHTree,
    batch_reconstruct,
    cell_mass,
    gram_matrix,
    grid_dataset,
    reconstruct,
    sphere_dataset,
    tree_fit_values,
    tree_from_dict,
    tree_to_dict,
    uh_atom,
    uh_coefficient,
)
from .grid import (
    GridFitParams,
    candidate_splits,
    collect_deep_coefficients,
    denoise,
    estimate_sigma_mad,
    fit_uhwt,
    greedy_split,
    pilot_sigma,
    soft_threshold,
)
from .sphere_geom import (
    Triangulation,
    arc_length,
    assign_faces,
    fan_split,
    geodesic_midpoint,
    icosahedron,
    project_to_edge,
    spherical_area,
    split_triangle,
    triangle_contains,
)
from .sphere import SphereModel, fit_sphere, haar_rotation, predict_sphere
from .ensembles import (
    BoostEnsemble,
    ForestEnsemble,
    boost_fit,
    boost_predict_trace,
    ensemble_predict,
    load_boost,
    quantile_predict,
    quantile_weights,
    rre_fit,
    save_boost,
)
from .bayes import (
    CoefficientModel,
    LatentMarkov,
    McmcTree,
    PosteriorDraws,
    RuhwtPrior,
    backfit,
    coefficient_density,
    marginal_M,
    mcmc_step,
    phi,
    posterior_split_sample,
    posterior_summary,
    sample_prior_tree,
)
from .verify import (
    BoundReport,
    balanced_partition,
    delta_cart,
    enumerate_posterior,
    leafwise_fit,
    oracle_bound_trial,
    run_oracle_bounds,
    soft_threshold_lemma_check,
    sparse_comparison,
)
from .signals import generate_sphere_synthetic, signal_sd
from . import errors

__version__ = "0.1.0"
