"""Fitting scattered sphere data with per-face trees, one rule at a time.

Points are assigned to the twenty faces of an icosahedron and each face
grows its own tree by geodesic triangle cuts.  The four rules trade shape
regularity (balance, balance4) against data adaptivity (adapt,
adapt_vertex); all of them reproduce the training responses exactly at
full depth, and early stopping (b > 0) turns them into denoisers.

Run:  python demos/02_sphere_single_tree.py
"""

import numpy as np

from uhwt import GridFitParams, fit_sphere, predict_sphere
from uhwt.signals import generate_sphere_synthetic, get_signal, sphere_test_grid

train = generate_sphere_synthetic("fig5", 400, 0.1, seed=0)
test_pts, test_clean = sphere_test_grid("fig5", 3000, 0)
clean_train = get_signal("fig5")(train.locations)

print("signal: 2 tanh(x1) + cos(10 x2) + 2 x3, n=400, noise 0.1 sd(f)\n")
print(f"{'rule':<14}{'train max err':>14}{'test MSE':>10}{'nodes':>7}")
for rule in ("balance", "balance4", "adapt", "adapt_vertex"):
    model = fit_sphere(train, train.responses, rule, GridFitParams(max_depth=40))
    fitted = predict_sphere(model, train.locations)
    preds = predict_sphere(model, test_pts)
    nodes = sum(t.node_count() for t in model.face_trees)
    print(f"{rule:<14}{np.abs(fitted - train.responses).max():>14.2e}"
          f"{np.mean((preds - test_clean) ** 2):>10.3f}{nodes:>7}")

print("\nWith early stopping (b=1) the trees stop where contrasts fall")
print("below the pooled MAD noise scale:")
for rule in ("adapt", "balance"):
    params = GridFitParams(max_depth=40, early_stop_b=1.0)
    model = fit_sphere(train, train.responses, rule, params)
    preds = predict_sphere(model, test_pts)
    nodes = sum(t.node_count() for t in model.face_trees)
    print(f"  {rule:<14} test MSE {np.mean((preds - test_clean) ** 2):.3f}  nodes {nodes}")
