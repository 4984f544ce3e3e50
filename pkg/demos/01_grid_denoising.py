"""Denoising a piecewise-constant signal and an image with a single tree.

The pipeline: grow a tree greedily (each split maximizes the absolute
detail coefficient), estimate the noise scale by the MAD of the deepest
pilot coefficients, then soft-threshold every coefficient at
a * sigma_hat * sqrt(2 log n) before reconstructing.

Run:  python demos/01_grid_denoising.py
"""

import numpy as np

from uhwt import GridFitParams, denoise, grid_dataset, tree_fit_values
from uhwt.grid import pilot_sigma
from uhwt.signals import blocks_1d, image_dataset, piecewise_image

rng = np.random.default_rng(0)

# --- 1-D blocks ------------------------------------------------------------
n = 256
clean = blocks_1d(n)
noisy = clean + 0.5 * rng.standard_normal(n)
ds = grid_dataset(np.arange(n, dtype=float)[:, None], noisy)

print("== 1-D blocks (n=256, noise sd 0.5) ==")
print(f"noisy MSE vs clean: {np.mean((noisy - clean) ** 2):.4f}")
sigma_hat = pilot_sigma(ds, noisy, GridFitParams(max_depth=30))
print(f"MAD noise estimate: {sigma_hat:.3f} (true 0.5)")
for a in (0.0, 0.4, 0.8, 1.6):
    tree = denoise(ds, noisy, GridFitParams(max_depth=30, soft_a=a))
    fitted = tree_fit_values(tree, shrunk=True)
    print(f"  a={a:<4} denoised MSE: {np.mean((fitted - clean) ** 2):.4f} "
          f"(nodes: {tree.node_count()})")

# --- 2-D image -------------------------------------------------------------
size = 64
img = piecewise_image(size, n_blocks=6, seed=1)
noise_sd = img.std()
noisy_img = img + noise_sd * rng.standard_normal(img.shape)
ids = image_dataset(noisy_img)

print(f"\n== {size}x{size} piecewise image, matched noise ==")
print(f"noisy MSE vs clean: {np.mean((noisy_img - img) ** 2):.4f}")
for a, b in ((0.0, 0.3), (0.6, 0.3), (1.0, 0.3)):
    tree = denoise(ids, ids.responses, GridFitParams(max_depth=20, soft_a=a, early_stop_b=b))
    fitted = tree_fit_values(tree, shrunk=True).reshape(size, size)
    print(f"  a={a} b={b}: denoised MSE {np.mean((fitted - img) ** 2):.4f} "
          f"(nodes: {tree.node_count()})")
print("\nA moderate threshold removes most of the noise while the greedy")
print("splits keep the block edges sharp; a=0 reproduces the noisy input.")
