"""Behavior of the five gaze-prediction metrics on controlled cases.

Scores a sharp predictor, a blurred one, a center-bias-only baseline, and
a uniform map against the same synthetic ground truth, then shows how the
shuffled AUC deflates the center-bias baseline that the plain AUC rewards.
"""

import numpy as np

from bias import auc_judd, cc, density_from_fixations, nss, shuffled_auc, sim
from bias.fixation import center_prior, render_gaussian


def blob(shape, cx, cy, sigma):
    return render_gaussian(shape, (cx, cy), (sigma, sigma)).astype(np.float32)


def main():
    rng = np.random.default_rng(0)
    h, w = 96, 128
    true_center = (84, 30)

    # fixations cluster on the true target; the pool mimics other videos'
    # center-heavy fixations
    fixations = np.stack([
        np.clip(rng.normal(true_center[0], 4, 24), 0, w - 1),
        np.clip(rng.normal(true_center[1], 4, 24), 0, h - 1)], axis=1)
    pool = np.stack([
        np.clip(rng.normal(w / 2, w / 6, 500), 0, w - 1),
        np.clip(rng.normal(h / 2, h / 6, 500), 0, h - 1)], axis=1)
    gt_density = density_from_fixations((h, w), fixations)

    candidates = {
        "sharp on target": blob((h, w), *true_center, 5),
        "broad on target": blob((h, w), *true_center, 18),
        "center bias only": center_prior(w, h),
        "uniform": np.full((h, w), 0.5, np.float32),
    }

    print(f"{'predictor':>18} {'NSS':>7} {'CC':>7} {'SIM':>7} "
          f"{'AUC-J':>7} {'s-AUC':>7}")
    for name, pred in candidates.items():
        row = (nss(pred, fixations), cc(pred, gt_density),
               sim(pred, gt_density), auc_judd(pred, fixations),
               shuffled_auc(pred, fixations, pool, permutations=100, seed=7))
        print(f"{name:>18} " + " ".join(f"{v:>7.3f}" for v in row))

    print("\nthe center-bias baseline keeps a decent plain AUC but drops "
          "toward chance on the shuffled variant, whose negatives carry "
          "the same bias.")


if __name__ == "__main__":
    main()
