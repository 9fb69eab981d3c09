"""Survival fraction versus shock depth, one curve per fire-sale impact level.

The curves only bend where the fire-sale feedback starts to matter: at
alpha = 0 survival falls smoothly with the shock, while larger alpha values
carve out a regime where the same shock wipes out most of the market.
"""

import argparse
import warnings

import numpy as np

import cascadefin as cf


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=5)
    ap.add_argument("--eta", type=float, default=0.0,
                    help="barrier tolerance; keep 0 for deterministic curves")
    ap.add_argument("--alphas", type=float, nargs="+",
                    default=[0.0, 0.05, 0.10, 0.15])
    args = ap.parse_args()

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        network, _ = cf.generate_synthetic(
            cf.SyntheticConfig(n_banks=args.n), args.seed)

    ps = np.round(np.arange(1.0, -0.001, -0.1), 12).tolist()
    records = cf.survival_curves(network, None, 0, ps, args.alphas, args.eta,
                                 seed=args.seed)

    by_alpha = {}
    for rec in records:
        by_alpha.setdefault(rec.alpha, []).append(rec)

    header = "p     " + "".join(f"alpha={a:<8.2f}" for a in args.alphas)
    print(f"survival fraction over {args.n} banks, shock on asset 0")
    print(header)
    for k, p in enumerate(ps):
        row = f"{p:4.1f}  "
        for a in args.alphas:
            row += f"{by_alpha[a][k].survival_all:<14.3f}"
        print(row)

    print()
    print("columns to the right collapse earlier: fire sales turn a shock")
    print("that the market absorbs at alpha=0 into a system-wide failure")


if __name__ == "__main__":
    main()
