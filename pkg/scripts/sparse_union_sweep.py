"""Random sampling of k-sparse vectors in C^N: injectivity and stability versus #samples.

For each sample count m, draws Gaussian sampling vectors and analyses the
union of all coordinate k-subspaces. Injectivity on the union needs
m >= 2k; the table shows how often it holds and the worst lower bound.

    python scripts/sparse_union_sweep.py --N 6 --k 2 --trials 20
"""

import argparse
import itertools

import numpy as np

from fsis.sampling import UnionModel, fd_union_report


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--N", type=int, default=6)
    parser.add_argument("--k", type=int, default=2)
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    E = np.eye(args.N)
    model = UnionModel({"".join(map(str, idx)): E[:, list(idx)]
                        for idx in itertools.combinations(range(args.N), args.k)})
    rng = np.random.default_rng(args.seed)
    print(f"N={args.N} k={args.k} subspaces={len(model.subspaces)} pairs={len(model.pairs())}")
    print(f"{'m':>3} {'injective':>10} {'stable':>8} {'median alpha':>14} {'lower bound':>12}")
    for m in range(1, args.N + 1):
        inj = stab = 0
        alphas = []
        bound = None
        for _ in range(args.trials):
            Psi = rng.standard_normal((args.N, m)) / np.sqrt(m)
            rep = fd_union_report(model, Psi)
            inj += rep.injective is True
            stab += rep.stable
            bound = rep.sample_lower_bound
            if rep.stable:
                alphas.append(rep.alpha)
        med = f"{np.median(alphas):.3e}" if alphas else "-"
        print(f"{m:>3} {inj:>5}/{args.trials:<4} {stab:>4}/{args.trials:<3} {med:>14} {bound:>12}")


if __name__ == "__main__":
    main()
