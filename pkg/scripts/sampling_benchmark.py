"""Sampling distribution of the slope at n = 102 for every method, against
the expected model-based variances.

    python3 scripts/sampling_benchmark.py --replications 100000
"""
import argparse
import time

from covimpute import ALL_METHODS, ScenarioParams, expected_coefficient_variances
from covimpute.experiments import run_sampling


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=102)
    ap.add_argument("--replications", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--threads", type=int, default=4)
    args = ap.parse_args()

    params = ScenarioParams()
    ev = expected_coefficient_variances(params, args.n)
    print(f"expected: full {ev.full_cohort:.5f}  model-based det {ev.model_based_det:.5f}  complete case {ev.complete_case:.5f}")
    print(f"{'method':<7} {'mean b1':>8} {'emp var':>9} {'model var':>9}   {'full':>8} {'cc':>8}")
    for method in ALL_METHODS:
        t0 = time.perf_counter()
        res = run_sampling(params, method, args.n, args.replications, args.seed, threads=args.threads)
        imp = res["imputed"]
        print(
            f"{method.name:<7} {imp['mean_beta1']:8.4f} {imp['empirical_var_beta1']:9.5f} {imp['mean_model_var']:9.5f}"
            f"   {res['full_cohort']['empirical_var_beta1']:8.5f} {res['complete_case']['empirical_var_beta1']:8.5f}"
            f"   ({time.perf_counter() - t0:.1f} s)"
        )


if __name__ == "__main__":
    main()
