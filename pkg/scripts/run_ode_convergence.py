#!/usr/bin/env python3
"""Shrink eps on a small symmetric system and watch the selection converge.

Reproduces the desk study behind the state-space convergence check: the
selected finite-energy trajectory against the first-order flow, sup norm
on [0, horizon], one row per ladder rung.
"""

import argparse

import numpy as np

from wie import ForcingTerm, OdeProblem, convergence_study, exponential_profile


def build_problem(size: int, seed: int, forced: bool) -> OdeProblem:
    rng = np.random.default_rng(seed)
    if size == 1:
        matrix = np.array([[1.0]])
        y0 = np.array([1.0])
    else:
        q, _ = np.linalg.qr(rng.standard_normal((size, size)))
        matrix = q @ np.diag(rng.uniform(0.2, 2.5, size)) @ q.T
        matrix = 0.5 * (matrix + matrix.T)
        y0 = rng.standard_normal(size)
    forcing = ForcingTerm.zero()
    if forced:
        forcing = ForcingTerm.from_vectors(
            [
                (exponential_profile(1.0, -0.3), rng.standard_normal(size)),
                (exponential_profile(0.7, -1.2), rng.standard_normal(size)),
            ]
        )
    return OdeProblem(matrix=matrix, initial=y0, forcing=forcing)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=2, help="system dimension")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--forced", action="store_true", help="add a decaying separable drive")
    ap.add_argument("--horizon", type=float, default=1.0)
    ap.add_argument(
        "--ladder",
        type=float,
        nargs="+",
        default=[1e-1, 1e-2, 1e-3, 1e-4],
        help="decreasing regularization values",
    )
    args = ap.parse_args()

    problem = build_problem(args.size, args.seed, args.forced)
    report = convergence_study(
        problem, args.ladder, args.horizon, problem_id=f"ode-n{args.size}"
    )

    print(f"# {report.problem_id}: sup error on [0, {args.horizon}] vs the exact flow")
    print(f"{'eps':>10} {'sup_error':>14} {'energy':>14} {'violations':>10}")
    for e in report.entries:
        if e.failure:
            print(f"{e.eps:>10.3g} {'failed:':>14} {e.failure}")
            continue
        print(f"{e.eps:>10.3g} {e.sup_error:>14.6e} {e.energy:>14.6e} {e.audit_violations:>10d}")
    if report.fitted_rate is not None:
        print(f"fitted rate {report.fitted_rate:.4f} +- {report.rate_half_width:.4f}")
    print("verdicts:", report.verdicts)
    return 0 if all(report.verdicts.values()) else 1


if __name__ == "__main__":
    raise SystemExit(main())
