"""When clients disagree: the heterogeneity floor.

Federation averages the clients' local views of the world. That is exactly
right when every client has the same ground truth — and systematically wrong
when they don't: with client parameter matrices spread over a ball of radius
epsilon, no amount of data or communication can push the worst-client error
below a floor proportional to epsilon.

This demo sweeps epsilon over two decades on the synthetic system while
everything else stays fixed (25 clients, 25 trajectories each, 5 local steps
per round, common random numbers across sweep points). Watch the final error
track the floor once epsilon dominates the noise term, and compare with the
theoretical bound evaluated per run, whose additive term grows linearly in
epsilon.

Runtime: ~25 s. Writes demos/output/synthetic_heterogeneity_floor.csv.
"""

import math
from pathlib import Path

from fedsysid.config import ExperimentConfig
from fedsysid.harness import run_experiment

OUT = Path(__file__).resolve().parent / "output"


def main() -> None:
    OUT.mkdir(exist_ok=True)
    csv_path = OUT / "synthetic_heterogeneity_floor.csv"
    cfg = ExperimentConfig(
        system="synthetic",
        alpha=1e-4,
        M=25,
        N_i=25,
        epsilon=(0.01, 0.1, 1.0, 5.0),
        K_i=5,
        rounds=600,
        seeds=tuple(range(5)),
        output_path=str(csv_path),
    )
    print(f"running {cfg.config_id()}: synthetic, epsilon in {cfg.epsilon}, 5 seeds ...")
    records = run_experiment(cfg, threads=4)

    last_round = max(r.round for r in records)
    finals: dict[float, list[float]] = {}
    bounds: dict[float, list[float]] = {}
    for r in records:
        if r.round == last_round:
            finals.setdefault(r.epsilon, []).append(r.max_error)
            if not math.isnan(r.bound_value):
                bounds.setdefault(r.epsilon, []).append(r.bound_value)

    print()
    print("final seed-averaged error and theoretical ceiling by heterogeneity:")
    for eps in sorted(finals):
        err = sum(finals[eps]) / len(finals[eps])
        bound = sum(bounds[eps]) / len(bounds[eps])
        print(f"  epsilon={eps:<5g}  error={err:.4f}   bound={bound:8.2f}")
    print()
    print("the error is flat while noise dominates, then rises with epsilon —")
    print("the additive heterogeneity term in the bound, seen empirically.")
    print()
    print(f"rows written to {csv_path}")
    print("render it:  fedsysid-figures render --csv "
          f"{csv_path} --kind error_vs_round --group epsilon --out floor.svg")


if __name__ == "__main__":
    main()
