"""Grid on strongly separated PH data, as a sanity check that signal is found.

    python3 scripts/signal_check.py --beta 3 -3 --n 1000
"""

import argparse
from dataclasses import dataclass, field

from cindex_audit.harness import ExperimentConfig, audit_report, run_experiment
from cindex_audit.survdata import simulate_weibull_ph


@dataclass(frozen=True)
class SignalStudy:
    n: int = 1000
    beta: tuple = field(default=(3.0, -3.0))
    seed: int = 0


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=SignalStudy.n)
    ap.add_argument("--beta", type=float, nargs="+", default=list(SignalStudy().beta))
    ap.add_argument("--seed", type=int, default=SignalStudy.seed)
    args = ap.parse_args()
    study = SignalStudy(args.n, tuple(args.beta), args.seed)

    data = simulate_weibull_ph(study.n, study.beta, seed=study.seed)
    print(audit_report(run_experiment(ExperimentConfig(seed=study.seed), data)).markdown)


if __name__ == "__main__":
    main()
