#!/usr/bin/env python3
"""Print the quantum-vs-classical all-distinct probability table.

The entangled game with phase n*(n-1)/2 multiplies the probability that
every user lands on its own channel by exactly n.
"""

import argparse

from qmg.game import GameConfig, analytic_probabilities, classical_probabilities, phase_for_regime


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-n", type=int, default=8)
    args = parser.parse_args()

    print(f"{'n':>3} {'classical':>12} {'quantum':>12} {'ratio':>7} {'support':>9}")
    for n in range(2, args.max_n + 1):
        classical = classical_probabilities(n)
        quantum = analytic_probabilities(GameConfig(n, phase_for_regime("enhance-optimum", n)))
        ratio = quantum.p_all_distinct / classical.p_all_distinct
        print(f"{n:>3} {classical.p_all_distinct:>12.6g} {quantum.p_all_distinct:>12.6g} "
              f"{ratio:>7.3f} {quantum.support_size:>9}")


if __name__ == "__main__":
    main()
