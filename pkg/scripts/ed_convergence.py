"""Compare exact diagonalisation with the eta~ -> infinity theory.

Prints the normal-phase gap ratio at lambda = mu = 0.5 and the superradiant
order-parameter coefficient at lambda = mu = 1.5 for increasing eta~.
"""

from rabiqpt.fock import FockSpace, ed_observables, ground_state_ed
from rabiqpt.model import reduced_model
from rabiqpt.phases import excitation_energy, reduced_couplings

ETAS = (32.0, 100.0, 300.0, 1000.0)


def main():
    zeta = 1.5
    target = zeta ** 2 - 1 / zeta ** 2
    print(f"{'eta~':>7} {'gap/omega_N':>12} {'n_max':>6} {'<x^2>2/eta~':>12} "
          f"{'<n>2/eta~':>10}   target {target:.5f}")
    for eta in ETAS:
        m = reduced_model(eta, 0.5, 0.5)
        gap = ground_state_ed(m, FockSpace(60)).gap
        ratio = gap / excitation_energy(reduced_couplings(m), m)

        m = reduced_model(eta, zeta, zeta)
        n_max = min(int(0.6 * eta) + 200, 1999)
        space = FockSpace(n_max)
        obs = ed_observables(ground_state_ed(m, space).states[:, 0], space)
        x2 = (obs.var_x + obs.x_mean ** 2) * 2 / eta
        print(f"{eta:7.0f} {ratio:12.6f} {n_max:6d} {x2:12.5f} {obs.n_mean * 2 / eta:10.5f}")


if __name__ == "__main__":
    main()
