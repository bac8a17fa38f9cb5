"""Error of the Trotter splitting against the exact state as dtau shrinks.

Halving dtau divides the error by about 4 for the second-order plan and
by about 16 for the fourth-order plan.
"""

import numpy as np

from thermofield.verify import trotter_slope


def main():
    dtaus = (0.2, 0.1, 0.05, 0.025)
    for order in (2, 4):
        slope, errs = trotter_slope(order, dtaus)
        print(f"order {order}: slope {slope:.3f}")
        for dt, e in zip(dtaus, errs):
            print(f"  dtau={dt:<6g} error={e:.3e}")
        print(f"  successive ratios {np.round(errs[:-1] / errs[1:], 2)}")


if __name__ == "__main__":
    main()
