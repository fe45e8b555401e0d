"""Final-state solve on the small-data preset for q = 0 and q = 1; prints a summary table."""
import warnings

import numpy as np

from deltanls.asymptotics import AsymptoticProfile
from deltanls.core import BoundaryLeakWarning, ModelParams, norm_L2
from deltanls.fields import preset_grid, preset_spectrum
from deltanls.solvers import FinalStateConfig, duhamel_consistency, solve_final_state_backward, solve_final_state_picard


def main():
    warnings.simplefilter("ignore", BoundaryLeakWarning)
    g = preset_grid()
    cfg = FinalStateConfig()
    print(f"{'q':>4} {'iters':>5} {'max ratio':>10} {'slope':>7} {'X norm':>9} {'cross':>9} {'duhamel':>9} {'wall':>6}")
    for q in (0.0, 1.0):
        prof = AsymptoticProfile.from_spectrum(preset_spectrum(g, q), ModelParams(q, 1.0))
        up, rp = solve_final_state_picard(prof, cfg)
        ub, rb = solve_final_state_backward(prof, cfg)
        cross = norm_L2(up[0].with_values(up[0].values - ub[0].values))
        duh = duhamel_consistency(up, prof.params, 10.0, 20.0)
        print(f"{q:4g} {rp.iterations:5d} {np.max(rp.residual_ratios()):10.2e} {rp.decay_fit.slope:7.3f} "
              f"{rp.xnorm:9.2e} {cross:9.2e} {duh:9.2e} {rp.wall_time + rb.wall_time:5.0f}s")


if __name__ == "__main__":
    main()
