"""
Reflected paths, local time, and jump clocks
============================================

Simulate single paths of a reflected jump-diffusion with the projected
Euler scheme: the state is pushed back to 0 whenever a step would take it
negative, and the accumulated push is the local time.
"""

import numpy as np

from rjdlab import PathStreams, drifted_rbm, exp_jump_diffusion, simulate_path

# One path of the drifted reflected Brownian motion, started at the
# boundary.  The same seed always reproduces the same path: every path
# index owns its own noise, jump-time, and jump-size substreams.
spec = drifted_rbm()
path = simulate_path(spec, x0=0.0, t_max=10.0, h=1e-3, streams=PathStreams(seed=7))
print("grid points:", path.grid.size)
print("endpoint   :", path.values[-1])
print("local time :", path.local_time[-1], "(total boundary push)")
print("time at 0  :", float(np.mean(path.values == 0.0)), "fraction of the grid")

# With upward jumps the path gets Exp(2)-sized kicks at unit Poisson rate.
# The recorded jump epochs come from the path's own jump-time substream.
jumpy = exp_jump_diffusion()
jump_path = simulate_path(jumpy, x0=0.0, t_max=10.0, h=1e-3, streams=PathStreams(seed=7))
print("\njump epochs:", np.round(jump_path.jump_times, 3))
print("endpoint   :", jump_path.values[-1])

# Shared noise makes the comparison pointwise: the jumped path dominates
# the continuous one at every grid point, since jumps only push upward.
base = simulate_path(spec, 0.0, 10.0, 1e-3, PathStreams(seed=7))
print("jumped >= continuous everywhere:", bool(np.all(jump_path.values >= base.values)))

# Averages need ensembles, not loops over simulate_path; see
# distance_decay.py and long_run_law.py for the ensemble front ends.
