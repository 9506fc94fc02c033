"""Desk-scale two-frequency discrimination experiment.

Contrapositive of the uniqueness statement: media that differ (in the
surface jump strength, or in the sound speed) must produce far fields that
differ by much more than the numerical noise floor, at both frequencies.
The floor is self-calibrated as the same-medium far-field change under mesh
refinement, so no absolute tolerance enters.
"""

import numpy as np

from deltashell import (
    GaussianBump,
    MediumSpec,
    RadialCutoff,
    direction_grid,
    make_sphere_mesh,
    make_volume_grid,
    uniqueness_experiment,
)


def builder(xi, v_amp=0.0):
    def make(level):
        mesh = make_sphere_mesh(1.0, level)
        v_bumps = (GaussianBump(amplitude=v_amp, center=(0.0, 0.0, 0.0), width=0.6),) if v_amp else ()
        return MediumSpec(gamma=mesh, shell_density=np.full(mesh.n_panels, xi),
                          v_bumps=v_bumps, cutoff=RadialCutoff(1.4, 2.0))
    return make


grid = make_volume_grid((-2.2, 2.2), 10)
obs = direction_grid(4, 8)
inc = direction_grid(3, 4).normals

cases = {
    "different shell strength (xi = 1 vs 1.5)": (builder(1.0), builder(1.5)),
    "different sound speed (v bump 0 vs 0.4)": (builder(1.0), builder(1.0, v_amp=0.4)),
    "identical media": (builder(1.0), builder(1.0)),
}

for label, (make_a, make_b) in cases.items():
    rep = uniqueness_experiment(make_a, make_b, 1.0, 2.0, grid, obs, inc,
                                levels=(1, 2), separation=3.0)
    m = rep.metrics
    print(f"{label}:")
    print(f"  noise floor N(w=1) = {m['noise_floor_w1']:.4f}, N(w=2) = {m['noise_floor_w2']:.4f}")
    print(f"  far-field distance D(w=1) = {m['distance_w1']:.4f}, "
          f"D(w=2) = {m['distance_w2']:.4f}")
    print(f"  -> {'PASS' if rep.passed else 'FAIL'} "
          f"({'identical: D within floor' if m['identical_media'] else 'distinct: D >> N'})")
print("\n(The acceptance suite runs the distinct cases at finer levels (2, 3),")
print(" where the separation exceeds 10x the floor at both frequencies.)")
