"""Delta shell on the unit sphere against the partial-wave reference.

Solves plane-wave scattering by a constant-strength shell (alpha = 2) at
k = 2 on a sequence of icosphere meshes and compares the far field with the
exact mode-matching solution.  The relative L2 error should drop roughly
like the squared panel size.
"""

import time

import numpy as np

from deltashell import (
    DeltaSpec,
    DeltaSystem,
    RadialMedium,
    farfield_source,
    make_sphere_grid,
    make_sphere_mesh,
    mie_farfield_values,
    plane_wave,
    solve_partial_waves,
)

K, ALPHA = 2.0, 2.0
INCIDENCE = np.array([0.0, 0.0, 1.0])

obs = make_sphere_grid(1.0, 12, 24)

oracle = solve_partial_waves(RadialMedium(a=1.0, alpha=ALPHA), K, L=50)
reference = mie_farfield_values(oracle, INCIDENCE, obs.normals)
print(f"oracle: {oracle.L + 1} modes, largest |t_l| = {np.abs(oracle.t).max():.4f}")

print(f"{'panels':>8} {'rel L2 error':>14} {'seconds':>9}")
for level in (1, 2, 3):
    t0 = time.time()
    mesh = make_sphere_mesh(1.0, level)
    system = DeltaSystem(None, DeltaSpec(mesh=mesh, alpha=np.full(mesh.n_panels, ALPHA)), K)
    sol = system.solve(plane_wave(INCIDENCE))
    ff = farfield_source(sol, obs.normals)
    err = np.sqrt(obs.weights @ np.abs(ff - reference) ** 2)
    err /= np.sqrt(obs.weights @ np.abs(reference) ** 2)
    print(f"{mesh.n_panels:>8} {err:>14.5f} {time.time() - t0:>9.1f}")

print("\nbackscatter amplitude (BEM vs oracle):")
back = np.array([[0.0, 0.0, -1.0]])
print("  BEM   :", farfield_source(sol, back)[0])
print("  oracle:", mie_farfield_values(oracle, INCIDENCE, back)[0])
