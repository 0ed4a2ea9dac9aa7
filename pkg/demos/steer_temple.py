# Steering a Temple-class solution onto a piecewise-affine target.
#
# The plan waits T/4 with absorbing boundaries, sets both boundaries to the
# state omega found by tracing the target backward, and from 3T/4 on replays
# the backward boundary traces as controls.
import numpy as np

from frontcontrol import make_model
from frontcontrol.fronttrack import Profile
from frontcontrol.steer import default_rho, horizon, random_target, steer_to_target

model = make_model("temple2")
rng = np.random.default_rng(7)
rho = default_rho(model)
psi = random_target(model, 0.0, 1.0, rng, rho)
phi = Profile(np.linspace(0, 1, 6), model.box.mean(axis=1) + rng.uniform(-0.3, 0.3, (5, 2)))
T = horizon(model, 0.0, 1.0)
tau = 1.25 * T
print(f"T = {T}, tau = {tau}, rho' = {rho}")

for nu in (0.1, 0.05, 0.025, 0.0125):
    plan = steer_to_target(model, phi, psi, tau, nu, rho=rho)
    m = plan.metrics()
    print(f"nu {nu:<7} L1 error {m['l1_error']:.5f}  (vs staircase {m['l1_error_discrete']:.1e})"
          f"  switches {m['n_switches']:4d}  backward collisions {m['backward_collisions']:5d}"
          f"  same-family {m['backward_same_family_collisions']}")

print("omega' after washout:", np.round(plan.omega_prime, 5))
print("omega before the backward block:", np.round(plan.omega, 5))
