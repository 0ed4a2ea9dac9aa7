# Absorb / inject cycles driving a small-variation solution to a constant.
#
# For temple2 nothing is created by interactions, so one cycle lands exactly
# on u_star.  For gas the interaction-born waves are tiny (cubic in the wave
# strengths) and also leave within the absorb phase; the created strength is
# still measurable and scales faster than TV_0^2.
import numpy as np

from frontcontrol import make_model
from frontcontrol.cli import random_profile
from frontcontrol.stabilize import stabilize

for name in ("temple2", "gas"):
    model = make_model(name)
    u_star = model.box.mean(axis=1) + np.array([0.03, -0.02])
    tv0, created = [], []
    for k, tv in enumerate((0.2, 0.1, 0.05, 0.025)):
        phi = random_profile(model, 0.0, 1.0, 12, tv, np.random.default_rng(k))
        _, rep = stabilize(model, phi, u_star, 2, nu=0.002)
        tv0.append(rep.tv[0])
        created.append(rep.created[0])
        print(f"{name:8s} TV_0 {rep.tv[0]:.4f}  TV per cycle {[f'{v:.2e}' for v in rep.tv]}"
              f"  created {rep.created[0]:.2e}  sup dist {rep.dist[-1]:.1e}")
    if min(created) > 0:
        slope = np.polyfit(np.log(tv0), np.log(created), 1)[0]
        print(f"{name}: created strength ~ TV_0^{slope:.2f}")
