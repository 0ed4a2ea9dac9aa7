# Riemann fans for the built-in models, split into nu-fronts.
import numpy as np

from frontcontrol import make_model
from frontcontrol.riemann import solve_riemann


def show(model, uL, uR, nu):
    print(f"{model.name}: {np.round(uL, 4)} -> {np.round(uR, 4)}, nu = {nu}")
    for w in solve_riemann(model, uL, uR, nu):
        print(f"  family {w.family} {w.kind:<11s} speed {w.speed:+.5f} strength {w.strength:.5f}")


show(make_model("burgers"), [3.0], [1.0], 0.25)
show(make_model("temple2"), [-2.0, 1.0], [-1.8, 2.0], 0.25)

gas = make_model("gas")
show(gas, [1.0, 0.0], [1.1, 0.0], 0.01)     # 1-shock, 2-rarefaction
show(gas, [1.1, 0.1], [1.0, -0.1], 0.05)    # two shocks
