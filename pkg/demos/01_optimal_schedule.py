"""Optimal speed and sensing period for the default 20 m arena, and where
the energy goes."""
import numpy as np

from slamenergy.channel import ChannelModel, FramePayload, realize_channel
from slamenergy.energy import MechanicalParams, total_energy
from slamenergy.geometry import MissionConfig
from slamenergy.planner import check_feasibility, min_upper_bound_energy, optimal_plan, upper_bound_link_terms
from slamenergy.power import solve_period_powers

mission = MissionConfig()  # 20 x 20 m, 0.45 m inset, 40 s deadline, 400 scans
model = ChannelModel(deterministic=True)
payload = FramePayload()
mech = MechanicalParams()

# Driving slower is always cheaper, so the deadline pins the speed and the
# scan count then pins the period.
plan = optimal_plan(mission)
print(f"v* = {plan.v:.4f} m/s, t_sens* = {plan.t_sens:.4f} s, N_m = {plan.n_periods}")

realization = realize_channel(model, plan.n_periods)
powers = solve_period_powers(plan, mission, model, realization, payload)
energy = total_energy(plan, powers, mech, mission)
for name, value in energy.as_row().items():
    print(f"  {name:8s} {value:10.4f} J")

# Transmit power follows the distance to the access point at (0, 0)
k_far = int(np.argmax(powers.powers)) + 2
print(f"cheapest period k={int(np.argmin(powers.powers)) + 2}: {powers.powers.min():.3e} W")
print(f"dearest period  k={k_far}: {powers.powers.max():.3e} W (far corner)")

report = check_feasibility(plan, powers, mission, payload, model, realization)
for c in report.checks:
    print(f"  {c.name:15s} {'ok' if c.passed else 'VIOLATED':8s} slack={c.slack:.3g}")

d_max, mu = upper_bound_link_terms(plan.v, mission, model)
bound = min_upper_bound_energy(mission, mech, d_max, mu, payload, model.B)
print(f"worst-case-distance bound {bound:.4f} J vs actual {energy.E_total:.4f} J")
