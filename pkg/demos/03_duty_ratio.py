"""Using the whole period for transmission is cheaper than any shorter window."""
import numpy as np

from slamenergy.channel import ChannelModel, FramePayload, realize_channel
from slamenergy.geometry import MissionConfig
from slamenergy.planner import optimal_plan
from slamenergy.power import verify_full_window_optimal

mission = MissionConfig()
model = ChannelModel(deterministic=True)
plan = optimal_plan(mission)
realization = realize_channel(model, plan.n_periods)

rho = np.linspace(0.1, 1.0, 10)
report = verify_full_window_optimal(plan, mission, model, realization, FramePayload(), rho)
for r, e in zip(report.rho_grid, report.e_comm):
    print(f"rho = {r:.1f}: E_comm = {e:.6f} J")
print("full window cheapest:", report.verdict)

# The total falls, though not every period does: near the access point on the
# outbound leg a longer window also reaches farther points.
