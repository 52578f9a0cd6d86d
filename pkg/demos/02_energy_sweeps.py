"""How the energy budget moves with the sensing period and with the arena size."""
import numpy as np

from slamenergy.config import RunConfig
from slamenergy.planner import sweep_area, sweep_t_sens

cfg = RunConfig()  # Rician channel, seed 0
args = (cfg.mission, cfg.channel, cfg.payload, cfg.mechanical)

# Longer periods mean fewer scans and longer transmit windows, both cheaper
tab = sweep_t_sens(np.linspace(0.06, 0.2, 15), *args)
print("t_sens   E_comm    E_LiDAR   E_mech    E_total")
for t, row in zip(tab.grid, tab.rows):
    r = row.as_row()
    print(f"{t:.3f}  {r['E_comm']:.5f}  {r['E_LiDAR']:8.3f}  {r['E_mech']:8.3f}  {r['E_total']:8.3f}")

# Arena size: LiDAR energy is fixed by the scan count, driving grows with
# the path, transmission grows faster because the link gets longer too
tab = sweep_area(np.arange(2.0, 21.0, 2.0), *args, workers=4)
print("\n   L    E_comm    E_LiDAR   E_mech")
for L, row in zip(tab.grid, tab.rows):
    print(f"{L:5.1f}  {row.E_comm:.5f}  {row.E_lidar:8.3f}  {row.E_mech:8.3f}")
mech, comm = tab.column("E_mech"), tab.column("E_comm")
print(f"\n20 m vs 10 m: driving x{mech[-1] / mech[4]:.2f}, radio x{comm[-1] / comm[4]:.2f}")
