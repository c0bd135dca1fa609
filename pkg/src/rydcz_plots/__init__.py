"""Figure rendering for the gate-simulation artifacts.

Consumes only the CSV/JSON files emitted by the simulation CLI; never
recomputes physics. Four figure kinds: infidelity heatmaps over the
(T_tot, V) plane, pulse-profile line plots, process-matrix deviation bars
colored by phase, and the error-correction fidelity comparison chart.
"""

__version__ = "1.0.0"
