"""Dynamic market models: adoption, feedback, churn competition, game lifecycles.

The catalog splits into four model families plus shared plumbing:

- :mod:`marketdyn.monopoly` -- single-supplier adoption without market
  feedback (constant, time-varying, segmented, hesitation, birth/death).
- :mod:`marketdyn.feedback` -- one market with a network-effect kernel
  F(u), calibrated through the half-market time T50.
- :mod:`marketdyn.competition` -- several suppliers, with and without
  churning; equilibria and dynamics.
- :mod:`marketdyn.games` -- buyer/player/quitter lifecycles for games
  and services with limited popularity, plus complementary games.
- :mod:`marketdyn.numerics` -- the self-contained numerical kernel every
  model is cross-validated against.
- :mod:`marketdyn.scenario` / :mod:`marketdyn.cli` -- JSON scenario
  documents and the deterministic CSV command line.
"""

from .trajectory import Trajectory, time_grid

__all__ = ["Trajectory", "time_grid"]
__version__ = "0.1.0"
