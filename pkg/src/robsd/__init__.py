"""Min-max robust binary optimisation over a finite scenario set.

The convex relaxation is solved by simplicial decomposition (``run_sd``) and the
binary problem by a warmstarted depth-first branch-and-bound (``solve_bnb``).
"""

from .bnb import BnbConfig, BnbResult, BnbStatus, evaluate_root, solve_bnb
from .master import ActiveSet, MasterSolution, solve_master
from .model import (Graph, Instance, InstanceError, Kind, Scenario, ScenarioSet, check_vertex,
                    evaluate_f, load_instance, save_instance)
from .oracles import (EnumerationOracle, ExternalOracle, HeldKarpOracle, KruskalOracle,
                      LinearOracle, OracleError, make_oracle)
from .sd import DropRule, SdConfig, SdResult, SdStatus, run_sd

__all__ = [
    "ActiveSet", "BnbConfig", "BnbResult", "BnbStatus", "DropRule", "EnumerationOracle",
    "ExternalOracle", "Graph", "HeldKarpOracle", "Instance", "InstanceError", "Kind",
    "KruskalOracle", "LinearOracle", "MasterSolution", "OracleError", "Scenario", "ScenarioSet",
    "SdConfig", "SdResult", "SdStatus", "check_vertex", "evaluate_f", "evaluate_root",
    "load_instance", "make_oracle", "run_sd", "save_instance", "solve_bnb", "solve_master",
]
