"""Local cohomology of finite matrix groups over Z/p^lZ."""

from .zq import Modulus
from .groups import CapExceeded, MatrixGroup, Subgroup, all_subgroups, closure, from_spec, sylow
from .cohomology import BudgetExceeded, Cocycle, CohomologyGroup, h1, h1loc, h1loc_cyclic_oracle
from .modules import GModule, StructureVerdict, structure

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "CapExceeded",
    "Cocycle",
    "CohomologyGroup",
    "GModule",
    "MatrixGroup",
    "Modulus",
    "StructureVerdict",
    "Subgroup",
    "all_subgroups",
    "closure",
    "from_spec",
    "h1",
    "h1loc",
    "h1loc_cyclic_oracle",
    "structure",
    "sylow",
]
