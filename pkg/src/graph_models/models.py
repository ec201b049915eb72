# src/graph_models/models.py - Graph family descriptors and model-string parsing

import difflib
import enum
import logging
import math
from dataclasses import dataclass
from typing import Dict, Tuple

from src.exceptions import GraphModelError

logger = logging.getLogger(__name__)


class EdgeOrbit(enum.Enum):
    TREE = "tree"
    LATTICE = "lattice"
    ORIENTED = "oriented"
    UNORIENTED = "unoriented"
    GRANDPARENT = "grandparent"


class Family(enum.Enum):
    FIXED_END_TREE = "fixed-end-tree"
    ORIENTED_TREE_112 = "oriented-tree-112"
    TREE_X_LATTICE = "tree-x-lattice"
    GRANDPARENT = "grandparent"


# parameters each family accepts in its model string
FAMILY_PARAMS: Dict[Family, Tuple[str, ...]] = {
    Family.FIXED_END_TREE: ("k",),
    Family.ORIENTED_TREE_112: (),
    Family.TREE_X_LATTICE: ("k", "d"),
    Family.GRANDPARENT: ("k",),
}


@dataclass(frozen=True)
class GraphModel:
    """Immutable descriptor of a lazily materialized vertex-transitive graph.

    Heights are integers measured in units of ``height_unit`` (natural log of the
    modular function per unit of height), so that
    Delta(u, v) = exp(height_unit * (height(v) - height(u))).
    """

    family: Family
    k: int = 4
    d: int = 0

    def __post_init__(self) -> None:
        if self.family is Family.ORIENTED_TREE_112:
            if self.k != 4:
                raise GraphModelError("oriented-tree-112 is defined on the 4-regular tree only")
        elif self.k < 3:
            raise GraphModelError(f"{self.family.value} needs k >= 3, got k={self.k}")
        if self.family is Family.TREE_X_LATTICE and self.d < 1:
            raise GraphModelError(f"tree-x-lattice needs d >= 1, got d={self.d}")

    @property
    def degree(self) -> int:
        if self.family is Family.FIXED_END_TREE:
            return self.k
        if self.family is Family.ORIENTED_TREE_112:
            return 4
        if self.family is Family.TREE_X_LATTICE:
            return self.k + 2 * self.d
        # grandparent, parent, k-1 children, (k-1)^2 grandchildren
        return self.k + 1 + (self.k - 1) ** 2

    @property
    def height_unit(self) -> float:
        if self.family is Family.ORIENTED_TREE_112:
            return math.log(2.0)
        return math.log(self.k - 1)

    @property
    def max_height_step(self) -> int:
        return 2 if self.family is Family.GRANDPARENT else 1

    @property
    def t0(self) -> float:
        """sup of log Delta over edges"""
        return self.max_height_step * self.height_unit

    @property
    def layer_scale(self) -> float:
        """Normalized log-modular value (in t0 units) of one unit of height"""
        return 1.0 / self.max_height_step

    @property
    def has_simple_layers(self) -> bool:
        return self.max_height_step == 1

    @property
    def orbits(self) -> Tuple[EdgeOrbit, ...]:
        if self.family is Family.FIXED_END_TREE:
            return (EdgeOrbit.TREE,)
        if self.family is Family.ORIENTED_TREE_112:
            return (EdgeOrbit.ORIENTED, EdgeOrbit.UNORIENTED)
        if self.family is Family.TREE_X_LATTICE:
            return (EdgeOrbit.TREE, EdgeOrbit.LATTICE)
        return (EdgeOrbit.TREE, EdgeOrbit.GRANDPARENT)

    @property
    def is_tree(self) -> bool:
        return self.family in (Family.FIXED_END_TREE, Family.ORIENTED_TREE_112)

    def to_string(self) -> str:
        params = FAMILY_PARAMS[self.family]
        if not params:
            return self.family.value
        values = ",".join(f"{name}={getattr(self, name)}" for name in params)
        return f"{self.family.value}:{values}"

    def __str__(self) -> str:
        return self.to_string()

    def new_registry(self) -> "VertexRegistry":  # noqa: F821
        """Fresh single-writer vertex registry rooted at the origin"""
        from src.graph_models.registry import make_registry

        return make_registry(self)


def parse_model(text: str) -> GraphModel:
    """Parse strings such as ``fixed-end-tree:k=4`` or ``tree-x-lattice:k=4,d=1``"""
    name, _, rest = text.strip().partition(":")
    families = {f.value: f for f in Family}
    if name not in families:
        hint = difflib.get_close_matches(name, families.keys(), n=1)
        suggestion = f" (did you mean '{hint[0]}'?)" if hint else ""
        raise GraphModelError(f"Unknown model '{name}'{suggestion}; choose from {sorted(families)}")
    family = families[name]
    allowed = FAMILY_PARAMS[family]
    values: Dict[str, int] = {}
    for item in filter(None, (part.strip() for part in rest.split(","))):
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or key not in allowed:
            raise GraphModelError(f"Bad parameter '{item}' for {name}; accepted: {allowed or 'none'}")
        try:
            values[key] = int(raw)
        except ValueError as e:
            raise GraphModelError(f"Parameter {key} of {name} must be an integer, got '{raw}'") from e
    if family is Family.TREE_X_LATTICE:
        values.setdefault("d", 1)
    return GraphModel(family=family, **values)
