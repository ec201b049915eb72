from src.graph_models.models import EdgeOrbit, Family, GraphModel, parse_model
from src.graph_models.registry import VertexHandle, VertexRegistry, edge_key, make_registry

__all__ = [
    "EdgeOrbit",
    "Family",
    "GraphModel",
    "VertexHandle",
    "VertexRegistry",
    "edge_key",
    "make_registry",
    "parse_model",
]
