"""Semantic-network ontology: disambiguation, graphs, layers, replacement."""

from .graph import (
    KIND_DOMAIN,
    KIND_KEYWORD,
    KIND_SUBDOMAIN,
    KIND_SYNSET,
    LAYER_ORDER,
    KeywordInstance,
    LayerCell,
    LayeredHierarchy,
    OntNode,
    OntologyGraph,
    build_graph,
    disambiguate,
    layered,
    simplify,
)
from .network import (
    SEMNET_FORMAT,
    SEMNET_VERSION,
    Domain,
    SemanticNetwork,
    Synset,
    load_network,
    save_network,
)
from .nn import NNIndex, nn_index, nn_query, nn_query_labels
from .replace import (
    ReplacementSuggestions,
    graph_for_tree,
    keyword_instances_from_tree,
    suggest_replacements,
)

__all__ = [
    "KIND_DOMAIN",
    "KIND_KEYWORD",
    "KIND_SUBDOMAIN",
    "KIND_SYNSET",
    "LAYER_ORDER",
    "KeywordInstance",
    "LayerCell",
    "LayeredHierarchy",
    "OntNode",
    "OntologyGraph",
    "build_graph",
    "disambiguate",
    "layered",
    "simplify",
    "SEMNET_FORMAT",
    "SEMNET_VERSION",
    "Domain",
    "SemanticNetwork",
    "Synset",
    "load_network",
    "save_network",
    "NNIndex",
    "nn_index",
    "nn_query",
    "nn_query_labels",
    "ReplacementSuggestions",
    "graph_for_tree",
    "keyword_instances_from_tree",
    "suggest_replacements",
]
