"""UDC notations as linked data: parsing, versioned class store, URIs, RDF
and a tiered HTTP look-up service."""

from .notation import ElementKind, Connector, NotationError, ParseError, LexError, parse, serialize, leaves
from .store import Tier, ClassStore, ClassRecord, Active, Cancelled, Unknown, ingest, load_catalog
from .uri import encode_notation, decode_notation, mint_class_uri, parse_class_uri, UriParts, UriStyle, legacy_lookup
from .rdf import record_graph, complex_graph, dataset_graph, to_turtle, graph_json
from .views import interpret, to_json

__version__ = "0.1.0"
