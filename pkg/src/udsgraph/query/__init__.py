from .evaluate import QueryTypeError, evaluate, solutions, to_tsv
from .parser import QuerySyntaxError, UnsupportedFeatureError, parse_query
from .triples import Resource, Triple, TripleView, to_triples

__all__ = [
    "QuerySyntaxError", "QueryTypeError", "Resource", "Triple", "TripleView",
    "UnsupportedFeatureError", "evaluate", "parse_query", "solutions", "to_triples", "to_tsv",
]
