"""Decompositional semantic graphs over Universal Dependencies parses."""

from .conllu import Sentence, TokenRecord, parse_conllu, validate_sentence
from .extraction import RuleConfig, extract_predicates
from .semantics import UdsGraph, build_uds_graph
from .syntax import SyntaxGraph, build_syntax_graph


def graph_from_sentence(sentence: Sentence, rules: RuleConfig | None = None) -> UdsGraph:
    """Syntax, extraction and semantics in one step."""
    g = build_syntax_graph(sentence)
    return build_uds_graph(g, extract_predicates(g, rules), sentence.split)


__all__ = [
    "RuleConfig", "Sentence", "SyntaxGraph", "TokenRecord", "UdsGraph", "build_syntax_graph",
    "build_uds_graph", "extract_predicates", "graph_from_sentence", "parse_conllu",
    "validate_sentence",
]
