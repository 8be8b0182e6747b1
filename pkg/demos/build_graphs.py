# Building graphs from dependency parses
#
# Each sentence becomes one graph with three kinds of nodes and edges:
# syntax tokens, semantic predicates and arguments, and interface edges
# linking every semantic node to the tokens it covers.

from pathlib import Path

from udsgraph import graph_from_sentence, parse_conllu
from udsgraph.extraction import extract_predicates
from udsgraph.syntax import build_syntax_graph

DATA = Path(__file__).parent / "data"

sentences = parse_conllu((DATA / "sentences.conllu").read_text())
[s.sentence_id for s in sentences]


# The extraction rules find predicate heads, their spans and their arguments.

for s in sentences:
    print(s.sentence_id, " ".join(t.form for t in s.tokens))
    for p in extract_predicates(build_syntax_graph(s)):
        print("  predicate", p.head_position, p.span)
        for a in p.arguments:
            print("    argument", a.head_position, a.span, "clausal" if a.is_clausal else "")


# In "Gene thought that Chris gave the book to Pat" the embedded clause is an
# argument of "thought", and its head "gave" is a predicate in its own right.
# The graph records that with a head edge from the clausal argument to the
# embedded predicate.

u = graph_from_sentence(sentences[1])
for e in u.semantics_edges:
    if e.domain == "semantics":
        print(f"{e.source:32} -> {e.target:32} {e.type}")


# Four performative nodes stand for the speech act itself: the speaker
# predicate, its author and addressee, and the sentence argument. The
# sentence argument heads every predicate not dominated by another one.

sorted(n for n in u.semantics_nodes if u.is_performative(n))


# Interface edges: one head edge per semantic node, nonhead edges for the
# rest of its span.

for e in u.semantics_edges:
    if e.domain == "interface" and e.source.endswith("pred-5"):
        print(e.source, "->", e.target, e.type)
