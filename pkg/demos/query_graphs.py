# Querying graphs
#
# Graphs are exposed as triples. Every edge is its own resource: it links
# its endpoints as a predicate and carries its attributes as a subject, so
# a pattern like `?pred ?edge ?arg` can be followed by `?edge <volition> ?v`.

from pathlib import Path

from udsgraph import graph_from_sentence, parse_conllu
from udsgraph.annotations import AttributeValue, attach_attributes
from udsgraph.query import evaluate, parse_query, to_triples, to_tsv

DATA = Path(__file__).parent / "data"
graphs = {s.sentence_id: graph_from_sentence(s)
          for s in parse_conllu((DATA / "sentences.conllu").read_text())}


def annotate(u, values):
    return attach_attributes(u, {k: AttributeValue(v, 0.9) for k, v in values.items()})


# Hand-set attribute values for a few nodes and edges.

thought = annotate(graphs["thought"], {
    ("thought-semantics-pred-2", "factuality", "factual"): 0.8,
    ("thought-semantics-pred-2", "time", "dur-minutes"): 0.4,
    ("thought-semantics-pred-5", "factuality", "factual"): -0.5,
    ("thought-semantics-pred-5", "time", "dur-minutes"): 0.9,
})
copula = annotate(graphs["copula"], {
    ("copula-semantics-arg-1", "genericity", "arg-particular"): 1.0,
    (("copula-semantics-pred-4", "copula-semantics-arg-1"), "protoroles", "sentient"): 1.5,
})
view = to_triples([thought, copula, graphs["gave"]])
len(view)


# Predicates that likely happened and likely lasted minutes.

q = parse_query((DATA / "factual_minutes.rq").read_text())
print(to_tsv(q, evaluate(q, view)))


# Copular predicates with a particular, sentient argument. This one mixes
# layers: it walks from the predicate to its head token and checks the
# relation of a syntactic dependent.

q = parse_query((DATA / "copular_sentient.rq").read_text())
print(to_tsv(q, evaluate(q, view)))


# Filters may compare strings and numbers, but not one with the other.

q = parse_query('SELECT ?n WHERE { ?n <type> ?t FILTER (?t = "argument") }')
len(evaluate(q, view))

try:
    evaluate(parse_query("SELECT ?n WHERE { ?n <type> ?t FILTER (?t > 0) }"), view)
except TypeError as exc:
    print(exc)
