"""Hand-built annotated graphs for the three worked queries, with expected answers."""

from conftest import DATA, load_sentence
from udsgraph import graph_from_sentence
from udsgraph.annotations import SUBSPACES, AttributeValue, attach_attributes
from udsgraph.query.triples import edge_resource_id


def query_text(name):
    return (DATA / f"{name}.rq").read_text()


def _annotate(name, values):
    u = graph_from_sentence(load_sentence(name))
    attrs = {}
    for (target, prop), value in values.items():
        subspace = next(s for s, props in SUBSPACES.items() if prop in props)
        attrs[(target, subspace, prop)] = AttributeValue(value, 0.9)
    return attach_attributes(u, attrs)


def factual_minutes_fixture():
    u = _annotate("thought", {
        ("thought-semantics-pred-2", "factual"): 0.8,
        ("thought-semantics-pred-2", "dur-minutes"): 0.4,
        ("thought-semantics-pred-5", "factual"): -0.5,
        ("thought-semantics-pred-5", "dur-minutes"): 0.9,
    })
    return [u], ["thought-semantics-pred-2"]


def delimited_edges_fixture():
    p, a1, a4, a6 = ("gave-semantics-pred-2", "gave-semantics-arg-1",
                     "gave-semantics-arg-4", "gave-semantics-arg-6")
    u = _annotate("gave", {
        (p, "pred-particular"): 1.0,
        (a1, "arg-particular"): 1.2,
        (a4, "arg-particular"): 0.5,
        (a6, "arg-particular"): -1.0,
        ((p, a1), "volition"): 1.0,
        ((p, a1), "sentient"): 2.0,
        ((p, a4), "volition"): -1.0,
        ((p, a4), "sentient"): 0.3,
        ((p, a6), "volition"): 1.0,
        ((p, a6), "sentient"): 1.0,
    })
    e1 = edge_resource_id(p, a1, "semantics")
    e4 = edge_resource_id(p, a4, "semantics")
    # arg-1 satisfies both union branches, so its edge is returned twice
    return [u], [e1, e1, e4]


def copular_sentient_fixture():
    cop = _annotate("copula", {
        ("copula-semantics-arg-1", "arg-particular"): 1.0,
        (("copula-semantics-pred-4", "copula-semantics-arg-1"), "sentient"): 1.5,
    })
    plain = _annotate("gave", {
        ("gave-semantics-arg-1", "arg-particular"): 1.0,
        (("gave-semantics-pred-2", "gave-semantics-arg-1"), "sentient"): 1.5,
    })
    return [cop, plain], ["copula-semantics-pred-4"]


def toy_corpus():
    """Two predicates with factuality, one also genericity; protoroles on two edges."""
    av = AttributeValue(0.5, 0.5)
    gave = graph_from_sentence(load_sentence("gave"))
    thought = graph_from_sentence(load_sentence("thought"))
    g = attach_attributes(gave, {
        ("gave-semantics-pred-2", "factuality", "factual"): av,
        ("gave-semantics-pred-2", "genericity", "pred-particular"): av,
        ("gave-semantics-arg-1", "wordsense", "supersense.noun.person"): av,
        ("gave-semantics-arg-1", "genericity", "arg-particular"): av,
        (("gave-semantics-pred-2", "gave-semantics-arg-1"), "protoroles", "volition"): av,
    })
    t = attach_attributes(thought, {
        ("thought-semantics-pred-2", "factuality", "factual"): av,
        ("thought-semantics-pred-2", "time", "dur-minutes"): av,
        ("thought-semantics-arg-1", "wordsense", "supersense.noun.person"): av,
        (("thought-semantics-pred-2", "thought-semantics-arg-1"), "protoroles", "volition"): av,
    })
    t.split = "dev"
    return [g, t]


# hand counts for toy_corpus; rows and columns follow NODE_SUBSPACES
TOY_NODE_COUNTS = {
    "train": [[1, 1, 0, 0], [1, 2, 0, 1], [0, 0, 0, 0], [0, 1, 0, 1]],
    "dev": [[1, 0, 1, 0], [0, 0, 0, 0], [1, 0, 1, 0], [0, 0, 0, 1]],
    "test": [[0] * 4] * 4,
}
TOY_EDGE_COUNTS = {
    "train": [[0, 1, 0, 1], [1, 1, 0, 1], [0, 0, 0, 0], [1, 1, 0, 0]],
    "dev": [[0, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 1], [1, 0, 1, 0]],
    "test": [[0] * 4] * 4,
}


GOLDEN = {
    "factual_minutes": factual_minutes_fixture,
    "delimited_edges": delimited_edges_fixture,
    "copular_sentient": copular_sentient_fixture,
}


def read_stats_output(text):
    """Parse ``udsgraph stats`` output back into {section: {split: upper-triangle rows}}."""
    labels = ["Factuality", "Genericity", "Time", "Entity Type"]
    out, section, split = {}, None, None
    for line in text.splitlines():
        if line in ("Annotated Nodes", "Annotated Edges + Nodes"):
            section = "nodes" if line.endswith("Nodes") and "Edges" not in line else "edges"
            out[section] = {}
        elif line in ("Train", "Dev", "Test"):
            split = line.lower()
            out[section][split] = []
        elif any(line.startswith(l) for l in labels):
            label = next(l for l in labels if line.startswith(l))
            cells = [int(c.replace(",", "")) for c in line[len(label):].split()]
            out[section][split].append(cells)
    return out


def upper(matrix):
    return [row[i:] for i, row in enumerate(matrix)]
