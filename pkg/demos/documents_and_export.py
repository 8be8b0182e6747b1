# Documents, N-Triples and corpus statistics

from pathlib import Path
import tempfile

from udsgraph import graph_from_sentence, parse_conllu
from udsgraph.annotations import crosstab_counts, render_crosstabs
from udsgraph.cli import main
from udsgraph.query import to_triples
from udsgraph.serialization import export_ntriples, parse_document, render_document

DATA = Path(__file__).parent / "data"
graphs = [graph_from_sentence(s) for s in parse_conllu((DATA / "sentences.conllu").read_text())]


# The JSON document is deterministic and round trips exactly.

text = render_document(graphs[0])
print(text[:300])
parse_document(text) == graphs[0]


# N-Triples: one line per triple.

nt = export_ntriples(to_triples(graphs[0]))
print(nt.splitlines()[0])
len(nt.splitlines()) == len(to_triples(graphs[0]))


# Cross-tabs of annotated subspaces per split (empty here: nothing is annotated yet).

print(render_crosstabs(crosstab_counts(graphs)))


# The same steps from the command line.

with tempfile.TemporaryDirectory() as tmp:
    main(["build", str(DATA / "sentences.conllu"), "--out", f"{tmp}/docs"])
    main(["query", f"{tmp}/docs", "-e",
          "SELECT ?p WHERE { ?p <type> <predicate> ; <domain> <semantics> }"])
    main(["export", f"{tmp}/docs", "--out", f"{tmp}/corpus.nt"])
    print(len(Path(f"{tmp}/corpus.nt").read_text().splitlines()), "triples exported")
