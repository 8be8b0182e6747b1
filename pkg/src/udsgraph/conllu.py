"""Reading and validating CoNLL-U dependency parses.

Only basic token rows are retained: multiword-token ranges (``3-4``) and
empty nodes (``5.1``) are skipped, and the DEPS and MISC columns are
ignored.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from typing import Iterator

ID, FORM, LEMMA, UPOS, XPOS, FEATS, HEAD, DEPREL, DEPS, MISC = range(10)
NCOLUMNS = 10

SPLITS = ("train", "dev", "test")

_SENT_ID = re.compile(r"^#\s*sent_id\s*=\s*(\S.*?)\s*$")


class ConlluError(ValueError):
    """Malformed CoNLL-U input; ``line`` is 1-based within the parsed text."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SentenceValidationError(ValueError):
    """A sentence whose head structure is not a single rooted tree."""

    def __init__(self, sentence_id: str, violations: list[Violation]):
        self.sentence_id = sentence_id
        self.violations = violations
        details = "; ".join(v.message for v in violations)
        super().__init__(f"sentence {sentence_id!r} is invalid: {details}")


@dataclass(frozen=True)
class TokenRecord:
    position: int
    form: str
    lemma: str
    upos: str
    xpos: str
    feats: dict[str, str] = field(default_factory=dict, hash=False)
    head: int = 0
    deprel: str = "root"


@dataclass(frozen=True)
class Sentence:
    sentence_id: str
    tokens: tuple[TokenRecord, ...]
    split: str = "train"

    def __len__(self) -> int:
        return len(self.tokens)

    def token(self, position: int) -> TokenRecord:
        return self.tokens[position - 1]


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    positions: tuple[int, ...] = ()


def parse_feats(column: str, line: int | None = None) -> dict[str, str]:
    """Split a FEATS column into a dict. Duplicate keys keep the last value."""
    feats: dict[str, str] = {}
    if column == "_" or column == "":
        return feats
    for pair in column.split("|"):
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ConlluError(f"malformed feature {pair!r}", line)
        if key in feats:
            warnings.warn(
                f"line {line}: duplicate feature {key!r}, keeping {value!r}",
                stacklevel=3,
            )
        feats[key] = value
    return feats


def iter_blocks(text: str) -> Iterator[tuple[int, list[tuple[int, str]]]]:
    """Yield ``(first_line, [(lineno, line), ...])`` per blank-line separated block."""
    block: list[tuple[int, str]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\r\n")
        if line.strip() == "":
            if block:
                yield block[0][0], block
                block = []
            continue
        block.append((lineno, line))
    if block:
        yield block[0][0], block


def parse_block(
    block: list[tuple[int, str]],
    split: str = "train",
    default_id: str = "sentence",
    validate: bool = True,
) -> Sentence:
    """Parse one sentence block. Raises ConlluError or SentenceValidationError."""
    if split not in SPLITS:
        raise ValueError(f"unknown split {split!r}; expected one of {SPLITS}")
    sentence_id = default_id
    tokens = []
    for lineno, line in block:
        if line.startswith("#"):
            m = _SENT_ID.match(line)
            if m:
                sentence_id = m.group(1)
            continue
        columns = line.split("\t")
        if len(columns) != NCOLUMNS:
            raise ConlluError(
                f"expected {NCOLUMNS} tab-separated columns, found {len(columns)}",
                lineno,
            )
        token_id = columns[ID]
        if "-" in token_id or "." in token_id:
            continue
        try:
            position = int(token_id)
        except ValueError:
            raise ConlluError(f"non-integer token id {token_id!r}", lineno) from None
        try:
            head = int(columns[HEAD])
        except ValueError:
            raise ConlluError(f"non-integer head {columns[HEAD]!r}", lineno) from None
        tokens.append(
            TokenRecord(
                position=position,
                form=columns[FORM],
                lemma=columns[LEMMA],
                upos=columns[UPOS],
                xpos=columns[XPOS],
                feats=parse_feats(columns[FEATS], lineno),
                head=head,
                deprel=columns[DEPREL],
            )
        )
    if not tokens:
        raise ConlluError("block contains no token lines", block[0][0])
    sentence = Sentence(sentence_id, tuple(tokens), split)
    if validate:
        violations = validate_sentence(sentence)
        if violations:
            raise SentenceValidationError(sentence_id, violations)
    return sentence


def parse_conllu(text: str, split: str = "train", doc_id: str = "doc") -> list[Sentence]:
    """Parse CoNLL-U text into sentences.

    Sentences without a ``# sent_id`` comment get ``<doc_id>-<split>-<index>``
    (1-based index of the block within ``text``).
    """
    return [
        parse_block(block, split, f"{doc_id}-{split}-{index}")
        for index, (_, block) in enumerate(iter_blocks(text), start=1)
    ]


def validate_sentence(s: Sentence) -> list[Violation]:
    """Return one Violation per broken tree invariant; empty when valid."""
    violations: list[Violation] = []
    n = len(s.tokens)
    positions = [t.position for t in s.tokens]
    if positions != list(range(1, n + 1)):
        violations.append(
            Violation("positions", f"token positions are not 1..{n}", tuple(positions))
        )
        # head checks below assume a dense 1..n indexing
        return violations

    bad_range = [t.position for t in s.tokens if not 0 <= t.head <= n]
    if bad_range:
        violations.append(
            Violation("head-range", f"head outside 0..{n}", tuple(bad_range))
        )
    self_loops = [t.position for t in s.tokens if t.head == t.position]
    if self_loops:
        violations.append(
            Violation("self-loop", "token is its own head", tuple(self_loops))
        )
    roots = [t.position for t in s.tokens if t.head == 0]
    if len(roots) == 0:
        violations.append(Violation("no-root", "no token attached to root"))
    elif len(roots) > 1:
        violations.append(
            Violation("multiple-roots", f"{len(roots)} tokens attached to root", tuple(roots))
        )
    if bad_range or self_loops:
        return violations

    heads = {t.position: t.head for t in s.tokens}
    on_cycle: set[int] = set()
    reaches_root: set[int] = set()
    for start in positions:
        path: list[int] = []
        seen: set[int] = set()
        node = start
        while node != 0 and node not in reaches_root and node not in on_cycle:
            if node in seen:
                on_cycle.update(path[path.index(node):])
                break
            seen.add(node)
            path.append(node)
            node = heads[node]
        else:
            if node == 0 or node in reaches_root:
                reaches_root.update(path)
    if on_cycle:
        violations.append(
            Violation("cycle", "head chain forms a cycle", tuple(sorted(on_cycle)))
        )
    return violations


def render_conllu(s: Sentence) -> str:
    """Render a sentence back to CoNLL-U (with a sent_id comment)."""
    lines = [f"# sent_id = {s.sentence_id}"]
    for t in s.tokens:
        feats = "|".join(f"{k}={v}" for k, v in t.feats.items()) or "_"
        lines.append(
            "\t".join(
                [str(t.position), t.form, t.lemma, t.upos, t.xpos, feats,
                 str(t.head), t.deprel, "_", "_"]
            )
        )
    return "\n".join(lines) + "\n"
