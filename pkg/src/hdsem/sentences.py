"""Sentence retrieval: each sentence is the bundle of its word vectors.

A document is segmented into sentences, every sentence becomes the
integer sum of its (pipeline-processed) word vectors, and a query is
scored against all sentences by cosine.  Because sums and dots are
integers, a query that exactly reproduces a sentence's bag of words
scores exactly 1.0 against it.
"""

import re
from dataclasses import dataclass

import numpy as np

from .errors import EmptyIndexError, EmptyQueryError
from .textpipe import bare_config, build_vocabulary, preprocess

_BOUNDARY_RE = re.compile(r"[.!?]+[\"')\]]*")

# words that end with a period mid-sentence; checked only for a bare "."
_ABBREVIATIONS = frozenset(
    "mr mrs ms dr st prof rev col gen capt lt sgt maj mme mlle vs etc jr sr".split()
)

_WORD_BEFORE_RE = re.compile(r"([A-Za-z]+)$")


def split_sentences(text):
    """Split text on sentence terminators, keeping raw sentence strings.

    A terminator is a run of . ! ? plus any closing quotes/brackets,
    followed by whitespace or end of text.  A bare period does not end a
    sentence after a known abbreviation (mr, dr, st, ...) or after an
    uppercase initial other than I, so "John H. Watson" and "Mr. Holmes"
    stay intact.  A trailing fragment without a terminator is kept.
    """
    sentences = []
    start = 0
    for m in _BOUNDARY_RE.finditer(text):
        end = m.end()
        if end < len(text) and not text[end].isspace():
            continue
        if m.group(0) == ".":
            wm = _WORD_BEFORE_RE.search(text, 0, m.start())
            if wm:
                w = wm.group(1)
                if w.lower() in _ABBREVIATIONS:
                    continue
                if len(w) == 1 and w.isupper() and w != "I":
                    continue
        piece = text[start:end].strip()
        if piece:
            sentences.append(piece)
        start = end
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


class SentenceIndex:
    """Bag-of-words bundles for every non-empty sentence of one document.

    Sentences whose tokens are all removed by the pipeline (or that
    contain no tokens at all) are excluded; sentence_index in query
    results is the 0-based position among the kept sentences.
    """

    __slots__ = ("vocabulary", "config", "sentences", "token_ids", "matrix", "norms_sq")

    def __init__(self, vocabulary, config, sentences, token_ids, matrix, norms_sq):
        self.vocabulary = vocabulary
        self.config = config
        self.sentences = tuple(sentences)
        self.token_ids = tuple(tuple(int(i) for i in ids) for ids in token_ids)
        self.matrix = matrix
        self.norms_sq = norms_sq

    @property
    def dim(self):
        return self.vocabulary.dim

    def __len__(self):
        return len(self.sentences)


def build_sentence_index(text, dim, seed, config=None):
    """Segment text, process every sentence, and bundle its word vectors.

    The vocabulary is built from this document's own processed tokens in
    order of first appearance, so the index is self-contained.
    """
    config = bare_config() if config is None else config
    kept_texts = []
    kept_tokens = []
    stream = []
    for raw in split_sentences(text):
        toks = preprocess(raw, config)
        if not toks:
            continue
        kept_texts.append(raw)
        kept_tokens.append([t.text for t in toks])
        stream.extend(toks)
    vocab = build_vocabulary(stream, dim, seed, config=config)
    docs = [vocab.encode(ts) for ts in kept_tokens]
    s = len(docs)
    matrix = np.empty((s, dim), dtype=np.int32)
    norms_sq = np.empty(s, dtype=np.int64)
    # row blocks keep the int64 intermediate small at large dim
    for r in range(0, s, 1024):
        block = vocab.bow_matrix(docs[r : r + 1024])
        if np.abs(block).max(initial=0) >= 2**31:
            raise ValueError("sentence counts exceed int32 range")
        matrix[r : r + 1024] = block
        norms_sq[r : r + 1024] = np.einsum("ij,ij->i", block, block)
    return SentenceIndex(vocab, config, kept_texts, docs, matrix, norms_sq)


@dataclass(frozen=True)
class SentenceMatch:
    rank: int
    score: float
    sentence_index: int
    text: str


@dataclass(frozen=True)
class QueryOutcome:
    matches: tuple
    dropped_tokens: tuple


def query_sentences(index, query_text, top_n=3, normalize=True):
    """Top sentences for a free-text query.

    The query runs through the same pipeline as the document; tokens
    absent from the document's vocabulary are dropped and reported in
    the outcome.  normalize=True scores by cosine (a query matching a
    sentence's exact bag of words scores 1.0); normalize=False scores by
    the scaled dot query . sentence / dim, which favors longer
    sentences.  Ties resolve to the earlier sentence.
    """
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    if len(index) == 0:
        raise EmptyIndexError("sentence index is empty")
    toks = preprocess(query_text, index.config)
    dropped = []
    ids = []
    for t in toks:
        i = index.vocabulary.get(t.text)
        if i is None:
            dropped.append(t.text)
        else:
            ids.append(i)
    if not ids:
        raise EmptyQueryError(
            f"no query token is present in the document (dropped: {dropped!r})"
        )
    q = index.vocabulary.bow_matrix([np.asarray(ids, dtype=np.int64)])[0]

    s = len(index)
    num = np.empty(s, dtype=np.int64)
    for r in range(0, s, 1024):
        num[r : r + 1024] = index.matrix[r : r + 1024].astype(np.int64) @ q
    qq = int(q @ q)
    numf = num.astype(np.float64)
    nf = index.norms_sq.astype(np.float64)
    scores = np.full(len(index), -np.inf)
    if normalize:
        defined = index.norms_sq > 0
        scores[defined] = numf[defined] / np.sqrt(nf[defined] * float(qq))
        # exact +-1 for integer-parallel vectors; float rounding must not
        # push a perfect match below a near-duplicate
        near = defined & (np.abs(np.abs(scores) - 1.0) < 1e-9)
        for i in np.nonzero(near)[0]:
            if int(num[i]) ** 2 == int(index.norms_sq[i]) * qq:
                scores[i] = 1.0 if num[i] > 0 else -1.0
    else:
        scores = numf / index.dim

    order = np.lexsort((np.arange(len(scores)), -scores))
    matches = []
    for i in order[: min(top_n, len(order))]:
        if scores[i] == -np.inf:
            break
        matches.append(SentenceMatch(len(matches) + 1, float(scores[i]), int(i), index.sentences[i]))
    return QueryOutcome(tuple(matches), tuple(dropped))
