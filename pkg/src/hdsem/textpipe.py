"""Text preprocessing and vocabulary handling.

The processing chain is deliberately crude: lowercase alphanumeric
tokenization, a flat stop list, and an ordered suffix rewrite table.
Conflating word forms ("carried" and "carries" both map to "carri")
is acceptable here because downstream consumers only need stable,
shared identifiers for related surface forms, not dictionary lemmas.

A Vocabulary assigns each distinct word a row index and derives the
word's random sign vector from (seed, index), so a saved vocabulary
is enough to reconstruct every word vector exactly.
"""

import functools
import hashlib
import json
import re
from dataclasses import dataclass
from importlib import resources

import numpy as np
import scipy.sparse

from .core import Hypervector, generate_packed, packed_signs
from .errors import CorpusFormatError, UnknownWordError

TOKEN_RE = re.compile(r"[^\W_]+")

LEMMATIZER_NAMES = ("identity", "suffix")


@dataclass(frozen=True)
class Token:
    """One word occurrence: lowercase text plus 0-based position."""

    text: str
    position: int


def tokenize(text, min_token_length=1):
    """Split text into lowercase alphanumeric tokens.

    Unicode letters and digits are kept, everything else (including
    underscores and apostrophes) separates tokens, so "don't" yields
    the two tokens "don" and "t".  Positions index the kept tokens
    consecutively from 0.
    """
    if min_token_length < 1:
        raise ValueError("min_token_length must be >= 1")
    words = TOKEN_RE.findall(text.lower())
    kept = [w for w in words if len(w) >= min_token_length]
    return [Token(w, i) for i, w in enumerate(kept)]


def _read_data_text(filename):
    return resources.files("hdsem.data").joinpath(filename).read_text(encoding="utf-8")


def _parse_word_lines(text):
    words = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        words.append(line.lower())
    return words


def load_stopwords(path=None):
    """Load a stop list; the bundled English list when path is None."""
    if path is None:
        text = _read_data_text("stopwords_en.txt")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return frozenset(_parse_word_lines(text))


def stopword_digest(stopwords):
    """Order-independent sha256 fingerprint of a stop list."""
    canon = "\n".join(sorted(stopwords))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class SuffixRule:
    suffix: str
    replacement: str
    min_stem: int

    @property
    def terminal(self):
        return self.replacement == self.suffix


def _parse_suffix_rules(text):
    rules = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise CorpusFormatError(
                f"suffix rule line {lineno}: expected 'SUFFIX REPLACEMENT MIN_STEM', got {raw!r}"
            )
        suffix, replacement, min_stem = parts
        if replacement == "-":
            replacement = ""
        try:
            min_stem = int(min_stem)
        except ValueError:
            raise CorpusFormatError(f"suffix rule line {lineno}: bad MIN_STEM in {raw!r}")
        if not suffix:
            raise CorpusFormatError(f"suffix rule line {lineno}: empty suffix")
        if min_stem < 0:
            raise CorpusFormatError(f"suffix rule line {lineno}: negative MIN_STEM")
        # every non-terminal rewrite must shorten the word or the
        # fixpoint loop below could run forever
        if len(replacement) >= len(suffix) and replacement != suffix:
            raise CorpusFormatError(
                f"suffix rule line {lineno}: replacement must be shorter than suffix or equal to it"
            )
        rules.append(SuffixRule(suffix, replacement, min_stem))
    return tuple(rules)


@functools.lru_cache(maxsize=1)
def _default_suffix_rules():
    return _parse_suffix_rules(_read_data_text("suffix_rules.txt"))


def load_suffix_rules(path=None):
    """Load an ordered suffix rule table; the bundled table when path is None."""
    if path is None:
        return _default_suffix_rules()
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return _parse_suffix_rules(text)


class SuffixLemmatizer:
    """Ordered suffix rewriting, applied until nothing changes.

    Per pass the first rule whose suffix matches and whose stem is long
    enough fires; a terminal rule (replacement == suffix) ends rewriting.
    If the final form landed on a protected word (typically the stop
    list: "ares" would otherwise collapse to "are"), the original token
    is returned unchanged, which keeps the map idempotent.
    """

    def __init__(self, rules=None, protected=frozenset()):
        self.rules = tuple(rules) if rules is not None else load_suffix_rules()
        self.protected = frozenset(protected)

    def __call__(self, word):
        original = word
        while True:
            changed = False
            for rule in self.rules:
                if not word.endswith(rule.suffix):
                    continue
                if len(word) - len(rule.suffix) < rule.min_stem:
                    continue
                if rule.terminal:
                    break
                word = word[: len(word) - len(rule.suffix)] + rule.replacement
                changed = True
                break
            if not changed:
                break
        if word != original and word in self.protected:
            return original
        return word


@dataclass(frozen=True)
class PipelineConfig:
    """Preprocessing switches shared by every corpus consumer.

    Stop-word removal happens before lemmatization, so the rewrite
    table never sees stop words and the protected-word guard only has
    to catch rewrites that land on one.
    """

    stopwords: frozenset = frozenset()
    lemmatizer: str = "identity"
    min_token_length: int = 1

    def __post_init__(self):
        object.__setattr__(self, "stopwords", frozenset(self.stopwords))
        if self.lemmatizer not in LEMMATIZER_NAMES:
            raise ValueError(f"lemmatizer must be one of {LEMMATIZER_NAMES}, got {self.lemmatizer!r}")
        if self.min_token_length < 1:
            raise ValueError("min_token_length must be >= 1")


def default_config(lemmatizer="identity", min_token_length=1):
    """Bundled stop list plus the chosen lemmatizer."""
    return PipelineConfig(
        stopwords=load_stopwords(),
        lemmatizer=lemmatizer,
        min_token_length=min_token_length,
    )


def bare_config():
    """No stop list, no lemmatizer; tokens pass through unchanged."""
    return PipelineConfig()


def make_lemmatizer(config):
    if config.lemmatizer == "identity":
        return lambda word: word
    return SuffixLemmatizer(protected=config.stopwords)


def apply_pipeline(tokens, config):
    """Filter stop words, lemmatize, and renumber positions.

    Expects lowercase tokens as produced by tokenize().  Applying the
    pipeline twice gives the same result as applying it once.
    """
    lemma = make_lemmatizer(config)
    out = []
    for tok in tokens:
        text = tok.text if isinstance(tok, Token) else tok
        if text in config.stopwords:
            continue
        out.append(lemma(text))
    return [Token(w, i) for i, w in enumerate(out)]


def preprocess(text, config):
    """tokenize() then apply_pipeline() in one call."""
    return apply_pipeline(tokenize(text, config.min_token_length), config)


_START_MARK = "*** START OF"
_END_MARK = "*** END OF"


def strip_gutenberg_boilerplate(text):
    """Cut licensing header/footer from a Project Gutenberg etext.

    Keeps only the lines between the '*** START OF ...' and
    '*** END OF ...' marker lines; returns the text unchanged when the
    markers are absent.
    """
    lines = text.splitlines()
    start = None
    end = None
    for i, line in enumerate(lines):
        mark = line.strip()
        if start is None and mark.startswith(_START_MARK):
            start = i + 1
        elif start is not None and mark.startswith(_END_MARK):
            end = i
            break
    if start is None:
        return text
    body = lines[start:end]
    return "\n".join(body).strip("\n") + "\n"


VOCAB_FORMAT_VERSION = 1


class Vocabulary:
    """Distinct words in first-appearance order, each owning one row index.

    The (seed, index) pair fully determines a word's sign vector, so two
    vocabularies with equal word lists, dim, and seed produce identical
    embeddings.  lemmatizer and stopword_digest are provenance fields
    recorded so a saved vocabulary can be matched against the pipeline
    that produced it; they do not affect the vectors.
    """

    __slots__ = ("words", "dim", "seed", "lemmatizer", "stopword_digest", "_index", "_packed")

    def __init__(self, words, dim, seed, lemmatizer="identity", stopword_digest=None):
        words = tuple(words)
        if dim < 1:
            raise ValueError("dim must be >= 1")
        if lemmatizer not in LEMMATIZER_NAMES:
            raise ValueError(f"lemmatizer must be one of {LEMMATIZER_NAMES}, got {lemmatizer!r}")
        index = {}
        for i, w in enumerate(words):
            if not isinstance(w, str) or not w:
                raise ValueError(f"word {i} must be a non-empty string")
            if w in index:
                raise ValueError(f"duplicate word {w!r}")
            index[w] = i
        self.words = words
        self.dim = int(dim)
        self.seed = int(seed)
        self.lemmatizer = lemmatizer
        if stopword_digest is None:
            stopword_digest = stopword_digest_of_empty()
        self.stopword_digest = stopword_digest
        self._index = index
        self._packed = None

    @classmethod
    def from_tokens(cls, tokens, dim, seed, config=None):
        """Build from a processed token stream, keeping first-appearance order."""
        seen = {}
        for tok in tokens:
            text = tok.text if isinstance(tok, Token) else tok
            if text not in seen:
                seen[text] = None
        lemmatizer = config.lemmatizer if config is not None else "identity"
        digest = stopword_digest(config.stopwords) if config is not None else None
        return cls(tuple(seen), dim, seed, lemmatizer=lemmatizer, stopword_digest=digest)

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self._index

    def index_of(self, word):
        try:
            return self._index[word]
        except KeyError:
            raise UnknownWordError(f"word {word!r} is not in the vocabulary") from None

    def get(self, word):
        return self._index.get(word)

    def encode(self, tokens, skip_unknown=False):
        """Map tokens to row indices; int64 array."""
        out = []
        for tok in tokens:
            text = tok.text if isinstance(tok, Token) else tok
            i = self._index.get(text)
            if i is None:
                if skip_unknown:
                    continue
                raise UnknownWordError(f"word {text!r} is not in the vocabulary")
            out.append(i)
        return np.asarray(out, dtype=np.int64)

    def packed(self):
        """Packed sign matrix for all words, uint64 [n, words_per_vector(dim)]."""
        if self._packed is None:
            indices = np.arange(len(self.words), dtype=np.uint64)
            self._packed = generate_packed(self.dim, self.seed, indices)
            self._packed.flags.writeable = False
        return self._packed

    def sign_matrix(self):
        """Unpacked sign matrix, int8 [n, dim].  Recomputed per call."""
        if len(self.words) == 0:
            return np.zeros((0, self.dim), dtype=np.int8)
        return packed_signs(self.packed(), self.dim)

    def vector_of(self, word):
        return self.vector_at(self.index_of(word))

    def vector_at(self, i):
        n = len(self.words)
        if not 0 <= i < n:
            raise IndexError(f"row {i} out of range for vocabulary of {n}")
        return Hypervector(self.dim, self.packed()[i].copy())

    def bow_matrix(self, documents):
        """Sum of word vectors per document, int64 [m, dim].

        documents is a sequence of index arrays as produced by encode().
        Repeated indices add their vector once per occurrence.
        """
        m = len(documents)
        n = len(self.words)
        lengths = np.array([len(doc) for doc in documents], dtype=np.int64)
        if m == 0 or lengths.sum() == 0:
            return np.zeros((m, self.dim), dtype=np.int64)
        rows = np.repeat(np.arange(m, dtype=np.int64), lengths)
        cols = np.concatenate([np.asarray(doc, dtype=np.int64) for doc in documents if len(doc)])
        if cols.min() < 0 or cols.max() >= n:
            raise IndexError("document index out of vocabulary range")
        data = np.ones(len(cols), dtype=np.int64)
        counts = scipy.sparse.coo_matrix((data, (rows, cols)), shape=(m, n)).tocsr()
        signs = self.sign_matrix()
        out = np.empty((m, self.dim), dtype=np.int64)
        # sparse @ dense upcasts the dense block to int64, so bound the
        # transient to ~200MB by slicing columns
        step = max(64, 25_000_000 // max(1, n))
        for c in range(0, self.dim, step):
            out[:, c : c + step] = counts @ signs[:, c : c + step].astype(np.int64)
        return out

    def save(self, path):
        payload = {
            "format_version": VOCAB_FORMAT_VERSION,
            "dim": self.dim,
            "seed": self.seed,
            "lemmatizer": self.lemmatizer,
            "stopword_digest": self.stopword_digest,
            "words": list(self.words),
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, ensure_ascii=False, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            try:
                payload = json.load(fh)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"vocabulary file {path}: not valid JSON ({exc})") from None
        if not isinstance(payload, dict):
            raise CorpusFormatError(f"vocabulary file {path}: expected a JSON object")
        version = payload.get("format_version")
        if version != VOCAB_FORMAT_VERSION:
            raise CorpusFormatError(
                f"vocabulary file {path}: unsupported format_version {version!r}"
            )
        missing = {"dim", "seed", "words"} - payload.keys()
        if missing:
            raise CorpusFormatError(f"vocabulary file {path}: missing keys {sorted(missing)}")
        try:
            return cls(
                payload["words"],
                payload["dim"],
                payload["seed"],
                lemmatizer=payload.get("lemmatizer", "identity"),
                stopword_digest=payload.get("stopword_digest"),
            )
        except (TypeError, ValueError) as exc:
            raise CorpusFormatError(f"vocabulary file {path}: {exc}") from None


def stopword_digest_of_empty():
    return stopword_digest(frozenset())


def build_vocabulary(tokens, dim, seed, config=None):
    """Vocabulary from a processed token stream, first-appearance order."""
    return Vocabulary.from_tokens(tokens, dim, seed, config=config)
