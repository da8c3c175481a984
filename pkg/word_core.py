import logging
from fractions import Fraction
from pathlib import Path
from typing import Iterable, List, Optional, Union

from helpers.errors import BoundsError, DecodeError, UndefinedDensityError
from models.word import CHARSET, Alphabet, DensityVector, Support, Word

logger = logging.getLogger(__name__)


def parse_word(text: str, alphabet: Alphabet) -> Word:
    """Decode one word: characters '0'-'9','a'-'z' for ell <= 36, whitespace separated integers otherwise."""
    text = (text or "").strip()
    letters: List[int] = []
    if alphabet.uses_characters:
        for position, ch in enumerate(text, start=1):
            code = CHARSET.find(ch)
            if code < 0 or code >= alphabet.size:
                raise DecodeError(f"Character {ch!r} at position {position} is not in an alphabet of size "
                                  f"{alphabet.size}", position=position)
            letters.append(code)
    else:
        for position, token in enumerate(text.split(), start=1):
            try:
                code = int(token)
            except ValueError:
                code = -1
            if code < 0 or code >= alphabet.size:
                raise DecodeError(f"Token {token!r} at position {position} is not in an alphabet of size "
                                  f"{alphabet.size}", position=position)
            letters.append(code)
    return Word(tuple(letters), alphabet)


def serialize_word(word: Word) -> str:
    return str(word)


def infer_alphabet(text: str) -> Alphabet:
    """
    Smallest alphabet (at least binary) able to hold the word.

    Whitespace separated codes select the integer encoding, which only exists
    above len(CHARSET) letters.
    """
    text = (text or "").strip()
    if not text:
        return Alphabet(2)
    if any(ch.isspace() for ch in text):
        tokens = text.split()
        for position, tok in enumerate(tokens, start=1):
            if not tok.isdigit():
                raise DecodeError(f"Token {tok!r} at position {position} is not a letter code", position=position)
        return Alphabet(max(len(CHARSET) + 1, max(int(tok) for tok in tokens) + 1))
    codes = [CHARSET.find(ch) for ch in text]
    if min(codes) < 0:
        bad = codes.index(-1) + 1
        raise DecodeError(f"Character {text[bad - 1]!r} at position {bad} is not a letter code", position=bad)
    return Alphabet(max(2, max(codes) + 1))


def read_words(path: Union[str, Path], alphabet: Optional[Alphabet] = None) -> List[Word]:
    """Read a word file: one word per line, '#' comment lines and blank lines are ignored."""
    words = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                words.append(parse_word(line, alphabet or infer_alphabet(line)))
            except DecodeError as e:
                raise DecodeError(f"{path}:{lineno}: {e}", position=e.position) from e
    logger.debug("Read %d words from %s", len(words), path)
    return words


def write_words(words: Iterable[Word]) -> str:
    return "".join(f"{serialize_word(w)}\n" for w in words)


def extract(word: Word, support: Support) -> Word:
    """The scattered subword S[I] for a 1-based support I."""
    support.validate_for(len(word))
    return Word(tuple(word.letters[i - 1] for i in support.indices), word.alphabet)


def density(word: Word) -> DensityVector:
    if len(word) == 0:
        raise UndefinedDensityError("Density of the empty word is undefined")
    n = len(word)
    return DensityVector(tuple(Fraction(c, n) for c in word.counts))


def factor(word: Word, i: int, j: int) -> Word:
    """Contiguous factor S[i, j], 1-based and inclusive."""
    if not 1 <= i <= j <= len(word):
        raise BoundsError(f"Factor [{i}, {j}] outside 1..{len(word)}")
    return Word(word.letters[i - 1:j], word.alphabet)
