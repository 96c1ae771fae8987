"""Byte-level base alphabet: every byte value maps to one printable unicode symbol."""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Tuple


@dataclass(frozen=True)
class ByteAlphabet:
    """
    Bijection between the 256 byte values and printable symbols.

    Printable Latin-1 bytes keep their own character; the remaining bytes
    (controls, whitespace, soft hyphen) are shifted to code points 256 and up,
    so no symbol is whitespace and a space-joined merges file stays parseable.
    """

    byte_to_symbol: Tuple[str, ...]
    symbol_to_byte: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.byte_to_symbol) != 256 or len(set(self.byte_to_symbol)) != 256:
            raise ValueError("byte alphabet must map 256 bytes to 256 distinct symbols")
        object.__setattr__(self, "symbol_to_byte", {s: b for b, s in enumerate(self.byte_to_symbol)})

    def encode(self, data: bytes) -> str:
        table = self.byte_to_symbol
        return "".join(table[b] for b in data)

    def decode(self, symbols: str) -> bytes:
        lookup = self.symbol_to_byte
        return bytes(lookup[s] for s in symbols)


@lru_cache(maxsize=None)
def default_alphabet() -> ByteAlphabet:
    printable = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(0xA1, 0xAC + 1))
        + list(range(0xAE, 0xFF + 1))
    )
    mapping: Dict[int, int] = {b: b for b in printable}
    shift = 0
    for b in range(256):
        if b not in mapping:
            mapping[b] = 256 + shift
            shift += 1
    return ByteAlphabet(tuple(chr(mapping[b]) for b in range(256)))
