"""
詞表資料結構

- MergeTable：依序排列的合併規則與其 rank
- Vocabulary：token 字串與 id 的雙向對照，特殊 token 固定在最低的 id
- TokenSequence：編碼結果與每個 token 在原始位元組串中的位置
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from ..core.config import config_manager
from .alphabet import ByteAlphabet, default_alphabet

Pair = Tuple[str, str]


@dataclass(frozen=True)
class MergeTable:
    merges: Tuple[Pair, ...]
    rank: Dict[Pair, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        merges = tuple((left, right) for left, right in self.merges)
        rank = {pair: index for index, pair in enumerate(merges)}
        if len(rank) != len(merges):
            raise ValueError("merge table contains duplicate pairs")
        object.__setattr__(self, "merges", merges)
        object.__setattr__(self, "rank", rank)

    def __len__(self) -> int:
        return len(self.merges)

    def prefix(self, count: int) -> "MergeTable":
        return MergeTable(self.merges[:count])


@dataclass(frozen=True)
class Vocabulary:
    """
    Token/id mapping.

    ids are dense: specials first (in the packaged order), then the 256 byte
    symbols, then merged tokens in the order they were first created.
    """

    id_to_token: Tuple[str, ...]
    specials: Dict[str, int]
    token_to_id: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        token_to_id = {token: index for index, token in enumerate(self.id_to_token)}
        if len(token_to_id) != len(self.id_to_token):
            raise ValueError("vocabulary contains duplicate tokens")
        for role, index in self.specials.items():
            if not 0 <= index < len(self.id_to_token):
                raise ValueError(f"special token {role} has id {index} outside the vocabulary")
        object.__setattr__(self, "token_to_id", token_to_id)

    @classmethod
    def build(cls, merged_tokens: Iterable[str], alphabet: Optional[ByteAlphabet] = None) -> "Vocabulary":
        alphabet = alphabet or default_alphabet()
        specials = config_manager.get_special_tokens()
        tokens: List[str] = [token for _, token in specials]
        tokens.extend(alphabet.byte_to_symbol)
        tokens.extend(merged_tokens)
        return cls(tuple(tokens), {role: index for index, (role, _) in enumerate(specials)})

    @property
    def size(self) -> int:
        return len(self.id_to_token)

    def __len__(self) -> int:
        return self.size

    @property
    def special_ids(self) -> frozenset:
        return frozenset(self.specials.values())

    @property
    def special_tokens(self) -> Dict[str, str]:
        return {role: self.id_to_token[index] for role, index in self.specials.items()}

    def special_id(self, role: str) -> int:
        return self.specials[role]


@dataclass(frozen=True)
class TokenSequence:
    """Encoded ids with half-open byte ranges into the source text."""

    ids: Tuple[int, ...] = ()
    offsets: Tuple[Tuple[int, int], ...] = ()

    def __len__(self) -> int:
        return len(self.ids)

    @classmethod
    def from_lists(cls, ids: Sequence[int], offsets: Sequence[Tuple[int, int]]) -> "TokenSequence":
        return cls(tuple(ids), tuple((int(a), int(b)) for a, b in offsets))
