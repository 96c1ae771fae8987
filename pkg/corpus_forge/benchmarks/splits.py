"""
資料切分

這個模組負責：
1. SplitSpec：train / valid / test 比例（總和必須恰為 1）、種子、是否沿用官方 test
2. carve_validation：從訓練部分以種子均勻抽出驗證集（不分層）
3. split_dataset：三向切分；有官方 test 時只切 train / valid
4. write_splits：每個切分一個 JSONL，外加 split_manifest.json

抽樣以 numpy 的種子置換決定成員，成員在各切分內維持原始順序。
"""

import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator

from ..core.config import Config
from ..core.errors import AppException, ErrorCode
from ..core.processing import canonical_json_line
from ..metrics.scores import round_half_up, to_fraction

logger = logging.getLogger(__name__)

SPLIT_MANIFEST_FILENAME = "split_manifest.json"
SPLIT_NAMES = ("train", "valid", "test")

PathLike = Union[str, Path]


class SplitSpec(BaseModel):
    train_fraction: float = 0.72
    valid_fraction: float = 0.08
    test_fraction: float = 0.20
    seed: int = Field(default_factory=lambda: Config.SEED, ge=0)
    official_test: bool = True

    @model_validator(mode="after")
    def _check_fractions(self):
        fractions = (self.train_fraction, self.valid_fraction, self.test_fraction)
        if any(not 0 < f < 1 for f in fractions):
            raise ValueError(f"split fractions must lie in (0, 1), got {fractions}")
        if sum(to_fraction(f) for f in fractions) != 1:
            raise ValueError(f"split fractions must sum to 1, got {fractions}")
        return self

    @classmethod
    def build(cls, **values) -> "SplitSpec":
        try:
            return cls(**values)
        except ValidationError as e:
            raise AppException(ErrorCode.SPLIT_SPEC_INVALID, message_en=str(e), detail=values) from e

    @property
    def valid_share(self) -> Fraction:
        """Validation size as a share of the non-test portion (1/10 for 72/8/20)."""
        train = to_fraction(self.train_fraction)
        valid = to_fraction(self.valid_fraction)
        return valid / (train + valid)


def _draw(count: int, chosen: int, seed) -> Tuple[List[int], List[int]]:
    order = np.random.default_rng(seed).permutation(count)
    picked = np.zeros(count, dtype=bool)
    picked[order[:chosen]] = True
    return np.flatnonzero(~picked).tolist(), np.flatnonzero(picked).tolist()


def carve_validation(train_set: Sequence, spec: SplitSpec) -> Tuple[List, List]:
    """
    Hold out round(valid_share × n) training samples as validation.

    1000 samples under the default spec give 900 / 100.
    """
    count = len(train_set)
    size = round_half_up(spec.valid_share * count)
    rest, valid = _draw(count, size, spec.seed)
    if count and not size:
        logger.warning(f"Validation carve is empty: samples={count} share={spec.valid_share}")
    logger.debug(f"Carved validation: train={len(rest)} valid={len(valid)} seed={spec.seed}")
    return [train_set[i] for i in rest], [train_set[i] for i in valid]


def split_dataset(samples: Sequence, spec: SplitSpec) -> Dict[str, List]:
    """
    三向切分

    official_test 為真時，split 欄為 "test" 的樣本直接成為 test，
    其餘樣本（無論原本標為何者）再切成 train / valid；
    否則先以 round(test_fraction × n) 抽出 test。
    """
    if spec.official_test:
        test = [s for s in samples if getattr(s, "split", None) == "test"]
        pool = [s for s in samples if getattr(s, "split", None) != "test"]
        if not test:
            logger.warning("official_test requested but no sample carries split=test")
    else:
        size = round_half_up(to_fraction(spec.test_fraction) * len(samples))
        rest, held = _draw(len(samples), size, [spec.seed, len(samples)])
        pool = [samples[i] for i in rest]
        test = [samples[i] for i in held]
    train, valid = carve_validation(pool, spec)
    logger.info(f"Split dataset: train={len(train)} valid={len(valid)} test={len(test)} seed={spec.seed}")
    return {"train": train, "valid": valid, "test": test}


def write_splits(splits: Dict[str, Sequence], directory: PathLike, spec: SplitSpec) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = {}
    for name in SPLIT_NAMES:
        if name not in splits:
            continue
        path = directory / f"{name}.jsonl"
        with open(path, "wb") as handle:
            for sample in splits[name]:
                handle.write(canonical_json_line(sample.to_record()))
        files[name] = path.name
    manifest = {
        "counts": {name: len(splits[name]) for name in files},
        "files": files,
        "seed": spec.seed,
        "official_test": spec.official_test,
        "fractions": {
            "train": spec.train_fraction,
            "valid": spec.valid_fraction,
            "test": spec.test_fraction,
        },
    }
    target = directory / SPLIT_MANIFEST_FILENAME
    target.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info(f"Wrote splits: dir={directory} counts={manifest['counts']}")
    return target


def read_split(path: PathLike) -> List[dict]:
    with open(path, "r", encoding="utf-8") as handle:
        return [json.loads(line) for line in handle if line.strip()]
