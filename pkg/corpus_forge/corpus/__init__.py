"""
語料管線模組

提供語料匯入、精確去重、文件級洗牌、按位元組取樣與清單合併。
"""

from .documents import (
    MANIFEST_FILENAME,
    CorpusManifest,
    Document,
    ShardInfo,
    Source,
    document_id,
)
from .pipeline import (
    dedup_exact,
    ingest,
    iter_documents,
    iter_texts,
    merge_manifests,
    sample_bytes,
    shuffle,
)

__all__ = [
    'MANIFEST_FILENAME',
    'CorpusManifest',
    'Document',
    'ShardInfo',
    'Source',
    'document_id',
    'dedup_exact',
    'ingest',
    'iter_documents',
    'iter_texts',
    'merge_manifests',
    'sample_bytes',
    'shuffle',
]
