"""
Túnel híbrido post-cuántico (ML-KEM-512 + AES-256-GCM) para intercambiar embeddings.
"""

from .bench import BENCH_COLUMNS, OverheadRow, measure_overhead, overhead_table
from .envelope import (
    ENVELOPE_OVERHEAD,
    HEADER_BYTES,
    MAGIC,
    TAG_BYTES,
    EnvelopeFormatError,
    EnvelopeLog,
    EnvelopeRecord,
    SecureEnvelope,
    decrypt_batch,
    encrypt_batch,
)
from .kem import (
    CIPHERTEXT_BYTES,
    PUBLIC_KEY_BYTES,
    SHARED_SECRET_BYTES,
    AuthenticationError,
    KemKeyPair,
    KemProvider,
    KeyGenerationError,
    TunnelError,
    create_kem_provider,
    default_provider,
    kem_keygen,
)

__all__ = [
    "BENCH_COLUMNS",
    "CIPHERTEXT_BYTES",
    "ENVELOPE_OVERHEAD",
    "HEADER_BYTES",
    "MAGIC",
    "PUBLIC_KEY_BYTES",
    "SHARED_SECRET_BYTES",
    "TAG_BYTES",
    "AuthenticationError",
    "EnvelopeFormatError",
    "EnvelopeLog",
    "EnvelopeRecord",
    "KemKeyPair",
    "KemProvider",
    "KeyGenerationError",
    "OverheadRow",
    "SecureEnvelope",
    "TunnelError",
    "create_kem_provider",
    "decrypt_batch",
    "default_provider",
    "encrypt_batch",
    "kem_keygen",
    "measure_overhead",
    "overhead_table",
]
