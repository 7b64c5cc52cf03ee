"""
Sobres KEM-DEM: ML-KEM-512 + AES-256-GCM.

Formato en el cable (little-endian):
    magic "FGV1" | sender u16 | recipient u16 | round u32 | kem_ct 768 |
    nonce 12 | payload_len u32 | aead_ct (payload_len + 16)

Datos asociados del AEAD = los primeros 12 bytes (magic hasta round).
"""

import hashlib
import struct
import threading
from dataclasses import dataclass
from typing import Dict, List, Optional

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from loguru import logger

from ..gnn.embeddings import EmbeddingBatch
from .kem import (
    CIPHERTEXT_BYTES,
    PUBLIC_KEY_BYTES,
    AuthenticationError,
    KemProvider,
    TunnelError,
    default_provider,
)

MAGIC = b"FGV1"
AD_FORMAT = struct.Struct("<4sHHI")
PAYLOAD_LEN = struct.Struct("<I")
NONCE_BYTES = 12
TAG_BYTES = 16
HEADER_BYTES = AD_FORMAT.size + CIPHERTEXT_BYTES + NONCE_BYTES + PAYLOAD_LEN.size
ENVELOPE_OVERHEAD = HEADER_BYTES + TAG_BYTES


class EnvelopeFormatError(AuthenticationError):
    """Sobre con estructura inválida."""
    pass


def counter_nonce(counter: int) -> bytes:
    """Nonce de 96 bits a partir de un contador por clave."""
    return counter.to_bytes(NONCE_BYTES, "little")


@dataclass(frozen=True)
class SecureEnvelope:
    """Lote de embeddings cifrado para un silo destino."""

    sender: int
    recipient: int
    round: int
    kem_ciphertext: bytes
    nonce: bytes
    aead_ciphertext: bytes
    magic: bytes = MAGIC

    @property
    def associated_data(self) -> bytes:
        return AD_FORMAT.pack(self.magic, self.sender, self.recipient, self.round)

    @property
    def payload_len(self) -> int:
        return len(self.aead_ciphertext) - TAG_BYTES

    @property
    def key_id(self) -> str:
        """Identificador de la clave de sesión (hash del ciphertext KEM)."""
        return hashlib.sha256(self.kem_ciphertext).hexdigest()

    def __len__(self) -> int:
        return HEADER_BYTES + len(self.aead_ciphertext)

    def to_bytes(self) -> bytes:
        return b"".join(
            [
                self.associated_data,
                self.kem_ciphertext,
                self.nonce,
                PAYLOAD_LEN.pack(self.payload_len),
                self.aead_ciphertext,
            ]
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "SecureEnvelope":
        """
        Parsea el formato de cable. El magic se verifica al descifrar, junto
        con el tag, porque forma parte de los datos asociados.

        Raises:
            EnvelopeFormatError: Si la longitud no es consistente
        """
        if len(data) < HEADER_BYTES + TAG_BYTES:
            raise EnvelopeFormatError(f"Sobre truncado ({len(data)} bytes)")
        magic, sender, recipient, round_ = AD_FORMAT.unpack_from(data, 0)
        offset = AD_FORMAT.size
        kem_ct = data[offset:offset + CIPHERTEXT_BYTES]
        offset += CIPHERTEXT_BYTES
        nonce = data[offset:offset + NONCE_BYTES]
        offset += NONCE_BYTES
        (payload_len,) = PAYLOAD_LEN.unpack_from(data, offset)
        offset += PAYLOAD_LEN.size
        aead_ct = data[offset:]
        if len(aead_ct) != payload_len + TAG_BYTES:
            raise EnvelopeFormatError(
                f"payload_len={payload_len} no coincide con {len(aead_ct)} bytes cifrados"
            )
        return cls(sender, recipient, round_, bytes(kem_ct), bytes(nonce), bytes(aead_ct),
                   magic=bytes(magic))


def encrypt_batch(
    recipient_pk: bytes,
    batch: EmbeddingBatch,
    sender: int,
    recipient: int,
    round: int,
    provider: Optional[KemProvider] = None,
) -> SecureEnvelope:
    """
    Cifra un lote para `recipient` con una encapsulación nueva por sobre.
    El secreto compartido de 32 bytes es directamente la clave AES-256.

    Raises:
        TunnelError: Clave pública inválida o fallo de serialización
    """
    if len(recipient_pk) != PUBLIC_KEY_BYTES:
        raise TunnelError(f"Clave pública de {len(recipient_pk)} bytes")
    provider = provider or default_provider()
    try:
        payload = batch.to_bytes()
    except Exception as e:
        raise TunnelError(f"No se pudo serializar el lote: {e}") from e

    shared, kem_ct = provider.encaps(recipient_pk)
    if len(kem_ct) != CIPHERTEXT_BYTES:
        raise TunnelError(f"Ciphertext KEM de {len(kem_ct)} bytes")

    # Una sola cifra por clave de sesión: el contador empieza y termina en 0
    nonce = counter_nonce(0)
    header = AD_FORMAT.pack(MAGIC, sender, recipient, round)
    aead_ct = AESGCM(shared).encrypt(nonce, payload, header)

    envelope = SecureEnvelope(sender, recipient, round, kem_ct, nonce, aead_ct)
    logger.debug(
        f"Sobre {sender}->{recipient} ronda {round}: {len(batch)} embeddings, {len(envelope)} bytes"
    )
    return envelope


def decrypt_batch(
    secret_key: bytes,
    envelope: SecureEnvelope,
    provider: Optional[KemProvider] = None,
    dim: Optional[int] = None,
) -> EmbeddingBatch:
    """
    Descifra y autentica un sobre.

    Raises:
        AuthenticationError: Tag inválido, clave equivocada o datos asociados alterados
    """
    provider = provider or default_provider()
    shared = provider.decaps(secret_key, envelope.kem_ciphertext)
    try:
        payload = AESGCM(shared).decrypt(
            envelope.nonce, envelope.aead_ciphertext, envelope.associated_data
        )
    except InvalidTag as e:
        raise AuthenticationError(
            f"Sobre {envelope.sender}->{envelope.recipient} ronda {envelope.round} rechazado"
        ) from e
    except ValueError as e:
        raise EnvelopeFormatError(f"Sobre inválido: {e}") from e

    if envelope.magic != MAGIC:
        raise EnvelopeFormatError(f"Magic desconocido {envelope.magic!r}")
    try:
        return EmbeddingBatch.from_bytes(
            payload, dim=dim, round=envelope.round, source_silo=envelope.sender
        )
    except Exception as e:
        raise EnvelopeFormatError(f"Payload autenticado con formato inválido: {e}") from e


@dataclass(frozen=True)
class EnvelopeRecord:
    sender: int
    recipient: int
    round: int
    payload_bytes: int
    envelope_bytes: int


class EnvelopeLog:
    """
    Registro de sobres emitidos. Verifica que ningún nonce se repita bajo
    la misma clave de sesión y conserva los tamaños para la contabilidad.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._nonces: Dict[str, set] = {}
        self.records: List[EnvelopeRecord] = []

    def record(self, envelope: SecureEnvelope) -> EnvelopeRecord:
        """
        Raises:
            TunnelError: Si el nonce ya se usó con esa clave
        """
        key_id = envelope.key_id
        with self._lock:
            used = self._nonces.setdefault(key_id, set())
            if envelope.nonce in used:
                raise TunnelError(f"Nonce repetido bajo la clave {key_id[:16]}")
            used.add(envelope.nonce)
            entry = EnvelopeRecord(
                envelope.sender, envelope.recipient, envelope.round,
                envelope.payload_len, len(envelope),
            )
            self.records.append(entry)
        return entry

    def for_round(self, round: int) -> List[EnvelopeRecord]:
        return [r for r in self.records if r.round == round]

    def __len__(self) -> int:
        return len(self.records)
