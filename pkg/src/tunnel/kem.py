"""
Encapsulación de claves ML-KEM-512 (Kyber-512).

El primitivo reticular lo aporta una implementación externa (kyber-py por
defecto, liboqs-python opcional); este módulo fija tamaños, errores y
la selección de proveedor.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Optional, Tuple

from loguru import logger

PUBLIC_KEY_BYTES = 800
CIPHERTEXT_BYTES = 768
SHARED_SECRET_BYTES = 32
SEED_BYTES = 64


class TunnelError(Exception):
    """Error en el túnel cifrado."""
    pass


class KeyGenerationError(TunnelError):
    """Error generando un par de claves."""
    pass


class AuthenticationError(TunnelError):
    """El sobre no pasó la verificación de autenticidad y se descarta."""
    pass


@dataclass(frozen=True)
class KemKeyPair:
    """Par de claves ML-KEM-512. La clave secreta nunca sale del silo."""

    public_key: bytes
    secret_key: bytes = field(repr=False)
    provider: str = "kyber-py"

    def __post_init__(self):
        if len(self.public_key) != PUBLIC_KEY_BYTES:
            raise KeyGenerationError(
                f"Clave pública de {len(self.public_key)} bytes, se esperaban {PUBLIC_KEY_BYTES}"
            )


class KemProvider(ABC):
    """Clase base abstracta para implementaciones de ML-KEM-512."""

    name = ""

    @abstractmethod
    def keygen(self, seed: Optional[bytes] = None) -> KemKeyPair:
        """
        Genera un par de claves.

        Args:
            seed: 64 bytes de entropía para generación determinista (opcional)
        """
        pass

    @abstractmethod
    def encaps(self, public_key: bytes) -> Tuple[bytes, bytes]:
        """
        Encapsula un secreto compartido.

        Returns:
            (secreto compartido de 32 bytes, ciphertext KEM de 768 bytes)
        """
        pass

    @abstractmethod
    def decaps(self, secret_key: bytes, ciphertext: bytes) -> bytes:
        """Recupera el secreto compartido (rechazo implícito si no corresponde)."""
        pass


class KyberPyProvider(KemProvider):
    """ML-KEM-512 de kyber-py (Python puro)."""

    name = "kyber-py"

    def __init__(self):
        try:
            from kyber_py.ml_kem import ML_KEM_512
        except ImportError:
            raise TunnelError("kyber-py no disponible. Instalar: pip install kyber-py")
        self._kem = ML_KEM_512

    def keygen(self, seed: Optional[bytes] = None) -> KemKeyPair:
        try:
            if seed is None:
                ek, dk = self._kem.keygen()
            else:
                if len(seed) != SEED_BYTES:
                    raise KeyGenerationError(f"La semilla debe tener {SEED_BYTES} bytes")
                if hasattr(self._kem, "key_derive"):
                    ek, dk = self._kem.key_derive(seed)
                else:
                    ek, dk = self._kem._keygen_internal(seed[:32], seed[32:])
        except KeyGenerationError:
            raise
        except Exception as e:
            raise KeyGenerationError(f"Fallo generando claves ML-KEM-512: {e}") from e
        return KemKeyPair(public_key=bytes(ek), secret_key=bytes(dk), provider=self.name)

    def encaps(self, public_key: bytes) -> Tuple[bytes, bytes]:
        try:
            shared, ciphertext = self._kem.encaps(public_key)
        except Exception as e:
            raise TunnelError(f"Fallo en encapsulación: {e}") from e
        return bytes(shared), bytes(ciphertext)

    def decaps(self, secret_key: bytes, ciphertext: bytes) -> bytes:
        try:
            return bytes(self._kem.decaps(secret_key, ciphertext))
        except Exception as e:
            raise AuthenticationError(f"Fallo en decapsulación: {e}") from e


class OqsProvider(KemProvider):
    """ML-KEM-512 de liboqs-python."""

    name = "oqs"
    ALGORITHM = "ML-KEM-512"

    def __init__(self):
        try:
            import oqs
        except ImportError:
            raise TunnelError("liboqs no disponible. Instalar: pip install liboqs-python")
        self._oqs = oqs

    def keygen(self, seed: Optional[bytes] = None) -> KemKeyPair:
        if seed is not None:
            raise KeyGenerationError("El proveedor oqs no admite generación con semilla")
        try:
            with self._oqs.KeyEncapsulation(self.ALGORITHM) as kem:
                public_key = kem.generate_keypair()
                secret_key = kem.export_secret_key()
        except Exception as e:
            raise KeyGenerationError(f"Fallo generando claves ML-KEM-512: {e}") from e
        return KemKeyPair(public_key=bytes(public_key), secret_key=bytes(secret_key),
                          provider=self.name)

    def encaps(self, public_key: bytes) -> Tuple[bytes, bytes]:
        try:
            with self._oqs.KeyEncapsulation(self.ALGORITHM) as kem:
                ciphertext, shared = kem.encap_secret(public_key)
        except Exception as e:
            raise TunnelError(f"Fallo en encapsulación: {e}") from e
        return bytes(shared), bytes(ciphertext)

    def decaps(self, secret_key: bytes, ciphertext: bytes) -> bytes:
        try:
            with self._oqs.KeyEncapsulation(self.ALGORITHM, secret_key=secret_key) as kem:
                return bytes(kem.decap_secret(ciphertext))
        except Exception as e:
            raise AuthenticationError(f"Fallo en decapsulación: {e}") from e


PROVIDERS = {
    "kyber-py": KyberPyProvider,
    "oqs": OqsProvider,
}

_default_provider: Optional[KemProvider] = None


def create_kem_provider(name: str = "kyber-py") -> KemProvider:
    """
    Factory para crear el proveedor ML-KEM configurado.

    Raises:
        TunnelError: Si el proveedor no está soportado o no está instalado
    """
    name = (name or "").lower()
    if name not in PROVIDERS:
        supported = ", ".join(PROVIDERS.keys())
        raise TunnelError(f"Proveedor KEM no soportado: {name}. Soportados: {supported}")
    provider_class = PROVIDERS[name]
    logger.debug(f"Usando proveedor KEM: {provider_class.__name__}")
    return provider_class()


def default_provider() -> KemProvider:
    global _default_provider
    if _default_provider is None:
        _default_provider = create_kem_provider("kyber-py")
    return _default_provider


def kem_keygen(
    seed: Optional[bytes] = None, provider: Optional[KemProvider] = None
) -> KemKeyPair:
    """
    Genera un par de claves ML-KEM-512 (clave pública de 800 bytes).

    Raises:
        KeyGenerationError: Si falla la fuente de entropía o el proveedor
    """
    provider = provider or default_provider()
    return provider.keygen(seed)
