"""
Auditorías de privacidad sobre artefactos entrenados: inversión de embeddings
e inferencia de pertenencia.
"""

from .inversion import AuditError, InversionReport, inversion_attack
from .membership import MiaReport, attack_features, membership_inference, train_shadow

__all__ = [
    "AuditError",
    "InversionReport",
    "MiaReport",
    "attack_features",
    "inversion_attack",
    "membership_inference",
    "train_shadow",
]
