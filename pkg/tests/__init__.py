"""Configuración de pytest."""
