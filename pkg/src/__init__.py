"""
FedGraph-VASP
Simulador de aprendizaje federado sobre grafos de transacciones con
intercambio cifrado de embeddings de frontera.
"""

__version__ = "0.3.0"
__author__ = "TekServices"
