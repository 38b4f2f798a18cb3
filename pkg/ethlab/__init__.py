"""
ethlab: диагностика перехода от интегрируемости к хаосу.

Точная диагонализация многочастичных гамильтонианов, наблюдаемые в
собственном базисе энергии, спектральные корреляции, ETH-диагностики,
ансамбли подматриц и энтропия запутанности.
"""

__version__ = "2.0.0"

__all__ = ["__version__"]
