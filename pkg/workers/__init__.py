"""
Workers для длительных расчетов ethlab.
"""
