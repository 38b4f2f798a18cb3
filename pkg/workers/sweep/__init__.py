"""Модуль параллельной развертки по параметрам."""

from .sweep_worker import SweepPoint, SweepResult, SweepWorker

__all__ = ['SweepPoint', 'SweepResult', 'SweepWorker']
