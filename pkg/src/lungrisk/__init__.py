"""Lung-cancer risk analytics: dataset integration, feature statistics, classifiers."""

__version__ = "0.1.0"
