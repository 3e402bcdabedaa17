"""Exact LP relaxation toolkit for search trees on trees."""

__version__ = "0.1.0"
