# vfold/cli/__init__.py
"""
VFOLD CLI Package

Command-line interface for the foldover pipeline.
"""

from .main import main

__all__ = ['main']
