"""Kernel selection.

The compiled extension is preferred. Setting ``ORLICZSKETCH_PURE_PYTHON=1``
forces the NumPy fallback, which is also used when the extension is absent.
"""
import importlib
import os

from . import _kernels_py


def load(name):
    """Return the kernel module ``"cython"`` or ``"python"``."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        return importlib.import_module("orliczsketch._kernels")
    raise ValueError(f"unknown backend {name!r}")


def _select():
    if os.environ.get("ORLICZSKETCH_PURE_PYTHON") == "1":
        return "python", _kernels_py
    try:
        return "cython", load("cython")
    except ImportError:
        return "python", _kernels_py


BACKEND, kernels = _select()
