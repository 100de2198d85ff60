"""Kernel dispatch: compiled extensions when importable, pure Python otherwise.

Set ``EDSK_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels as py

_names = {
    "_chash": ("prefix_hashes", "prefix_hashes_values", "powers", "window_hashes",
               "extend", "wave_ed", "approx_wave"),
    "_cedit": ("window_ed_pairs", "window_ed_profile", "wdp_run"),
    "_coracle": ("ed_dp", "lcs_dp", "ed_bitparallel", "lcs_bitparallel"),
}


def _load(force_python: bool):
    table = {}
    backend = "python"
    if not force_python:
        try:
            from . import _cedit, _chash, _coracle
        except ImportError:
            pass
        else:
            mods = {"_chash": _chash, "_cedit": _cedit, "_coracle": _coracle}
            for mod, names in _names.items():
                for name in names:
                    table[name] = getattr(mods[mod], name)
            return table, "cython"
    for names in _names.values():
        for name in names:
            table[name] = getattr(py, name)
    return table, backend


_table, BACKEND = _load(os.environ.get("EDSK_BACKEND", "").lower() == "python")

prefix_hashes = _table["prefix_hashes"]
prefix_hashes_values = _table["prefix_hashes_values"]
powers = _table["powers"]
window_hashes = _table["window_hashes"]
extend = _table["extend"]
wave_ed = _table["wave_ed"]
approx_wave = _table["approx_wave"]
window_ed_pairs = _table["window_ed_pairs"]
window_ed_profile = _table["window_ed_profile"]
wdp_run = _table["wdp_run"]
ed_dp = _table["ed_dp"]
lcs_dp = _table["lcs_dp"]
ed_bitparallel = _table["ed_bitparallel"]
lcs_bitparallel = _table["lcs_bitparallel"]


def python_table() -> dict:
    """The fallback implementations, keyed by kernel name."""
    return _load(True)[0]


def compiled_table() -> dict | None:
    """The compiled implementations, or None when the extensions are missing."""
    table, backend = _load(False)
    return table if backend == "cython" else None
