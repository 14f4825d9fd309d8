"""System parameters, unit conversion and channel generation."""

from __future__ import annotations

import dataclasses
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

__all__ = [
    "SystemParams",
    "ChannelSet",
    "dbm_to_watts",
    "watts_to_dbm",
    "parse_power",
    "generate_channels",
    "load_params",
    "params_to_dict",
]


def dbm_to_watts(p_dbm):
    """Convert dBm to watts (0 dBm is one milliwatt)."""
    out = 10.0 ** ((np.asarray(p_dbm, dtype=float) - 30.0) / 10.0)
    return float(out) if out.ndim == 0 else out


def watts_to_dbm(p_w):
    return 10.0 * np.log10(p_w) + 30.0


_POWER_RE = re.compile(r"^\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*(dbm|mw|w)\s*$", re.IGNORECASE)


def parse_power(value) -> float:
    """Parse a power given as a number (watts) or a string with a unit suffix.

    Accepted suffixes are ``dBm``, ``mW`` and ``W`` (case-insensitive), e.g.
    ``"30 dBm"``, ``"1W"``, ``"0.5 mW"``.
    """
    if isinstance(value, (int, float, np.floating, np.integer)):
        return float(value)
    m = _POWER_RE.match(str(value))
    if m is None:
        raise ValueError(f"cannot parse power {value!r}; use a number (W) or a '<x> dBm|mW|W' string")
    x, unit = float(m.group(1)), m.group(2).lower()
    if unit == "dbm":
        return dbm_to_watts(x)
    if unit == "mw":
        return x * 1e-3
    return x


def _per_index(value, n: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"{name} must be a scalar or have length {n}, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SystemParams:
    """Antenna counts, noise levels, power budget and energy thresholds.

    Noise variances and conversion efficiencies may be scalars (shared by
    every user / eavesdropper) or per-index sequences; they are stored as
    read-only arrays of length ``n_users`` or ``n_eves``. All powers are in
    watts.
    """

    n_tx: int = 5
    n_users: int = 3
    n_eves: int = 3
    n_eve_rx: int = 2
    sigma2_sa: Any = 1e-7
    sigma2_sp: Any = 1e-7
    sigma2_ea: Any = 1e-7
    sigma2_ep: Any = 1e-7
    eta_s: Any = 1.0
    eta_e: Any = 1.0
    p_total: float = 1.0
    e_bar_s: float = 1e-4
    e_bar_e: float = 1e-4
    channel_variance: float = 1e-3

    def __post_init__(self):
        for name in ("n_tx", "n_users", "n_eves", "n_eve_rx"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        K, L = self.n_users, self.n_eves
        for name, n in (("sigma2_sa", K), ("sigma2_sp", K), ("eta_s", K),
                        ("sigma2_ea", L), ("sigma2_ep", L), ("eta_e", L)):
            object.__setattr__(self, name, _per_index(getattr(self, name), n, name))
        for name in ("sigma2_sa", "sigma2_sp", "sigma2_ea", "sigma2_ep"):
            if np.any(getattr(self, name) <= 0):
                raise ValueError(f"{name} must be strictly positive")
        for name in ("eta_s", "eta_e"):
            eta = getattr(self, name)
            if np.any(eta <= 0) or np.any(eta > 1):
                raise ValueError(f"{name} must lie in (0, 1]")
        if not self.p_total > 0:
            raise ValueError("p_total must be strictly positive")
        if self.e_bar_s < 0 or self.e_bar_e < 0:
            raise ValueError("energy thresholds must be non-negative")
        if not self.channel_variance > 0:
            raise ValueError("channel_variance must be strictly positive")
        for name in ("p_total", "e_bar_s", "e_bar_e", "channel_variance"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def __eq__(self, other):
        if not isinstance(other, SystemParams):
            return NotImplemented
        return all(np.array_equal(getattr(self, f.name), getattr(other, f.name))
                   for f in dataclasses.fields(self))

    __hash__ = None

    @property
    def sigma2_e(self) -> np.ndarray:
        """Combined eavesdropper noise, antenna plus processing."""
        return self.sigma2_ea + self.sigma2_ep

    def replace(self, **changes) -> "SystemParams":
        """Copy with ``changes`` applied. Homogeneous per-index arrays follow a
        change of ``n_users`` / ``n_eves``; heterogeneous ones must be given."""
        for count, names in (("n_users", ("sigma2_sa", "sigma2_sp", "eta_s")),
                             ("n_eves", ("sigma2_ea", "sigma2_ep", "eta_e"))):
            if count not in changes:
                continue
            for name in names:
                arr = getattr(self, name)
                if name not in changes and np.all(arr == arr[0]):
                    changes[name] = float(arr[0])
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class ChannelSet:
    """One channel realization.

    ``h_users`` has shape ``(K, N_T)``: row ``k`` is the user channel
    vector. ``h_eves`` has shape ``(L, N_T, N_E)``.
    """

    h_users: np.ndarray
    h_eves: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        hu = np.array(self.h_users, dtype=complex)
        he = np.array(self.h_eves, dtype=complex)
        if hu.ndim != 2 or he.ndim != 3 or he.shape[1] != hu.shape[1]:
            raise ValueError(f"inconsistent channel shapes {hu.shape} and {he.shape}")
        if not (np.all(np.isfinite(hu)) and np.all(np.isfinite(he))):
            raise ValueError("channel entries must be finite")
        hu.setflags(write=False)
        he.setflags(write=False)
        object.__setattr__(self, "h_users", hu)
        object.__setattr__(self, "h_eves", he)

    @property
    def n_tx(self) -> int:
        return self.h_users.shape[1]

    @property
    def n_users(self) -> int:
        return self.h_users.shape[0]

    @property
    def n_eves(self) -> int:
        return self.h_eves.shape[0]

    @property
    def n_eve_rx(self) -> int:
        return self.h_eves.shape[2]

    def check(self, params: SystemParams) -> None:
        expected = (params.n_users, params.n_tx), (params.n_eves, params.n_tx, params.n_eve_rx)
        if (self.h_users.shape, self.h_eves.shape) != expected:
            raise ValueError(f"channel shapes {self.h_users.shape}, {self.h_eves.shape} do not match params {expected}")

    def subset(self, n_users: int | None = None, n_eves: int | None = None) -> "ChannelSet":
        return ChannelSet(self.h_users[:n_users], self.h_eves[:n_eves], self.seed)


def _cscg(rng: np.random.Generator, shape, variance: float) -> np.ndarray:
    z = rng.standard_normal(tuple(shape) + (2,))
    return np.sqrt(variance / 2.0) * (z[..., 0] + 1j * z[..., 1])


def generate_channels(params: SystemParams, seed: int) -> ChannelSet:
    """Draw i.i.d. CSCG channels with zero mean and ``params.channel_variance``.

    Users and eavesdroppers use separate PCG64 streams spawned from
    ``SeedSequence(seed)``, filled row by row. Consequently the first ``K``
    user channels do not depend on how many users are drawn, which keeps
    sweeps over ``n_users`` on common random numbers.
    """
    user_ss, eve_ss = np.random.SeedSequence(int(seed)).spawn(2)
    h_users = _cscg(np.random.Generator(np.random.PCG64(user_ss)),
                    (params.n_users, params.n_tx), params.channel_variance)
    h_eves = _cscg(np.random.Generator(np.random.PCG64(eve_ss)),
                   (params.n_eves, params.n_tx, params.n_eve_rx), params.channel_variance)
    return ChannelSet(h_users, h_eves, int(seed))


_POWER_KEYS = ("p_total", "e_bar_s", "e_bar_e")
_NOISE_KEYS = ("sigma2_sa", "sigma2_sp", "sigma2_ea", "sigma2_ep")


def params_from_dict(d: dict) -> SystemParams:
    """Build params from a plain mapping; power-like entries accept unit strings."""
    known = {f.name for f in dataclasses.fields(SystemParams)}
    unknown = set(d) - known
    if unknown:
        raise ValueError(f"unknown parameter(s): {sorted(unknown)}")
    kw = dict(d)
    for key in _POWER_KEYS + _NOISE_KEYS:
        if key in kw:
            v = kw[key]
            kw[key] = [parse_power(x) for x in v] if isinstance(v, (list, tuple)) else parse_power(v)
    return SystemParams(**kw)


def params_to_dict(params: SystemParams) -> dict:
    out = {}
    for f in dataclasses.fields(SystemParams):
        v = getattr(params, f.name)
        if isinstance(v, np.ndarray):
            v = float(v[0]) if np.all(v == v[0]) else v.tolist()
        out[f.name] = v
    return out


def load_params(path: str | Path) -> SystemParams:
    """Load params from a JSON file: either the parameter mapping itself or a
    document with a top-level ``"params"`` object."""
    doc = json.loads(Path(path).read_text())
    return params_from_dict(doc.get("params", doc) if isinstance(doc, dict) else doc)
