"""Rate parameters, polymer state and the event algebra.

The state space is the (infinite) tree of finite monomer sequences. It is
never materialised: a :class:`Polymer` is a stack of small integer ids and
only the tip can change. Monomer ids are 0-based internally; user-facing
text uses the 1-based labels ``M1 .. Md``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .exceptions import DimensionMismatch, EmptyRates, IdOutOfRange, NonPositiveRate, RateError

#: compact event code used in trajectories; attach codes are the monomer id
DETACH = -1


class RegimeClass(enum.Enum):
    POSITIVE_RECURRENT = "positive_recurrent"
    NULL_RECURRENT = "null_recurrent"
    TRANSIENT = "transient"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, eq=False)
class RateSet:
    """Attachment rates ``k_plus`` and detachment rates ``k_minus``.

    Build instances with :func:`validate_rates`; the constructor performs the
    same checks but expects already-converted arrays.
    """

    k_plus: np.ndarray
    k_minus: np.ndarray

    def __post_init__(self):
        kp = np.array(self.k_plus, dtype=float)
        km = np.array(self.k_minus, dtype=float)
        _check_rate_arrays(kp, km)
        kp.setflags(write=False)
        km.setflags(write=False)
        object.__setattr__(self, "k_plus", kp)
        object.__setattr__(self, "k_minus", km)

    @property
    def d(self) -> int:
        return int(self.k_plus.shape[0])

    @property
    def k_plus_total(self) -> float:
        total = 0.0
        for k in self.k_plus:
            total += float(k)
        return total

    def __eq__(self, other):
        if not isinstance(other, RateSet):
            return NotImplemented
        return np.array_equal(self.k_plus, other.k_plus) and np.array_equal(
            self.k_minus, other.k_minus
        )

    def __hash__(self):
        return hash((self.k_plus.tobytes(), self.k_minus.tobytes()))

    def __repr__(self):
        return f"RateSet(k_plus={self.k_plus.tolist()}, k_minus={self.k_minus.tolist()})"

    def to_dict(self) -> dict:
        return {"k_plus": self.k_plus.tolist(), "k_minus": self.k_minus.tolist()}


def _check_rate_arrays(kp: np.ndarray, km: np.ndarray) -> None:
    if kp.ndim != 1 or km.ndim != 1:
        raise RateError("rates must be one-dimensional sequences")
    if kp.shape[0] != km.shape[0]:
        raise DimensionMismatch(
            f"k_plus has {kp.shape[0]} entries but k_minus has {km.shape[0]}"
        )
    if kp.shape[0] == 0:
        raise EmptyRates("at least one monomer type is required")
    for name, arr in (("k_plus", kp), ("k_minus", km)):
        bad = ~np.isfinite(arr) | (arr <= 0)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise NonPositiveRate(f"{name}[{i + 1}] = {float(arr[i])!r} is not a finite positive rate")


def validate_rates(raw_k_plus: Iterable[float], raw_k_minus: Iterable[float]) -> RateSet:
    """Validate raw rate vectors and return a :class:`RateSet`.

    Raises
    ------
    DimensionMismatch
        The two vectors differ in length.
    NonPositiveRate
        An entry is zero, negative, NaN or infinite.
    EmptyRates
        Both vectors are empty.
    """
    try:
        kp = np.asarray(list(raw_k_plus), dtype=float)
        km = np.asarray(list(raw_k_minus), dtype=float)
    except (TypeError, ValueError) as exc:
        raise RateError(f"rates must be numeric: {exc}") from None
    return RateSet(kp, km)


@dataclass(frozen=True)
class Attach:
    monomer: int


@dataclass(frozen=True)
class Detach:
    pass


Event = Union[Attach, Detach]


def decode_event(code: int) -> Event:
    return Detach() if code == DETACH else Attach(int(code))


def encode_event(event: Event) -> int:
    return DETACH if isinstance(event, Detach) else int(event.monomer)


class Polymer:
    """A finite monomer sequence with stack semantics at the tip.

    The empty polymer is the root state.
    """

    __slots__ = ("_ids",)

    def __init__(self, ids: Sequence[int] = ()):
        self._ids = [int(i) for i in ids]
        if any(i < 0 for i in self._ids):
            raise IdOutOfRange("monomer ids must be non-negative")

    def push(self, monomer: int) -> None:
        if monomer < 0:
            raise IdOutOfRange(f"monomer id {monomer} is negative")
        self._ids.append(int(monomer))

    def pop(self) -> int:
        if not self._ids:
            raise IndexError("cannot detach from the root polymer")
        return self._ids.pop()

    def apply(self, event: Event) -> None:
        if isinstance(event, Detach):
            self.pop()
        else:
            self.push(event.monomer)

    @property
    def is_root(self) -> bool:
        return not self._ids

    @property
    def tip(self) -> int | None:
        return self._ids[-1] if self._ids else None

    @property
    def ids(self) -> tuple:
        return tuple(self._ids)

    def copy(self) -> "Polymer":
        return Polymer(self._ids)

    def label(self) -> str:
        """``'M1M2M1'`` style label, ``'o'`` for the root."""
        return "".join(f"M{i + 1}" for i in self._ids) or "o"

    def __len__(self) -> int:
        return len(self._ids)

    def __iter__(self):
        return iter(self._ids)

    def __eq__(self, other):
        if not isinstance(other, Polymer):
            return NotImplemented
        return self._ids == other._ids

    def __hash__(self):
        return hash(tuple(self._ids))

    def __repr__(self):
        return f"Polymer({self.label()})"


def monomer_counts(p: Polymer | Sequence[int], d: int) -> np.ndarray:
    """Number of occurrences of each monomer type in ``p``."""
    ids = np.asarray(list(p), dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= d):
        raise IdOutOfRange(f"polymer contains an id outside [0, {d})")
    return np.bincount(ids, minlength=d).astype(np.int64)


def total_exit_rate(p: Polymer, r: RateSet) -> float:
    """Total jump rate out of ``p``: K+ at the root, ``k_minus[tip] + K+`` otherwise."""
    tip = p.tip
    if tip is None:
        return r.k_plus_total
    if tip >= r.d:
        raise IdOutOfRange(f"tip id {tip} outside [0, {r.d})")
    return float(r.k_minus[tip]) + r.k_plus_total


def parse_rate_list(text: str) -> list:
    """Parse ``'1,1.2'`` into floats; used by the CLI and config loader."""
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise RateError(f"cannot parse rate list {text!r}") from None

