"""
Machine state for the choose language.

The state is one flat store of variable-value bindings; procedure parameters
never live here (they are substituted into procedure bodies). Transactions
keep an undo log holding, for each variable written inside the transaction,
its binding (or absence) before the first write. Restoring replays the log;
committing merges it into the enclosing transaction.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import count
from typing import Dict, Iterator, List, Mapping, Optional

from src.utils import render_value

logger = logging.getLogger(__name__)


class _Unbound(Enum):
    UNBOUND = "unbound"

    def __repr__(self) -> str:
        return "UNBOUND"


# Result of looking up a variable with no binding.
UNBOUND = _Unbound.UNBOUND


class TransactionError(RuntimeError):
    """A transaction token was closed out of stack order."""


@dataclass(frozen=True)
class TxToken:
    """Marks a transaction start point."""
    serial: int
    level: int


@dataclass
class _UndoFrame:
    token: TxToken
    priors: Dict[str, object] = field(default_factory=dict)


def _typed(bindings: Mapping[str, object]) -> dict:
    # (type, value) pairs so that true and 1 compare unequal
    return {name: (type(value), value) for name, value in bindings.items()}


class State:
    """Variable-value bindings with nested transactions."""

    def __init__(self, bindings: Optional[Mapping[str, object]] = None):
        self._bindings: Dict[str, object] = dict(bindings or {})
        self._frames: List[_UndoFrame] = []
        self._serials = count(1)

    def get(self, name: str, default=UNBOUND):
        """Return the binding of `name`, or `default` (UNBOUND) when absent."""
        return self._bindings.get(name, default)

    def set(self, name: str, value) -> None:
        """Bind `name` to `value`, replacing any previous binding."""
        if self._frames:
            priors = self._frames[-1].priors
            if name not in priors:
                priors[name] = self._bindings.get(name, UNBOUND)
        self._bindings[name] = value

    def tx_begin(self) -> TxToken:
        """Open a transaction; later writes can be undone back to this point."""
        token = TxToken(serial=next(self._serials), level=len(self._frames) + 1)
        self._frames.append(_UndoFrame(token))
        return token

    def tx_restore(self, token: TxToken) -> None:
        """Undo every write made since `token` was opened and close it."""
        frame = self._close(token)
        for name, prior in frame.priors.items():
            if prior is UNBOUND:
                self._bindings.pop(name, None)
            else:
                self._bindings[name] = prior
        logger.debug(f"Restored transaction {token.serial}: {len(frame.priors)} binding(s) undone")

    def tx_commit(self, token: TxToken) -> None:
        """Keep the writes made since `token`; the enclosing transaction inherits the undo log."""
        frame = self._close(token)
        if self._frames:
            parent = self._frames[-1].priors
            for name, prior in frame.priors.items():
                parent.setdefault(name, prior)

    def _close(self, token: TxToken) -> _UndoFrame:
        if not self._frames or self._frames[-1].token != token:
            innermost = self._frames[-1].token.serial if self._frames else None
            raise TransactionError(
                f"Transaction {token.serial} is not the innermost open transaction "
                f"(innermost: {innermost})"
            )
        return self._frames.pop()

    @property
    def open_transactions(self) -> int:
        return len(self._frames)

    def names(self) -> List[str]:
        """Bound names in lexicographic order."""
        return sorted(self._bindings)

    def bindings(self) -> Dict[str, object]:
        """A copy of the current bindings."""
        return dict(self._bindings)

    def copy(self) -> "State":
        """A new state with the same bindings and no open transactions."""
        return State(self._bindings)

    def render(self) -> List[str]:
        """Serialize as `name=value` lines sorted by name."""
        return [f"{name}={render_value(self._bindings[name])}" for name in self.names()]

    def __contains__(self, name: str) -> bool:
        return name in self._bindings

    def __len__(self) -> int:
        return len(self._bindings)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names())

    def __eq__(self, other) -> bool:
        if isinstance(other, State):
            return _typed(self._bindings) == _typed(other._bindings)
        if isinstance(other, Mapping):
            return _typed(self._bindings) == _typed(other)
        return NotImplemented

    __hash__ = None

    def __repr__(self) -> str:
        return f"State({self._bindings!r})"
