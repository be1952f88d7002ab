"""Unit tests for the transactional state."""

import copy
import random

import pytest

from src.state import UNBOUND, State, TransactionError


class TestBindings:
    """Tests for get and set."""

    def test_get_from_empty_state(self):
        """Test lookups in an empty state are unbound."""
        assert State().get("x") is UNBOUND

    def test_get_bound_and_unbound(self):
        """Test get returns the binding or UNBOUND."""
        state = State({"x": 7})
        assert state.get("x") == 7
        assert state.get("y") is UNBOUND
        assert state.get("y", None) is None

    def test_set_adds_and_replaces(self):
        """Test set adds new bindings and replaces old ones."""
        state = State()
        state.set("x", 1)
        assert state == {"x": 1}
        state.set("x", 2)
        assert state == {"x": 2}
        state.set("y", 3)
        assert state == {"x": 2, "y": 3}

    def test_equality_distinguishes_bool_and_int(self):
        """Test true and 1 are different bindings."""
        assert State({"x": True}) != State({"x": 1})
        assert State({"x": 1}) == State({"x": 1})

    def test_render_sorted_by_name(self):
        """Test rendering produces name=value lines in name order."""
        state = State({"b": "hi", "a": -3, "c": False})
        assert state.render() == ["a=-3", 'b="hi"', "c=false"]
        assert state.names() == ["a", "b", "c"]
        assert list(state) == ["a", "b", "c"]
        assert "a" in state
        assert len(state) == 3

    def test_copy_is_independent(self):
        """Test a copy does not share bindings or transactions."""
        state = State({"x": 1})
        state.tx_begin()
        clone = state.copy()
        clone.set("x", 2)
        assert state.get("x") == 1
        assert clone.open_transactions == 0


class TestTransactions:
    """Tests for tx_begin, tx_restore and tx_commit."""

    def test_restore_removes_new_binding(self):
        """Test restoring undoes a write to a fresh variable."""
        state = State()
        token = state.tx_begin()
        state.set("x", 1)
        state.tx_restore(token)
        assert state == {}

    def test_restore_reinstates_prior_values(self):
        """Test restoring replays the undo log."""
        state = State({"x": 1})
        token = state.tx_begin()
        state.set("x", 2)
        state.set("y", 3)
        state.set("x", 4)
        state.tx_restore(token)
        assert state == {"x": 1}

    def test_restore_without_writes(self):
        """Test restoring an empty transaction changes nothing."""
        state = State({"x": 1})
        state.tx_restore(state.tx_begin())
        assert state == {"x": 1}

    def test_commit_keeps_writes(self):
        """Test committing keeps the writes."""
        state = State()
        token = state.tx_begin()
        state.set("x", 1)
        state.tx_commit(token)
        assert state == {"x": 1}
        assert state.open_transactions == 0

    def test_nested_restores(self):
        """Test nested transactions restore to their own start points."""
        state = State()
        outer = state.tx_begin()
        state.set("x", 1)
        inner = state.tx_begin()
        state.set("x", 2)
        state.tx_restore(inner)
        assert state == {"x": 1}
        state.tx_restore(outer)
        assert state.get("x") is UNBOUND

    def test_committed_inner_writes_roll_back_with_outer(self):
        """Test a committed inner transaction merges into the outer undo log."""
        state = State()
        outer = state.tx_begin()
        inner = state.tx_begin()
        state.set("x", 1)
        state.tx_commit(inner)
        state.tx_restore(outer)
        assert state == {}

    def test_outer_prior_wins_on_merge(self):
        """Test the outer transaction restores its own prior value."""
        state = State({"x": 0})
        outer = state.tx_begin()
        state.set("x", 1)
        inner = state.tx_begin()
        state.set("x", 2)
        state.tx_commit(inner)
        state.tx_restore(outer)
        assert state == {"x": 0}

    def test_out_of_order_close_raises(self):
        """Test closing a non-innermost token raises TransactionError."""
        state = State()
        outer = state.tx_begin()
        state.tx_begin()
        with pytest.raises(TransactionError):
            state.tx_commit(outer)

    def test_closing_twice_raises(self):
        """Test a token can only be closed once."""
        state = State()
        token = state.tx_begin()
        state.tx_commit(token)
        with pytest.raises(TransactionError):
            state.tx_restore(token)


class SnapshotOracle:
    """Deep-copies the whole map at each begin and reinstates it on restore."""

    def __init__(self, bindings):
        self.bindings = dict(bindings)
        self.snapshots = []

    def begin(self):
        self.snapshots.append(copy.deepcopy(self.bindings))

    def set(self, name, value):
        self.bindings[name] = value

    def commit(self):
        self.snapshots.pop()

    def restore(self):
        self.bindings = self.snapshots.pop()


class TestNestingFuzz:
    """Random well-nested transaction histories against the snapshot oracle."""

    @pytest.mark.parametrize("seed", range(200))
    def test_matches_snapshot_oracle(self, seed):
        """Test the undo log agrees with whole-state snapshots."""
        rng = random.Random(seed)
        names = [f"v{i}" for i in range(6)]
        initial = {name: rng.randint(0, 3) for name in names if rng.random() < 0.5}
        state = State(initial)
        oracle = SnapshotOracle(initial)
        tokens = []

        for _ in range(rng.randint(1, 60)):
            roll = rng.random()
            if roll < 0.25 and len(tokens) < 8:
                tokens.append(state.tx_begin())
                oracle.begin()
            elif roll < 0.4 and tokens:
                state.tx_commit(tokens.pop())
                oracle.commit()
            elif roll < 0.55 and tokens:
                state.tx_restore(tokens.pop())
                oracle.restore()
            else:
                name = rng.choice(names)
                value = rng.choice([rng.randint(0, 3), True, "s"])
                state.set(name, value)
                oracle.set(name, value)
            assert state == oracle.bindings

        while tokens:
            if rng.random() < 0.5:
                state.tx_commit(tokens.pop())
                oracle.commit()
            else:
                state.tx_restore(tokens.pop())
                oracle.restore()
        assert state == oracle.bindings
        assert state.open_transactions == 0
