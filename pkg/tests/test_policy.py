"""Priority store ordering, tie handling, and policy key semantics."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evacsim.policy import Policy, Prioritizer, PriorityStore, StoreEmpty
from evacsim.workload import DataItem


def make_item(item_id: int, sla: int, created_at: float = 0.0) -> DataItem:
    return DataItem(item_id, 100, sla, created_at, 0, "DC1")


class NaiveStore:
    """Sorts the whole backlog on every pop. Slow but obviously right."""

    def __init__(self):
        self._entries = []
        self._seq = 0

    def put(self, item, priority):
        # Stable sort keeps ties in insertion order.
        self._entries.append((priority, self._seq, item))
        self._seq += 1

    def pop(self):
        if not self._entries:
            raise StoreEmpty
        self._entries.sort(key=lambda e: (-e[0], e[1]))
        return self._entries.pop(0)[2]

    def __len__(self):
        return len(self._entries)


class TestPriorityStore:
    def test_pops_highest_priority_first(self):
        store = PriorityStore()
        for i, pri in enumerate([3, 9, 1, 7]):
            store.put(make_item(i, 90), pri)
        assert [store.pop().id for _ in range(4)] == [1, 3, 0, 2]

    def test_ties_pop_in_insertion_order(self):
        store = PriorityStore()
        for i in range(5):
            store.put(make_item(i, 95), 95)
        assert [store.pop().id for _ in range(5)] == [0, 1, 2, 3, 4]

    def test_peek_matches_pop(self):
        store = PriorityStore()
        store.put(make_item(0, 91), 91)
        store.put(make_item(1, 97), 97)
        assert store.peek().id == 1
        assert store.pop().id == 1
        assert store.peek().id == 0
        assert len(store) == 1

    def test_empty_store_raises(self):
        store = PriorityStore()
        with pytest.raises(StoreEmpty):
            store.pop()
        with pytest.raises(StoreEmpty):
            store.peek()

    def test_len_tracks_puts_and_pops(self):
        store = PriorityStore()
        rng = random.Random(17)
        size = 0
        for step in range(1000):
            if store and rng.random() < 0.4:
                store.pop()
                size -= 1
            else:
                store.put(make_item(step, 90), rng.randint(0, 50))
                size += 1
            assert len(store) == size
        assert bool(store) == (size > 0)

    def test_drain_empties_in_priority_order(self):
        store = PriorityStore()
        for i, pri in enumerate([2, 8, 5]):
            store.put(make_item(i, 90), pri)
        assert [item.id for item in store.drain()] == [1, 2, 0]
        assert not store

    def test_items_snapshot_without_mutation(self):
        store = PriorityStore()
        for i in range(3):
            store.put(make_item(i, 90), i)
        assert {item.id for item in store.items()} == {0, 1, 2}
        assert len(store) == 3

    def test_matches_naive_store_on_random_traces(self):
        rng = random.Random(101)
        for _ in range(30):
            fast, naive = PriorityStore(), NaiveStore()
            for step in range(rng.randint(1, 1000)):
                if naive._entries and rng.random() < 0.45:
                    assert fast.pop().id == naive.pop().id
                else:
                    pri = rng.randint(0, 12)
                    fast.put(make_item(step, 90), pri)
                    naive.put(make_item(step, 90), pri)
            while len(naive):
                assert fast.pop().id == naive.pop().id
            with pytest.raises(StoreEmpty):
                fast.pop()

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.one_of(st.integers(min_value=0, max_value=9), st.none()), max_size=60))
    def test_hypothesis_trace_equivalence(self, ops):
        # None means pop, an integer means put at that priority.
        fast, naive = PriorityStore(), NaiveStore()
        for step, op in enumerate(ops):
            if op is None:
                if len(naive):
                    assert fast.pop().id == naive.pop().id
                else:
                    with pytest.raises(StoreEmpty):
                        fast.pop()
            else:
                fast.put(make_item(step, 90), op)
                naive.put(make_item(step, 90), op)
        assert len(fast) == len(naive)


class TestPrioritizer:
    def test_sla_key_is_the_item_level(self):
        pri = Prioritizer(Policy.SLA)
        assert pri.priority_of(make_item(0, 93)) == 93
        assert pri.priority_of(make_item(1, 99)) == 99

    def test_sla_store_pops_by_level_then_arrival(self):
        pri = Prioritizer(Policy.SLA)
        store = PriorityStore()
        levels = [92, 99, 92, 95, 99]
        for i, lvl in enumerate(levels):
            item = make_item(i, lvl)
            store.put(item, pri.priority_of(item))
        assert [store.pop().id for _ in range(5)] == [1, 4, 3, 0, 2]

    def test_lifo_key_makes_a_stack(self):
        pri = Prioritizer(Policy.LIFO)
        store = PriorityStore()
        for i in range(6):
            item = make_item(i, 90 + i)
            store.put(item, pri.priority_of(item))
        assert [store.pop().id for _ in range(6)] == [5, 4, 3, 2, 1, 0]

    def test_lifo_ignores_sla_levels(self):
        pri = Prioritizer(Policy.LIFO)
        store = PriorityStore()
        for i, lvl in enumerate([99, 90, 99, 90]):
            item = make_item(i, lvl)
            store.put(item, pri.priority_of(item))
        assert [store.pop().id for _ in range(4)] == [3, 2, 1, 0]

    def test_lifo_interleaved_with_pops(self):
        # Later arrivals always outrank the leftover backlog, like a stack.
        pri = Prioritizer(Policy.LIFO)
        store = PriorityStore()
        for i in range(3):
            item = make_item(i, 90)
            store.put(item, pri.priority_of(item))
        assert store.pop().id == 2
        item = make_item(3, 90)
        store.put(item, pri.priority_of(item))
        assert [store.pop().id for _ in range(3)] == [3, 1, 0]

    def test_sla_arrival_precedes_backlog_only_if_strictly_higher(self):
        pri = Prioritizer(Policy.SLA)
        store = PriorityStore()
        backlog = make_item(0, 95)
        store.put(backlog, pri.priority_of(backlog))
        equal = make_item(1, 95)
        store.put(equal, pri.priority_of(equal))
        higher = make_item(2, 96)
        store.put(higher, pri.priority_of(higher))
        assert [store.pop().id for _ in range(3)] == [2, 0, 1]

    def test_independent_counters_per_prioritizer(self):
        a, b = Prioritizer(Policy.LIFO), Prioritizer(Policy.LIFO)
        item = make_item(0, 90)
        assert a.priority_of(item) == 0
        assert a.priority_of(item) == 1
        assert b.priority_of(item) == 0


class TestPolicyParse:
    def test_known_tokens(self):
        assert Policy.parse("sla") is Policy.SLA
        assert Policy.parse("SLA") is Policy.SLA
        assert Policy.parse("lifo") is Policy.LIFO

    def test_unknown_token_rejected(self):
        with pytest.raises(ValueError):
            Policy.parse("fifo")
        with pytest.raises(ValueError):
            Policy.parse("")
