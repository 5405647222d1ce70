import random
import threading
import time

import pytest

from spinner_lattice.sweep_utils import parallel_map, thread_count


class TestThreadCount:
    def test_explicit_value_wins(self, monkeypatch):
        monkeypatch.setenv("SPINNER_LATTICE_THREADS", "8")
        assert thread_count(3) == 3

    def test_environment(self, monkeypatch):
        monkeypatch.setenv("SPINNER_LATTICE_THREADS", "4")
        assert thread_count() == 4
        monkeypatch.delenv("SPINNER_LATTICE_THREADS")
        assert thread_count() == 1

    @pytest.mark.parametrize("raw", ["many", "0", "-2"])
    def test_invalid_environment(self, monkeypatch, raw):
        monkeypatch.setenv("SPINNER_LATTICE_THREADS", raw)
        with pytest.raises(ValueError):
            thread_count()


class TestParallelMap:
    def test_order_preserved(self):
        rng = random.Random(5)
        delays = [rng.uniform(0.0, 0.01) for _ in range(20)]

        def _slow_square(index):
            time.sleep(delays[index])
            return index * index

        assert parallel_map(_slow_square, range(20), threads=4) == [i * i for i in range(20)]

    def test_uses_workers(self):
        seen = set()

        def _record(item):
            seen.add(threading.get_ident())
            time.sleep(0.01)
            return item

        assert parallel_map(_record, range(8), threads=4) == list(range(8))
        assert len(seen) > 1

    def test_single_worker_runs_inline(self):
        caller = threading.get_ident()
        assert parallel_map(lambda _: threading.get_ident(), [1, 2], threads=1) == [caller, caller]

    def test_empty(self):
        assert parallel_map(lambda item: item, [], threads=4) == []
