import threading

import pytest

import config
from src import grid_pool
from src.grid_pool import get_pool, grid_map, shutdown_pool


@pytest.fixture(autouse=True)
def _fresh_pool(monkeypatch):
    monkeypatch.setattr(config, "THREADS", config.THREADS)
    shutdown_pool()
    yield
    shutdown_pool()


def test_order_is_preserved(monkeypatch):
    monkeypatch.setattr(config, "THREADS", 3)
    assert grid_map(lambda x: x * x, range(20)) == [x * x for x in range(20)]


def test_serial_runs_in_caller_thread(monkeypatch):
    monkeypatch.setattr(config, "THREADS", 1)
    names = grid_map(lambda _: threading.current_thread().name, range(4))
    assert set(names) == {threading.current_thread().name}
    assert grid_pool._pool is None


def test_pool_follows_thread_setting(monkeypatch):
    monkeypatch.setattr(config, "THREADS", 2)
    first = get_pool()
    assert first._max_workers == 2
    assert get_pool() is first
    monkeypatch.setattr(config, "THREADS", 3)
    second = get_pool()
    assert second is not first
    assert second._max_workers == 3


def test_serial_after_pool_was_built(monkeypatch):
    monkeypatch.setattr(config, "THREADS", 2)
    get_pool()
    monkeypatch.setattr(config, "THREADS", 1)
    names = grid_map(lambda _: threading.current_thread().name, range(4))
    assert set(names) == {threading.current_thread().name}


def test_errors_propagate(monkeypatch):
    monkeypatch.setattr(config, "THREADS", 2)

    def boom(x):
        if x == 3:
            raise ValueError("bad point")
        return x

    with pytest.raises(ValueError, match="bad point"):
        grid_map(boom, range(6))
