import json
import struct

import numpy as np
import pytest

from srlab.dictionary import (Dictionary, RateSpec, from_rate, orthonormal_dictionary,
                              random_dictionary)
from srlab.errors import EmptyDictionary, InvalidParams, SizeOverflow


def test_random_dictionary_unit_norm_and_deterministic():
    C = random_dictionary(4, 16, seed=1)
    assert (C.n, C.M) == (4, 16)
    assert np.max(np.abs(np.sum(C.atoms**2, axis=1) - 1)) <= 1e-12
    np.testing.assert_array_equal(C.atoms, random_dictionary(4, 16, seed=1).atoms)


def test_random_atoms_distinct():
    C = random_dictionary(8, 256, seed=2)
    G = np.abs(C.atoms @ C.atoms.T)
    np.fill_diagonal(G, 0)
    # no atom repeats or negates another
    assert np.max(G) < 1 - 1e-6
    assert np.min(G + np.eye(256)) > 0


@pytest.mark.parametrize("n,rate,M", [(32, 0.25, 256), (64, 0.1875, 4096), (10, 0.0, 1)])
def test_from_rate_sizes(n, rate, M):
    assert RateSpec(n, rate).M == M
    assert from_rate(RateSpec(n, rate), seed=0).M == M


def test_orthonormal_fixture():
    np.testing.assert_array_equal(orthonormal_dictionary(2).atoms, [[1, 0], [0, 1]])
    np.testing.assert_array_equal(orthonormal_dictionary(3).atoms[1], [0, 1, 0])
    C = orthonormal_dictionary(5)
    np.testing.assert_array_equal(C.gram, np.eye(5))


def test_immutable():
    C = random_dictionary(3, 4, seed=0)
    with pytest.raises(ValueError):
        C.atoms[0, 0] = 2.0


def test_unit_norm_enforced_unless_flagged():
    with pytest.raises(InvalidParams):
        Dictionary(np.array([[2.0, 0.0]]))
    C = Dictionary(np.array([[2.0, 0.0]]), unit_norm=False)
    assert C.norms_sq[0] == 4.0
    with pytest.raises(EmptyDictionary):
        Dictionary(np.zeros((0, 3)))


def test_budget(monkeypatch):
    with pytest.raises(SizeOverflow):
        random_dictionary(16, 1000, seed=0, budget=1000)
    monkeypatch.setenv("SRLAB_BUDGET_BYTES", "1024")
    with pytest.raises(SizeOverflow):
        random_dictionary(16, 100, seed=0)
    random_dictionary(16, 8, seed=0)


def test_save_load_roundtrip(tmp_path):
    C = random_dictionary(5, 12, seed=9)
    path = tmp_path / "d.srld"
    C.save(path)
    raw = path.read_bytes()
    magic, version, n, M = struct.unpack("<4sIIQ", raw[:20])
    assert (magic, version, n, M) == (b"SRLD", 1, 5, 12)
    assert len(raw) == 20 + 12 * 5 * 8
    np.testing.assert_array_equal(np.frombuffer(raw[20:], "<f8").reshape(12, 5), C.atoms)
    side = json.loads((tmp_path / "d.srld.json").read_text())
    assert side["seed"] == 9 and side["M"] == 12
    D = Dictionary.load(path)
    np.testing.assert_array_equal(D.atoms, C.atoms)
    assert D.meta["seed"] == 9


def test_load_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.srld"
    path.write_bytes(struct.pack("<4sIIQ", b"XXXX", 1, 1, 1) + b"\0" * 8)
    with pytest.raises(InvalidParams):
        Dictionary.load(path)
