import numpy as np
import pytest

from psimlab import Image, PhaseMap
from psimlab import io
from psimlab.metrics import Profile
from psimlab.nn import (CheckpointError, load_checkpoint, save_checkpoint)


class TestPfm:
    def test_round_trip(self, tmp_path):
        data = np.random.default_rng(0).normal(size=(12, 20))
        path = tmp_path / "x.pfm"
        io.write_pfm(path, data)
        back = io.read_pfm(path)
        assert back.shape == (12, 20)
        assert np.array_equal(back, data.astype(np.float32).astype(np.float64))

    def test_header_format(self, tmp_path):
        path = tmp_path / "x.pfm"
        io.write_pfm(path, np.zeros((3, 5)))
        raw = path.read_bytes()
        assert raw.startswith(b"Pf\n5 3\n-1.0\n")
        assert len(raw) == len(b"Pf\n5 3\n-1.0\n") + 4 * 15

    def test_rejects_non_pfm(self, tmp_path):
        path = tmp_path / "x.pfm"
        path.write_bytes(b"P5\n1 1\n255\n\x00")
        with pytest.raises(ValueError):
            io.read_pfm(path)

    def test_sidecar_round_trip(self, tmp_path):
        path = tmp_path / "p.pfm"
        io.save_phase(path, PhaseMap(np.zeros((8, 8)), wrapped=True), seed=7)
        meta = io.read_sidecar(path)
        assert meta["role"] == "phase"
        assert meta["units"] == "radians"
        assert meta["wrapped"] is True
        assert meta["seed"] == 7
        back = io.load_phase(path)
        assert back.wrapped

    def test_image_sidecar(self, tmp_path):
        path = tmp_path / "i.pfm"
        io.save_image(path, Image(np.ones((4, 4))), seed=1)
        assert io.read_sidecar(path)["role"] == "intensity"


class TestProfileCsv:
    def test_round_trip(self, tmp_path):
        profile = Profile(np.arange(20, dtype=np.float64), (5, 10, 15))
        path = tmp_path / "p.csv"
        io.write_profile_csv(path, profile)
        text = path.read_text()
        assert "# segment=1" in text and "# segment=4" not in text
        back = io.read_profile_csv(path)
        assert np.array_equal(back.values, profile.values)
        assert back.boundaries == profile.boundaries


class TestCheckpoint:
    def params(self):
        rng = np.random.default_rng(0)
        return [("a.w", rng.normal(size=(2, 3))), ("a.b", rng.normal(size=3))]

    def test_round_trip(self, tmp_path):
        path = tmp_path / "c.ckpt"
        params = self.params()
        save_checkpoint(path, params, meta={"step": 5})
        back, meta = load_checkpoint(path)
        assert meta == {"step": 5}
        for (n, p), (bn, bp) in zip(params, back):
            assert n == bn
            assert np.array_equal(p, bp)

    def test_corruption_detected(self, tmp_path):
        path = tmp_path / "c.ckpt"
        save_checkpoint(path, self.params())
        raw = bytearray(path.read_bytes())
        raw[-1] ^= 0xFF
        path.write_bytes(bytes(raw))
        with pytest.raises(CheckpointError, match="hash"):
            load_checkpoint(path)

    def test_deterministic_bytes(self, tmp_path):
        p1, p2 = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
        save_checkpoint(p1, self.params(), meta={"k": 1})
        save_checkpoint(p2, self.params(), meta={"k": 1})
        assert p1.read_bytes() == p2.read_bytes()
