import numpy as np
import pytest

from lookahead_dialogue.checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from lookahead_dialogue.corpus import Vocabulary
from lookahead_dialogue.model import ModelConfig, init_params


def _toy(vocab_words=("table", "bar", "yes", "no"), seed=3, **kw):
    vocab = Vocabulary(list(vocab_words), min_count=1)
    cfg = ModelConfig(vocab_size=len(vocab), goal_dim=3, d_embed=4, d_goal=4, d_hidden=5, lookahead_k=2, **kw)
    params = init_params(cfg, seed=seed)
    return params, cfg, vocab


def test_roundtrip_bit_exact(tmp_path):
    params, cfg, vocab = _toy()
    path = tmp_path / "model.ckpt"
    save_checkpoint(params, cfg, vocab, path)
    loaded, cfg2, vocab2 = load_checkpoint(path)
    assert cfg2 == cfg
    assert vocab2.to_dict() == vocab.to_dict()
    for n, t in params.named().items():
        got = loaded.named()[n]
        assert t.data.shape == got.data.shape
        assert (t.data == got.data).all()


def test_save_load_save_byte_identical(tmp_path):
    params, cfg, vocab = _toy(seed=9)
    p1, p2 = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
    save_checkpoint(params, cfg, vocab, p1)
    loaded, cfg2, vocab2 = load_checkpoint(p1)
    save_checkpoint(loaded, cfg2, vocab2, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_truncated_file_rejected(tmp_path):
    params, cfg, vocab = _toy()
    path = tmp_path / "model.ckpt"
    save_checkpoint(params, cfg, vocab, path)
    blob = path.read_bytes()
    path.write_bytes(blob[: len(blob) - 16])
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_garbage_and_bad_magic_rejected(tmp_path):
    path = tmp_path / "junk.ckpt"
    path.write_bytes(b"definitely not a checkpoint")
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_version_mismatch_rejected(tmp_path):
    import json
    import struct

    from lookahead_dialogue import checkpoint as CK

    params, cfg, vocab = _toy()
    path = tmp_path / "model.ckpt"
    save_checkpoint(params, cfg, vocab, path)
    blob = path.read_bytes()
    hlen = struct.unpack("<Q", blob[8:16])[0]
    header = json.loads(blob[16 : 16 + hlen])
    header["version"] = 99
    new_header = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    path.write_bytes(CK.MAGIC + struct.pack("<Q", len(new_header)) + new_header + blob[16 + hlen :])
    with pytest.raises(CheckpointError, match="version"):
        load_checkpoint(path)


def test_cross_config_vocab_mismatch_rejected(tmp_path):
    import json
    import struct

    from lookahead_dialogue import checkpoint as CK

    params, cfg, vocab = _toy()
    path = tmp_path / "model.ckpt"
    save_checkpoint(params, cfg, vocab, path)
    blob = path.read_bytes()
    hlen = struct.unpack("<Q", blob[8:16])[0]
    header = json.loads(blob[16 : 16 + hlen])
    header["config"]["vocab_size"] = 99
    new_header = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    path.write_bytes(CK.MAGIC + struct.pack("<Q", len(new_header)) + new_header + blob[16 + hlen :])
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_f32_precision_load(tmp_path):
    params, cfg, vocab = _toy(seed=21)
    path = tmp_path / "model.ckpt"
    save_checkpoint(params, cfg, vocab, path)
    loaded, _, _ = load_checkpoint(path, precision="f32")
    emb64 = params.named()["embedding"].data
    emb32 = loaded.named()["embedding"].data
    assert emb32.dtype == np.float64
    np.testing.assert_array_equal(emb32, emb64.astype(np.float32).astype(np.float64))
