import json
from pathlib import Path

import numpy as np
import pytest

from gardener.tensor_store import checkpoint_from_arrays, record_from_array, Checkpoint

FIXTURES = Path(__file__).parent / "fixtures"

# ViT-Base block: qkv, proj, two LayerNorms, two MLP linears (7,087,872 scalars)
VIT_B_BLOCK = {
    "norm1.weight": (768,),
    "norm1.bias": (768,),
    "attn.qkv.weight": (2304, 768),
    "attn.qkv.bias": (2304,),
    "attn.proj.weight": (768, 768),
    "attn.proj.bias": (768,),
    "norm2.weight": (768,),
    "norm2.bias": (768,),
    "mlp.fc1.weight": (3072, 768),
    "mlp.fc1.bias": (3072,),
    "mlp.fc2.weight": (768, 3072),
    "mlp.fc2.bias": (768,),
}

# residual tensors sized so that 12 ViT-B blocks + residual = 86,600,000 scalars
VIT_B_RESIDUAL = {
    "patch_embed.proj.weight": (768, 3, 2, 16, 16),
    "patch_embed.proj.bias": (768,),
    "fc_norm.weight": (768,),
    "fc_norm.bias": (768,),
    "head.weight": (101, 768),
    "head.bias": (101,),
    "extra.buffer": (285915,),
}


def scaled_shapes(shapes, divisor):
    """Shrink every dimension-0 by ``divisor`` (at least 1) for miniature fixtures."""
    return {k: (max(1, s[0] // divisor),) + tuple(s[1:]) for k, s in shapes.items()}


def make_block_checkpoint(n_blocks=12, block_shapes=None, residual_shapes=None, dtype="F32", seed=0,
                          block_scales=None, prefix="blocks"):
    rng = np.random.default_rng(seed)
    block_shapes = block_shapes or {"attn.w": (8, 8), "mlp.w": (16, 4)}
    residual_shapes = {"head.w": (4, 4)} if residual_shapes is None else residual_shapes
    records = []
    for name, shape in residual_shapes.items():
        if name.startswith("patch"):
            records.append(record_from_array(name, rng.standard_normal(shape, dtype=np.float32) * 0.02, dtype))
    for b in range(n_blocks):
        scale = 0.02 if block_scales is None else block_scales[b]
        for name, shape in block_shapes.items():
            arr = rng.standard_normal(shape, dtype=np.float32) * np.float32(scale)
            records.append(record_from_array(f"{prefix}.{b}.{name}", arr, dtype))
    for name, shape in residual_shapes.items():
        if not name.startswith("patch"):
            records.append(record_from_array(name, rng.standard_normal(shape, dtype=np.float32) * 0.02, dtype))
    return Checkpoint.from_records(records)


def spread_block(n, spread, rng=None):
    """``n`` values in [-1, 1]: a fraction ``spread`` evenly spaced, the rest exactly 0.

    Weight-number entropy rises monotonically with ``spread``.
    """
    k = max(2, int(round(n * spread)))
    vals = np.zeros(n)
    vals[:k] = np.linspace(-1.0, 1.0, k)
    if rng is not None:
        rng.shuffle(vals)
    return vals


def entropy_ordered_checkpoint(entropy_ranks, n_per_block=4096, dtype="F64"):
    """Blocks whose entropy ranking equals ``entropy_ranks`` (rank 1 = highest entropy)."""
    L = len(entropy_ranks)
    arrays = {"patch_embed.w": np.linspace(-1, 1, 32)}
    for b, r in enumerate(entropy_ranks):
        spread = 0.05 + 0.9 * (L - r) / (L - 1)
        v = spread_block(n_per_block, spread, np.random.default_rng(b))
        arrays[f"blocks.{b}.attn.w"] = v[: n_per_block // 2].reshape(-1, 8)
        arrays[f"blocks.{b}.mlp.w"] = v[n_per_block // 2:]
    arrays["head.w"] = np.linspace(-1, 1, 16)
    return checkpoint_from_arrays(arrays, dtype)


@pytest.fixture(scope="session")
def reference():
    return json.loads((FIXTURES / "videomae_reference.json").read_text())


@pytest.fixture(scope="session")
def single_block_csv():
    return FIXTURES / "single_block_war.csv"


@pytest.fixture(scope="session")
def measured_csv():
    return FIXTURES / "multi_block_war.csv"


@pytest.fixture
def small_ckpt():
    return make_block_checkpoint()


# --- acceptance gate summary -------------------------------------------------

_GATE = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if "test_acceptance.py" not in item.nodeid:
        return
    doc = (getattr(item.function, "__doc__", None) or item.name).strip().splitlines()[0]
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[rep.outcome]
        _GATE.append(f"[{status}] {doc} ({rep.duration:.2f}s)")


def pytest_terminal_summary(terminalreporter):
    if _GATE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in _GATE:
            terminalreporter.write_line(line)
