import shutil
import subprocess
import sys
from pathlib import Path

import pytest

DATA_DIR = Path(__file__).parent / "data"
TOY_DIR = DATA_DIR / "toy"
BLEND_DIR = DATA_DIR / "blend"


@pytest.fixture(scope="session")
def toy_dir() -> Path:
    return TOY_DIR


@pytest.fixture(scope="session")
def blend_dir() -> Path:
    return BLEND_DIR


@pytest.fixture
def toy_copy(tmp_path) -> Path:
    """Mutable copy of the toy dataset for tests that break files."""
    dst = tmp_path / "toy"
    shutil.copytree(TOY_DIR, dst)
    return dst


def run_cli(*args: str, env: dict | None = None) -> subprocess.CompletedProcess:
    import os
    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    return subprocess.run(
        [sys.executable, "-m", "padx", *map(str, args)],
        capture_output=True, text=True, env=full_env,
    )


def tree_bytes(root: Path) -> dict[str, bytes]:
    """File-name -> contents map for byte-level tree comparison."""
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*")) if p.is_file()
    }
