from pathlib import Path

import orjson
import pytest

from capflow.main import main


@pytest.fixture(scope="function")
def run_cli(capsys):
    """Run the command line in-process and return the exit code and stdout."""

    def run(*argv: str) -> tuple[int, str]:
        code = main([str(arg) for arg in argv])
        return code, capsys.readouterr().out

    return run


@pytest.fixture(scope="function")
def segment_file(tmp_path, run_cli) -> Path:
    path = tmp_path / "segment.json"
    code, _ = run_cli("gen", "--kind", "segment", "--n-samples", 8, "-o", path)
    assert code == 0
    return path


def read_json(path: Path) -> dict:
    return orjson.loads(path.read_bytes())
