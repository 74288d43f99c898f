"""Throwaway git repositories for pipeline tests."""
import os
import subprocess
from pathlib import Path

ENV = {
    "GIT_AUTHOR_NAME": "t", "GIT_AUTHOR_EMAIL": "t@example.com",
    "GIT_COMMITTER_NAME": "t", "GIT_COMMITTER_EMAIL": "t@example.com",
    "GIT_CONFIG_GLOBAL": os.devnull, "GIT_CONFIG_NOSYSTEM": "1",
}


def git(repo: Path, *args: str) -> str:
    env = {**os.environ, **ENV}
    return subprocess.run(["git", "-C", str(repo), *args], env=env, check=True, capture_output=True, text=True).stdout


def init_repo(repo: Path) -> Path:
    repo.mkdir(parents=True, exist_ok=True)
    git(repo, "init", "-q", "-b", "main")
    return repo


def commit(repo: Path, message: str, files: dict[str, "str | bytes | None"], when: int = 1_700_000_000) -> str:
    """Write (or delete, for None) the given files and commit them at a fixed time."""
    for name, content in files.items():
        path = repo / name
        if content is None:
            git(repo, "rm", "-q", name)
            continue
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(content if isinstance(content, bytes) else content.encode())
        git(repo, "add", name)
    stamp = f"{when} +0000"
    env = {**os.environ, **ENV, "GIT_AUTHOR_DATE": stamp, "GIT_COMMITTER_DATE": stamp}
    subprocess.run(["git", "-C", str(repo), "commit", "-q", "-m", message], env=env, check=True)
    return git(repo, "rev-parse", "HEAD").strip()


def fixture_text(pair: str, side: str) -> str:
    d = Path(__file__).resolve().parents[1] / "fixtures" / "pairs" / pair
    (f,) = d.glob(f"*_{side}.java")
    return f.read_text()


def three_commit_repo(repo: Path) -> list[str]:
    """Guard added, guard moved, assignment guarded: one pattern hit per commit."""
    init_repo(repo)
    return [
        commit(repo, "add dot product", {"Dot.java": fixture_text("dot_add_if_return", "s"),
                                          "Clamp.java": fixture_text("add_if_assig", "s")}, 1_700_000_000),
        commit(repo, "fix: short vectors", {"Dot.java": fixture_text("dot_add_if_return", "t")}, 1_700_000_100),
        commit(repo, "fix clamp", {"Clamp.java": fixture_text("add_if_assig", "t"),
                                   "README.txt": "notes\n"}, 1_700_000_200),
    ]
