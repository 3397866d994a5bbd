"""Provenance of the toolchain itself, read from the git checkout it runs from."""
from typing import Dict

import git


def _find_repo() -> git.Repo:
    try:
        return git.Repo(__file__, search_parent_directories=True)
    except (git.InvalidGitRepositoryError, git.NoSuchPathError):
        return None


def get_git_commit_hash() -> str:
    """Get the commit hash of the checkout this code runs from.

    Returns
    -------
    str:
        Commit hash, "unknown" outside a git repository, suffixed with
        " (dirty)" when there are uncommitted changes.
    """
    repo = _find_repo()
    if repo is None:
        return 'unknown'
    try:
        commit_hash = str(repo.head.commit)
    except ValueError:
        # repository without any commit yet
        return 'unknown'
    if repo.is_dirty():
        commit_hash += ' (dirty)'
    return commit_hash


def normalize_remote(remote: str) -> str:
    """Turn ssh remotes into https form and drop the trailing .git."""
    if remote.startswith('git@'):
        remote = remote.replace(':', '/').replace('git@', 'https://')
    if remote.endswith('.git'):
        remote = remote[:-4]
    return remote


def get_git_remote_url() -> str:
    """Get the first remote URL of the checkout, or "unknown"."""
    repo = _find_repo()
    if repo is None or len(repo.remotes) == 0:
        return 'unknown'
    return normalize_remote(repo.remotes[0].url)


def software_provenance() -> Dict[str, str]:
    return {
        'software_remote': get_git_remote_url(),
        'software_commit': get_git_commit_hash(),
    }
