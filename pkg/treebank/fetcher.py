"""
Corpus Downloader

Fetches released treebanks and embedding files over HTTP into the local
cache directory, so `stats`/`train` can run on them.
"""
import logging
import sys
from pathlib import Path
from urllib.parse import urlparse

import requests

sys.path.insert(0, str(__file__).rsplit("/", 2)[0])
from config import config

from .conllu import read_conllu
from .model import AnnotatedSentence

log = logging.getLogger(__name__)


class FetchError(ValueError):
    """Download failed or produced an unusable file."""


class CorpusFetcher:
    """Downloads corpus and embedding files with one reusable HTTP session."""

    def __init__(self, cache_dir: str | Path = None):
        self.cache_dir = Path(cache_dir or config.CACHE_DIR).expanduser()
        self.session = requests.Session()
        self.session.headers.update({
            "User-Agent": "scudkit/1.0"
        })

    def _get(self, url: str) -> requests.Response:
        """Make a streaming GET request."""
        response = self.session.get(url, stream=True, timeout=60)
        try:
            response.raise_for_status()
        except requests.HTTPError:
            response.close()
            raise
        return response

    def target_path(self, url: str) -> Path:
        """Cache location for a URL: the last path segment under the cache dir."""
        name = Path(urlparse(url).path).name
        if not name:
            raise FetchError(f"cannot derive a file name from {url}")
        return self.cache_dir / name

    def download(self, url: str, dest: str | Path = None, force: bool = False) -> Path:
        """
        Download a file unless it is already cached.

        Args:
            url: Remote file
            dest: Where to store it (defaults to the cache directory)
            force: Re-download even if the file exists

        Returns:
            Path of the local copy
        """
        dest = Path(dest) if dest else self.target_path(url)
        if dest.exists() and not force:
            log.info("using cached %s", dest)
            return dest

        dest.parent.mkdir(parents=True, exist_ok=True)
        partial = dest.with_name(dest.name + ".part")
        try:
            with self._get(url) as response, open(partial, "wb") as f:
                for chunk in response.iter_content(chunk_size=1 << 16):
                    f.write(chunk)
            partial.replace(dest)
        except requests.RequestException as e:
            raise FetchError(f"download of {url} failed: {e}") from None
        finally:
            partial.unlink(missing_ok=True)
        log.info("downloaded %s -> %s", url, dest)
        return dest

    def fetch_corpus(self, url: str, dest: str | Path = None, force: bool = False) -> list[AnnotatedSentence]:
        """Download a CoNLL-U file and parse it; a file that does not parse is removed."""
        path = self.download(url, dest, force)
        try:
            return read_conllu(path)
        except ValueError:
            path.unlink(missing_ok=True)
            raise
