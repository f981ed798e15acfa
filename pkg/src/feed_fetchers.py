"""
Feed downloaders for the rtkit reproduction number toolkit
"""

import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import PurePosixPath
from typing import Any, Dict, List, Optional
from urllib.parse import urlparse

import requests

from .config import Config
from .exceptions import FetchError
from .logger_config import get_logger
from .snapshot_manager import SnapshotManager
from .utils import RetryHelper

@dataclass
class FetchReport:
    """Stored entries and per-file failures from one feed"""
    
    feed: str
    entries: List[Dict[str, Any]] = field(default_factory=list)
    failures: List[Dict[str, Any]] = field(default_factory=list)
    
    @property
    def ok(self) -> bool:
        return not self.failures

class FeedFetcherBase(ABC):
    """Base class for feed downloaders"""
    
    def __init__(self, feed: str, urls: Optional[Dict[str, str]] = None,
                 timeout: int = Config.DEFAULT_TIMEOUT,
                 retry_attempts: int = Config.DEFAULT_RETRY_ATTEMPTS,
                 retry_delay: float = 1.0):
        self.feed = feed
        self.urls = dict(urls if urls is not None else Config.get_feed_urls(feed)[feed])
        self.timeout = timeout
        self.retry_attempts = retry_attempts
        self.retry_delay = retry_delay
        self.logger = get_logger(f'fetcher_{feed}')
    
    @abstractmethod
    def validate(self, role: str, content: bytes):
        """Raise FetchError unless the payload looks like this feed's layout"""
        pass
    
    def _header(self, content: bytes) -> str:
        return content.split(b'\n', 1)[0].decode('utf-8-sig', errors='replace').strip()
    
    def download(self, role: str, url: str) -> bytes:
        """Download one file, retrying transient failures with exponential backoff"""
        attempt = 0
        while True:
            try:
                self.logger.debug(f"GET {url} (attempt {attempt + 1})")
                response = requests.get(url, timeout=self.timeout)
                response.raise_for_status()
                return response.content
            except requests.exceptions.RequestException as e:
                if not RetryHelper.should_retry(e, attempt, self.retry_attempts):
                    raise FetchError(f"{self.feed}/{role}: {e}") from e
                delay = RetryHelper.exponential_backoff(attempt, self.retry_delay)
                self.logger.warning(f"{self.feed}/{role}: {e}; retrying in {delay:.1f}s")
                time.sleep(delay)
                attempt += 1
    
    def fetch(self, manager: SnapshotManager, snapshot_date: str) -> FetchReport:
        """Download every file of the feed into the snapshot; failures are collected, not raised"""
        report = FetchReport(feed=self.feed)
        for role, url in self.urls.items():
            try:
                content = self.download(role, url)
                self.validate(role, content)
            except FetchError as e:
                self.logger.error(str(e))
                report.failures.append({'role': role, 'feed': self.feed, 'url': url, 'error': str(e)})
                continue
            filename = PurePosixPath(urlparse(url).path).name or f"{role}.csv"
            report.entries.append(manager.store_file(self.feed, role, snapshot_date, filename, content))
        return report

class CsseFetcher(FeedFetcherBase):
    """CSSE global time series and UID lookup table"""
    
    TIME_SERIES_HEADER = "Province/State,Country/Region,Lat,Long"
    
    def __init__(self, **kwargs):
        super().__init__('csse', **kwargs)
    
    def validate(self, role: str, content: bytes):
        header = self._header(content)
        if role == 'population':
            if 'Population' not in header.split(','):
                raise FetchError(f"csse/population: no Population column in header {header[:80]!r}")
        elif not header.startswith(self.TIME_SERIES_HEADER):
            raise FetchError(f"csse/{role}: unexpected header {header[:80]!r}")

class MobilityFetcher(FeedFetcherBase):
    """Apple mobility trends"""
    
    HEADER = "geo_type,region,transportation_type"
    
    def __init__(self, **kwargs):
        super().__init__('mobility', **kwargs)
    
    def validate(self, role: str, content: bytes):
        header = self._header(content)
        if not header.startswith(self.HEADER):
            raise FetchError(f"mobility/{role}: unexpected header {header[:80]!r}")

class FeedFetcherFactory:
    """Factory class to create feed fetchers"""
    
    _fetchers = {
        'csse': CsseFetcher,
        'mobility': MobilityFetcher,
    }
    
    @classmethod
    def create_fetcher(cls, feed: str, **kwargs) -> FeedFetcherBase:
        if not cls.is_supported(feed):
            raise ValueError(f"Unsupported feed: {feed}")
        return cls._fetchers[feed](**kwargs)
    
    @classmethod
    def get_supported_feeds(cls) -> List[str]:
        return list(cls._fetchers.keys())
    
    @classmethod
    def is_supported(cls, feed: str) -> bool:
        return feed in cls._fetchers
