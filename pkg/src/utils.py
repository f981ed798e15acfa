"""
Utility functions for the rtkit reproduction number toolkit
"""

import hashlib
import re
from datetime import date, datetime
from typing import Union

from dateutil import parser as date_parser

class RetryHelper:
    """Utility class for implementing retry logic"""
    
    @staticmethod
    def exponential_backoff(attempt: int, base_delay: float = 1.0, max_delay: float = 60.0) -> float:
        """
        Calculate exponential backoff delay
        
        Args:
            attempt: Current attempt number (starting from 0)
            base_delay: Base delay in seconds
            max_delay: Maximum delay in seconds
            
        Returns:
            Delay in seconds
        """
        delay = base_delay * (2 ** attempt)
        return min(delay, max_delay)
    
    @staticmethod
    def should_retry(exception: Exception, attempt: int, max_attempts: int) -> bool:
        """
        Determine if an operation should be retried
        
        Args:
            exception: The exception that occurred
            attempt: Current attempt number (starting from 0)
            max_attempts: Maximum number of attempts
            
        Returns:
            True if should retry, False otherwise
        """
        if attempt + 1 >= max_attempts:
            return False
        
        # Programming errors never heal on retry
        if isinstance(exception, (ValueError, TypeError, KeyError)):
            return False
        
        status = getattr(getattr(exception, 'response', None), 'status_code', None)
        if status is not None and 400 <= status < 500 and status != 429:
            return False
        
        return True

def format_duration(seconds: float) -> str:
    """
    Format duration in seconds to human-readable string
    
    Args:
        seconds: Duration in seconds
        
    Returns:
        Formatted duration string
    """
    if seconds < 60:
        return f"{int(seconds)} seconds"
    elif seconds < 3600:
        minutes = int(seconds // 60)
        remaining_seconds = int(seconds % 60)
        return f"{minutes}m {remaining_seconds}s"
    else:
        hours = int(seconds // 3600)
        remaining_minutes = int((seconds % 3600) // 60)
        return f"{hours}h {remaining_minutes}m"

def country_slug(country: str) -> str:
    """
    Turn a country name into a file-name-safe slug
    
    Args:
        country: Country name as spelled in the feed (e.g. "Korea, South")
        
    Returns:
        Lower-case slug (e.g. "korea_south")
    """
    slug = re.sub(r'[^0-9a-zA-Z]+', '_', country).strip('_').lower()
    
    if not slug:
        slug = "unnamed_country"
    
    return slug

def parse_iso_date(value: Union[str, date, datetime, None]) -> Union[date, None]:
    """Parse an ISO-8601 date string (or pass through a date)"""
    if value is None or value == "":
        return None
    if isinstance(value, datetime):
        return value.date()
    if isinstance(value, date):
        return value
    return date_parser.isoparse(str(value).strip()).date()

def sha256_file(file_path: str, chunk_size: int = 1 << 16) -> str:
    """Hex SHA-256 digest of a file"""
    digest = hashlib.sha256()
    with open(file_path, 'rb') as f:
        for chunk in iter(lambda: f.read(chunk_size), b''):
            digest.update(chunk)
    return digest.hexdigest()
