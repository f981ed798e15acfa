"""
Logging configuration for the rtkit reproduction number toolkit
"""

import logging
import os
import threading
from datetime import datetime
from typing import Dict, List, Optional

from .config import Config

def setup_logging(log_level: str = None, log_file: str = None) -> logging.Logger:
    """
    Set up logging configuration for the application
    
    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Optional log file path; an empty string disables the file handler
    
    Returns:
        Configured logger instance
    """
    if log_level is None:
        log_level = Config.LOG_LEVEL
    
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    
    if log_file is None:
        Config.ensure_directories()
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        log_file = os.path.join(Config.LOG_DIR, f"rtkit_{timestamp}.log")
    if log_file:
        handlers.insert(0, logging.FileHandler(log_file, encoding='utf-8'))
    
    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format=Config.LOG_FORMAT,
        handlers=handlers,
        force=True
    )
    
    logger = logging.getLogger('rtkit')
    logger.debug(f"Logging initialized (level={log_level}, file={log_file or 'none'})")
    
    return logger

def get_logger(name: str) -> logging.Logger:
    """Get a logger with the specified name"""
    return logging.getLogger(f'rtkit.{name}')

class RunLogger:
    """Logger for a pipeline run that keeps the per-country diagnostics it emits"""
    
    def __init__(self, base_logger: logging.Logger):
        self.logger = base_logger
        self.log_entries: List[str] = []
        self.error_count = 0
        self.warning_count = 0
        self._lock = threading.Lock()
    
    def _record(self, level: str, message: str):
        with self._lock:
            self.log_entries.append(f"{level}: {message}")
            if level == "ERROR":
                self.error_count += 1
            elif level == "WARNING":
                self.warning_count += 1
        
    def info(self, message: str):
        """Log info message"""
        self.logger.info(message)
        self._record("INFO", message)
        
    def warning(self, message: str):
        """Log warning message"""
        self.logger.warning(message)
        self._record("WARNING", message)
        
    def error(self, message: str):
        """Log error message"""
        self.logger.error(message)
        self._record("ERROR", message)
        
    def debug(self, message: str):
        self.logger.debug(message)
        
    def merge(self, other: "RunLogger"):
        """Append another run logger's entries and counters without re-emitting them"""
        with self._lock:
            self.log_entries.extend(other.log_entries)
            self.error_count += other.error_count
            self.warning_count += other.warning_count

    def get_stats(self) -> Dict[str, int]:
        """Get logging statistics"""
        return {
            'total_entries': len(self.log_entries),
            'errors': self.error_count,
            'warnings': self.warning_count
        }
        
    def save_log_file(self, file_path: str, header: Optional[List[str]] = None) -> Optional[str]:
        """
        Save all log entries to a file
        
        The file carries no wall-clock timestamps so identical runs produce
        identical logs.
        
        Args:
            file_path: Destination path
            header: Optional metadata lines written above the entries
        
        Returns:
            The path written, or None on failure
        """
        try:
            with open(file_path, 'w', encoding='utf-8', newline='\n') as f:
                f.write("rtkit - Run Log\n")
                f.write("=" * 60 + "\n")
                for line in header or []:
                    f.write(f"{line}\n")
                f.write(f"Total Entries: {len(self.log_entries)}\n")
                f.write(f"Errors: {self.error_count}\n")
                f.write(f"Warnings: {self.warning_count}\n")
                f.write("=" * 60 + "\n\n")
                
                for entry in self.log_entries:
                    f.write(f"{entry}\n")
                    
            return file_path
        except OSError as e:
            self.logger.error(f"Failed to save log file: {str(e)}")
            return None
