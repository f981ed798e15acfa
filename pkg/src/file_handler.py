"""
File handling utilities for the rtkit reproduction number toolkit
"""

import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from .logger_config import get_logger
from .series import check_daily, iso_dates, to_timestamp

Metadata = Sequence[Tuple[str, str]]

class FileHandler:
    """Read feed files and write plot-ready tables"""
    
    SUPPORTED_FORMATS = ['csv', 'json']
    
    def __init__(self):
        self.logger = get_logger('file_handler')
    
    def read_csv(self, file_path: Union[str, Path], **kwargs) -> pd.DataFrame:
        """
        Read a CSV file, trying the encodings feeds are commonly published in
        
        Args:
            file_path: Path to the CSV file
            **kwargs: Passed through to pandas.read_csv
            
        Returns:
            pandas DataFrame
            
        Raises:
            FileNotFoundError: If the file does not exist
            ValueError: If no supported encoding decodes the file
        """
        path = Path(file_path)
        if not path.exists():
            raise FileNotFoundError(f"File not found: {file_path}")
        
        for encoding in ['utf-8', 'latin-1', 'cp1252']:
            try:
                return pd.read_csv(path, encoding=encoding, **kwargs)
            except UnicodeDecodeError:
                continue
        raise ValueError(f"Could not decode {file_path} with any supported encoding")
    
    def render_table(self, df: pd.DataFrame, metadata: Metadata = (), file_format: str = 'csv') -> bytes:
        """
        Render a table with its metadata block
        
        CSV output puts '#'-prefixed ``key: value`` lines above the header row.
        JSON output is a single object with a ``meta`` mapping and a ``columns``
        mapping of parallel arrays keyed by column name.
        
        Args:
            df: Table to render (the index is not written)
            metadata: Ordered (key, value) pairs
            file_format: 'csv' or 'json'
            
        Returns:
            Encoded file content
        """
        file_format = file_format.lower()
        if file_format == 'csv':
            header = "".join(f"# {key}: {value}\n" for key, value in metadata)
            body = df.to_csv(index=False, lineterminator='\n')
            return (header + body).encode('utf-8')
        
        elif file_format == 'json':
            columns = {}
            for column in df.columns:
                columns[str(column)] = [_json_value(v) for v in df[column].tolist()]
            document = {'meta': {key: value for key, value in metadata}, 'columns': columns}
            return (json.dumps(document, indent=2, allow_nan=False) + "\n").encode('utf-8')
        
        else:
            raise ValueError(f"Unsupported export format: {file_format}")
    
    def export_table(self, df: pd.DataFrame, file_path: Union[str, Path],
                     metadata: Metadata = (), file_format: str = 'csv') -> str:
        """Render a table and write it atomically; returns the path written"""
        content = self.render_table(df, metadata, file_format)
        self.atomic_write(file_path, content)
        self.logger.debug(f"Wrote {len(df)} rows to {file_path}")
        return str(file_path)
    
    def read_table(self, file_path: Union[str, Path]) -> Tuple[Dict[str, str], pd.DataFrame]:
        """
        Read a table written by export_table
        
        Args:
            file_path: Path to a .csv or .json output file
            
        Returns:
            Tuple of (metadata, DataFrame)
        """
        path = Path(file_path)
        text = path.read_text(encoding='utf-8')
        
        if path.suffix.lower() == '.json':
            document = json.loads(text)
            return dict(document.get('meta', {})), pd.DataFrame(document.get('columns', {}))
        
        metadata: Dict[str, str] = {}
        lines = text.split('\n')
        body_start = 0
        for number, line in enumerate(lines):
            if not line.startswith('#'):
                body_start = number
                break
            key, _, value = line[1:].strip().partition(':')
            metadata[key.strip()] = value.strip()
        body = '\n'.join(lines[body_start:])
        df = pd.read_csv(io.StringIO(body), float_precision='round_trip')
        return metadata, df
    
    def write_series(self, series: pd.Series, file_path: Union[str, Path],
                     metadata: Metadata = (), file_format: str = 'csv') -> str:
        """Write a DatedSeries as a (date, value) table"""
        df = pd.DataFrame({'date': iso_dates(series.index), 'value': series.to_numpy(dtype=float)})
        return self.export_table(df, file_path, metadata, file_format)
    
    def read_series(self, file_path: Union[str, Path], name: Optional[str] = None) -> pd.Series:
        """Read a DatedSeries written by write_series"""
        _, df = self.read_table(file_path)
        index = pd.DatetimeIndex([to_timestamp(d) for d in df['date']])
        series = pd.Series(df['value'].to_numpy(dtype=float), index=index, name=name)
        check_daily(series, str(file_path))
        return series
    
    @staticmethod
    def atomic_write(file_path: Union[str, Path], content: bytes):
        """Write via a temporary file in the same directory, then rename over the target"""
        path = Path(file_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, temp_path = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
        try:
            with os.fdopen(fd, 'wb') as f:
                f.write(content)
            os.replace(temp_path, path)
        except BaseException:
            if os.path.exists(temp_path):
                os.unlink(temp_path)
            raise

def _json_value(value):
    if isinstance(value, float) and math.isnan(value):
        return None
    if value is pd.NA or value is pd.NaT:
        return None
    return value
