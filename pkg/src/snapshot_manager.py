"""
Raw feed snapshot storage for the rtkit reproduction number toolkit

Files live under ``<data_dir>/raw/<feed>/<ISO-date>/<original filename>``
with one manifest per snapshot date at ``<data_dir>/raw/<ISO-date>.manifest.json``.
"""

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

from .config import Config
from .exceptions import SnapshotIncomplete
from .file_handler import FileHandler
from .logger_config import get_logger
from .utils import parse_iso_date, sha256_file

@dataclass(frozen=True)
class Snapshot:
    """A complete snapshot resolved to local file paths"""
    
    date: str
    files: Dict[str, Path]
    manifest: Dict[str, Any]
    
    def path(self, role: str) -> Path:
        if role not in self.files:
            raise SnapshotIncomplete(f"snapshot {self.date} has no '{role}' file")
        return self.files[role]

class SnapshotManager:
    """Store, list and resolve dated raw-feed snapshots"""
    
    MANIFEST_SUFFIX = ".manifest.json"
    
    def __init__(self, data_dir: Optional[str] = None):
        self.logger = get_logger('snapshot_manager')
        self.data_dir = Path(Config.get_data_dir(data_dir))
        self.raw_dir = self.data_dir / Config.SNAPSHOT_SUBDIR
    
    def snapshot_dir(self, feed: str, snapshot_date: str) -> Path:
        return self.raw_dir / feed / snapshot_date
    
    def manifest_path(self, snapshot_date: str) -> Path:
        return self.raw_dir / f"{snapshot_date}{self.MANIFEST_SUFFIX}"
    
    def store_file(self, feed: str, role: str, snapshot_date: str,
                   filename: str, content: bytes) -> Dict[str, Any]:
        """
        Write one raw file into the snapshot, replacing any earlier copy
        
        Returns:
            Manifest entry for the stored file
        """
        target = self.snapshot_dir(feed, snapshot_date) / filename
        FileHandler.atomic_write(target, content)
        self.logger.info(f"Stored {feed}/{role} ({len(content)} bytes) at {target}")
        return {
            'role': role,
            'feed': feed,
            'path': target.relative_to(self.data_dir).as_posix(),
            'size': target.stat().st_size,
            'sha256': sha256_file(str(target)),
        }
    
    def write_manifest(self, snapshot_date: str, entries: List[Dict[str, Any]],
                       failures: Optional[List[Dict[str, Any]]] = None,
                       retrieved_at: Optional[str] = None) -> Dict[str, Any]:
        """
        Write the manifest for a snapshot date
        
        The snapshot is complete only when nothing failed and every required
        role is present.
        """
        failures = failures or []
        roles = {entry['role'] for entry in entries}
        missing = [role for role in Config.REQUIRED_ROLES if role not in roles]
        manifest = {
            'snapshot': snapshot_date,
            'retrieved_at': retrieved_at or datetime.now(timezone.utc).isoformat(timespec='seconds'),
            'complete': not failures and not missing,
            'files': sorted(entries, key=lambda entry: entry['role']),
            'failures': failures,
            'missing_roles': missing,
        }
        content = json.dumps(manifest, indent=2, sort_keys=True) + '\n'
        FileHandler.atomic_write(self.manifest_path(snapshot_date), content.encode('utf-8'))
        
        if manifest['complete']:
            self.logger.info(f"Snapshot {snapshot_date} complete with {len(entries)} files")
        else:
            self.logger.warning(
                f"Snapshot {snapshot_date} incomplete: {len(failures)} failures, missing {missing}"
            )
        return manifest
    
    def load_manifest(self, snapshot_date: str) -> Dict[str, Any]:
        path = self.manifest_path(snapshot_date)
        if not path.exists():
            raise SnapshotIncomplete(f"no snapshot manifest for {snapshot_date} under {self.raw_dir}")
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    
    def list_snapshots(self) -> List[str]:
        """Snapshot dates with a manifest, oldest first"""
        if not self.raw_dir.exists():
            return []
        dates = []
        for path in self.raw_dir.glob(f"*{self.MANIFEST_SUFFIX}"):
            name = path.name[:-len(self.MANIFEST_SUFFIX)]
            try:
                parse_iso_date(name)
            except ValueError:
                self.logger.debug(f"Ignoring {path.name}: not a dated manifest")
                continue
            dates.append(name)
        return sorted(dates)
    
    def latest_complete(self) -> Optional[str]:
        for snapshot_date in reversed(self.list_snapshots()):
            if self.load_manifest(snapshot_date).get('complete'):
                return snapshot_date
        return None
    
    def resolve(self, snapshot_date: Optional[str] = None) -> Snapshot:
        """
        Resolve a complete snapshot to local paths
        
        Args:
            snapshot_date: ISO date; the latest complete snapshot when omitted
            
        Raises:
            SnapshotIncomplete: if the snapshot is missing, marked incomplete,
                or a file no longer matches its recorded size
        """
        if snapshot_date is None:
            snapshot_date = self.latest_complete()
            if snapshot_date is None:
                raise SnapshotIncomplete(f"no complete snapshot under {self.raw_dir}; run fetch first")
        
        manifest = self.load_manifest(snapshot_date)
        if not manifest.get('complete'):
            raise SnapshotIncomplete(
                f"snapshot {snapshot_date} is marked incomplete "
                f"(failures: {[f.get('role') for f in manifest.get('failures', [])]})"
            )
        
        files = {}
        for entry in manifest['files']:
            path = self.data_dir / entry['path']
            if not path.exists() or path.stat().st_size != entry['size']:
                raise SnapshotIncomplete(f"snapshot {snapshot_date}: {entry['path']} missing or changed")
            files[entry['role']] = path
        
        self.logger.info(f"Using snapshot {snapshot_date}")
        return Snapshot(date=snapshot_date, files=files, manifest=manifest)
