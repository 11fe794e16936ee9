"""Append-only results store: one orjson `.rec` file per record under `<root>/records/`."""

import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Union

import orjson
from pydantic import BaseModel

from utils.errors import RecordError

logger = logging.getLogger(__name__)

_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY


class ResultsStore:
    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        self.records_dir = self.root / "records"

    def _path(self, name: str) -> Path:
        if not name or "/" in name or name.startswith("."):
            raise RecordError(f"invalid record name {name!r}")
        return self.records_dir / f"{name}.rec"

    def write(self, name: str, record: Union[BaseModel, Dict[str, Any]]) -> Path:
        payload = record.model_dump(mode="json") if isinstance(record, BaseModel) else record
        data = orjson.dumps(payload, option=_OPTIONS)
        self.records_dir.mkdir(parents=True, exist_ok=True)
        path = self._path(name)
        try:
            with open(path, "xb") as f:
                f.write(data)
                f.flush()
                os.fsync(f.fileno())
        except FileExistsError:
            raise RecordError(f"record {name} already exists in {self.records_dir}") from None
        logger.debug(f"Wrote record {path}")
        return path

    def read(self, name: str) -> Dict[str, Any]:
        path = self._path(name)
        try:
            return orjson.loads(path.read_bytes())
        except FileNotFoundError:
            raise RecordError(f"no record {name} in {self.records_dir}") from None
        except orjson.JSONDecodeError as exc:
            raise RecordError(f"record {name} is corrupt: {exc}") from exc

    def names(self) -> List[str]:
        if not self.records_dir.is_dir():
            return []
        return sorted(p.stem for p in self.records_dir.glob("*.rec"))

    def load_all(self) -> List[Dict[str, Any]]:
        return [self.read(name) for name in self.names()]
