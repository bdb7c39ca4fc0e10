from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Optional

logger = logging.getLogger(__name__)


class Configuration(ABC):
    """
    Abstract interface for anything that has a name and can be parsed from a (JSON) file

    Configurations without a file are built from defaults only; `_parse` is still called so that subclasses can
    initialize their state in one place.
    """

    _name: str
    _file_path: Optional[Path]

    def __init__(self, name: str, file_path: Optional[Path] = None) -> None:
        self._name = name
        self._file_path = Path(file_path) if file_path is not None else None
        self._parse()

    @abstractmethod
    def _parse(self) -> None:
        raise NotImplementedError()

    @property
    def name(self) -> str:
        return self._name

    @property
    def file_path(self) -> Optional[Path]:
        return self._file_path

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self._name!r}, {self._file_path!r})"
