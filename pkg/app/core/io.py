import hashlib
import json
import os
import re
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import pandas as pd

from app.core.errors import EmptyObservationsError, MalformedRecordError

FLOAT_FORMAT = "%.9g"


@contextmanager
def atomic_write(path: str | Path, mode: str = "w"):
    """Пишет во временный файл рядом с целевым и переименовывает его только после успешной записи."""
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)

    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
    try:
        encoding = None if "b" in mode else "utf-8"
        newline = None if "b" in mode else ""
        with os.fdopen(fd, mode, encoding=encoding, newline=newline) as f:
            yield f
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def write_json(path: str | Path, payload: Any):
    with atomic_write(path) as f:
        json.dump(payload, f, indent=2, sort_keys=False)
        f.write("\n")


def file_digest(path: str | Path) -> str:
    sha = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            sha.update(chunk)
    return sha.hexdigest()


def fmt(value: float) -> str:
    return FLOAT_FORMAT % value


def read_csv_table(path: str | Path, header_lines: int = 0, **kwargs) -> pd.DataFrame:
    """
    pd.read_csv всех колонок как строк. Ошибки разбора pandas превращаются
    в ошибки проекта; номер строки считается по строкам данных, начиная с 1.
    """
    try:
        return pd.read_csv(path, encoding="utf-8", dtype=str, keep_default_na=False, **kwargs)
    except pd.errors.EmptyDataError:
        raise EmptyObservationsError(f"{path} is empty") from None
    except pd.errors.ParserError as exc:
        found = re.search(r"line (\d+)", str(exc))
        row = int(found.group(1)) - header_lines if found else None
        raise MalformedRecordError(f"{Path(path).name}: wrong number of fields", row=row) from None
