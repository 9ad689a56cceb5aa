"""`.sg.json` semigroup files and a small on-disk catalog."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict
from pathlib import Path

from .errors import FormatError, NotAssociative, SgxError
from .semigroup import FiniteSemigroup, nilpotency_profile

INDEX_NAME = "index.json"


def dumps_semigroup(S: FiniteSemigroup) -> str:
    # one row per line keeps goldens diff-able; key order is fixed
    rows = ",\n    ".join(json.dumps(list(r)) for r in S.rows)
    return (
        "{\n"
        f'  "name": {json.dumps(S.name, ensure_ascii=False)},\n'
        f'  "elements": {json.dumps(list(S.labels), ensure_ascii=False)},\n'
        f'  "table": [\n    {rows}\n  ]\n'
        "}\n"
    )


def dump_semigroup(S: FiniteSemigroup, path) -> Path:
    path = Path(path)
    path.write_text(dumps_semigroup(S), encoding="utf-8")
    return path


def loads_semigroup(text: str, source: str = "<string>") -> FiniteSemigroup:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{source}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict) or not {"elements", "table"} <= data.keys():
        raise FormatError(f"{source}: need keys 'elements' and 'table'")
    labels, table = data["elements"], data["table"]
    if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
        raise FormatError(f"{source}: 'elements' must be a list of strings")
    n = len(labels)
    if not isinstance(table, list) or len(table) != n or any(not isinstance(r, list) or len(r) != n for r in table):
        raise FormatError(f"{source}: 'table' must be {n}x{n}")
    if any(not isinstance(v, int) or isinstance(v, bool) or not 0 <= v < n for r in table for v in r):
        raise FormatError(f"{source}: table entries must be element indices below {n}")
    try:
        return FiniteSemigroup(labels, table, data.get("name", Path(source).stem))
    except NotAssociative:
        raise
    except SgxError as exc:
        raise FormatError(f"{source}: {exc}") from exc


def load_semigroup(path) -> FiniteSemigroup:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from exc
    return loads_semigroup(text, str(path))


def checksum(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class Catalog:
    """A directory of `.sg.json` files with an index of name, path, order, profile and checksum."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.index_path = self.directory / INDEX_NAME

    def index(self) -> dict:
        if not self.index_path.exists():
            return {}
        try:
            return json.loads(self.index_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise FormatError(f"{self.index_path}: invalid JSON ({exc})") from exc

    def _write_index(self, index: dict):
        self.index_path.write_text(json.dumps(index, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def add(self, S: FiniteSemigroup, name: str | None = None) -> Path:
        name = name or S.name
        self.directory.mkdir(parents=True, exist_ok=True)
        filename = "".join(c if c.isalnum() or c in "-_." else "_" for c in name) + ".sg.json"
        path = dump_semigroup(S, self.directory / filename)
        profile = nilpotency_profile(S, exclude_identity=S.identity is not None)
        index = self.index()
        index[name] = {"path": filename, "order": S.order, "profile": asdict(profile), "sha256": checksum(path)}
        self._write_index(index)
        return path

    def load(self, name: str) -> FiniteSemigroup:
        entry = self.index().get(name)
        if entry is None:
            raise KeyError(name)
        path = self.directory / entry["path"]
        if checksum(path) != entry["sha256"]:
            raise FormatError(f"{path}: checksum does not match the catalog index")
        return load_semigroup(path)

    def stale(self) -> list[str]:
        """Names whose file is missing or no longer matches its checksum."""
        out = []
        for name, entry in sorted(self.index().items()):
            path = self.directory / entry["path"]
            if not path.exists() or checksum(path) != entry["sha256"]:
                out.append(name)
        return out
