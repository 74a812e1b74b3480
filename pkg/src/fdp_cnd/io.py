"""Artifact serialisation: every output carries its seed, config and version."""

from __future__ import annotations

import csv
import io
import json
import pathlib
from typing import Any, Optional, Sequence

from fdp_cnd import __version__
from fdp_cnd.verify import _clean


def header(seed: Optional[int], config: dict) -> dict:
  return {"seed": seed, "config": _clean(config), "version": __version__}


def to_json(payload: dict, seed: Optional[int], config: dict) -> str:
  doc = header(seed, config)
  doc.update(_clean(payload))
  return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def to_csv(columns: Sequence[str], rows, seed: Optional[int],
           config: dict) -> str:
  """CSV with a one-line ``#`` comment holding the JSON header."""
  buf = io.StringIO()
  buf.write("# " + json.dumps(header(seed, config), sort_keys=True) + "\n")
  writer = csv.writer(buf, lineterminator="\n")
  writer.writerow(columns)
  for row in rows:
    writer.writerow([_fmt(v) for v in row])
  return buf.getvalue()


def _fmt(value: Any) -> str:
  try:
    return repr(float(value))
  except (TypeError, ValueError):
    return str(value)


def read_csv(text: str) -> tuple[dict, list[str], list[list[float]]]:
  """Parses :func:`to_csv` output back into ``(header, columns, rows)``."""
  lines = text.splitlines()
  meta = json.loads(lines[0][2:]) if lines and lines[0].startswith("# ") else {}
  body = lines[1:] if meta else lines
  reader = csv.reader(body)
  columns = next(reader)
  return meta, columns, [[float(v) for v in row] for row in reader]


def emit(text: str, output_dir: Optional[str], filename: str) -> Optional[str]:
  """Writes ``text`` to ``output_dir/filename``, or returns it for stdout."""
  if output_dir is None:
    return text
  path = pathlib.Path(output_dir)
  path.mkdir(parents=True, exist_ok=True)
  (path / filename).write_text(text)
  return None
