"""Fixed-format CSV helpers so that repeated runs are byte-identical."""
from __future__ import annotations

import io


def fmt(value):
    """17 significant digits, scientific notation, no negative zero."""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, int)) and not isinstance(value, bool):
        return str(value)
    return f"{float(value) + 0.0:.16e}"


def write_rows(header, rows, comments=()):
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def read_rows(text):
    """Return (comments, header, rows-as-strings) from text written by :func:`write_rows`."""
    comments, header, rows = [], None, []
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            comments.append(line[1:].strip())
        elif header is None:
            header = [h.strip() for h in line.split(",")]
        else:
            rows.append([c.strip() for c in line.split(",")])
    return comments, header, rows
