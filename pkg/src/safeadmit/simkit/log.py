"""Trajectory log container, CSV round-trip and the safety report."""
import csv
import io
from dataclasses import dataclass, field

import numpy as np


def trajectory_columns(m, n):
    def idx(prefix, count):
        return [f"{prefix}_{i + 1}" for i in range(count)]

    cols = ["t"]
    cols += idx("xi", m) + idx("xidot", m) + idx("xir", m) + idx("xid", m)
    cols += idx("E", 2 * m) + idx("Er", 2 * m) + idx("ea", 2 * m)
    cols += ["p"]
    cols += idx("uc", m) + idx("u", m) + idx("tau", n)
    for p in (1, 2):
        cols += [f"K{p}_{r + 1}_{c + 1}" for r in range(m) for c in range(2 * m)]
    cols += ["V", "phi_max"]
    cols += idx("h", m) + idx("hx", m) + idx("eta", m)
    cols += idx("fext", m) + idx("fhat", m) + ["d"]
    return cols


class SchemaError(ValueError):
    pass


@dataclass
class TrajectoryLog:
    columns: list
    data: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.data = np.atleast_2d(np.asarray(self.data, dtype=float))
        if self.data.shape[1] != len(self.columns):
            raise SchemaError("column count does not match data width")
        self._index = {c: i for i, c in enumerate(self.columns)}

    def __len__(self):
        return self.data.shape[0]

    def __getitem__(self, name):
        return self.data[:, self._index[name]]

    def has(self, name):
        return name in self._index

    def block(self, prefix):
        """All columns named ``prefix_<k>`` stacked as an (N, k) array."""
        names = [c for c in self.columns if c.startswith(prefix + "_") and c[len(prefix) + 1:].isdigit()]
        return self.data[:, [self._index[c] for c in names]]

    @property
    def t(self):
        return self["t"]

    @property
    def m(self):
        return self.block("xi").shape[1]

    @property
    def dt(self):
        return float(self.t[1] - self.t[0]) if len(self) > 1 else float("nan")

    def to_csv(self, path_or_buf):
        rows = [[repr(float(x)) for x in row] for row in self.data]
        if hasattr(path_or_buf, "write"):
            self._write(path_or_buf, rows)
        else:
            with open(path_or_buf, "w", newline="") as fh:
                self._write(fh, rows)

    def _write(self, fh, rows):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(self.columns)
        w.writerows(rows)

    def to_csv_string(self):
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError("empty trajectory file") from None
            rows = [r for r in reader if r]
        if not rows:
            raise SchemaError("trajectory file has no data rows")
        if not header or header[0] != "t" or not any(c.startswith("xi_") for c in header):
            raise SchemaError("header does not follow the trajectory schema")
        m = sum(1 for c in header if c.startswith("xi_"))
        n = sum(1 for c in header if c.startswith("tau_"))
        if header != trajectory_columns(m, n):
            raise SchemaError("columns differ from the trajectory schema")
        try:
            data = np.array([[float(x) for x in r] for r in rows])
        except ValueError as exc:
            raise SchemaError(f"non-numeric entry: {exc}") from None
        if data.shape[1] != len(header):
            raise SchemaError("ragged rows")
        return cls(header, data)

    def safety_summary(self):
        t = self.t
        hx = self.block("hx")
        p = self["p"]
        viol = np.any(hx > 0.0, axis=1)
        first = float(t[np.argmax(viol)]) if viol.any() else None
        switches = int(np.count_nonzero(np.diff(p)))
        dwell2 = float(np.count_nonzero(p[:-1] == 2) * self.dt) if len(self) > 1 else 0.0
        return {
            "max_h": hx.max(axis=0),
            "max_h_reference": self.block("h").max(axis=0),
            "max_phi_reference": float(self["phi_max"].max()),
            "first_violation": first,
            "switch_count": switches,
            "dwell_p2": dwell2,
        }

    def safety_report(self):
        s = self.safety_summary()
        lines = ["[safety]"]
        for i, v in enumerate(s["max_h"]):
            lines.append(f"max_h_axis{i + 1} = {v:.9g}")
        for i, v in enumerate(s["max_h_reference"]):
            lines.append(f"max_h_reference_axis{i + 1} = {v:.9g}")
        lines.append(f"max_phi_reference = {s['max_phi_reference']:.9g}")
        fv = s["first_violation"]
        lines.append(f"first_violation = {'none' if fv is None else format(fv, '.6f')}")
        lines.append(f"switch_count = {s['switch_count']}")
        lines.append(f"dwell_p2 = {s['dwell_p2']:.6f}")
        return "\n".join(lines) + "\n"

    @property
    def violated(self):
        return self.safety_summary()["first_violation"] is not None
