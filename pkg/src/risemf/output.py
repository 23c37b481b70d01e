"""CSV tables with a reproducibility header, and minimal SVG line plots."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

SCHEMAS = {
    "run": ("policy", "v", "seed", "avg_emfe_w_m2", "avg_delay_s", "avg_rate_bps", "avg_power_w",
            "avg_local_bits", "avg_remote_bits", "stable", "min_drift_slack"),
    "sweep-v": ("v", "seed", "avg_emfe_w_m2", "avg_delay_s", "avg_rate_bps", "avg_power_w", "stable"),
    "sweep-range": ("distance_m", "policy", "v_star", "avg_emfe_w_m2", "avg_emfe_dbm_m2"),
    "sweep-arrival": ("arrival_bps", "policy", "avg_emfe_dbm_m2", "gain_db_vs_no_ris"),
}
INT_COLUMNS = {"seed"}
BOOL_COLUMNS = {"stable"}
STR_COLUMNS = {"policy"}


def fmt_float(x: float) -> str:
    """Nine significant digits, scientific notation, locale-free."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.8e}"


def quantize(x: float) -> float:
    """The float a CSV cell will parse back to."""
    return float(fmt_float(x))


def _cast(column: str, value):
    if column in INT_COLUMNS:
        return int(value)
    if column in BOOL_COLUMNS:
        return value if isinstance(value, bool) else value == "true"
    if column in STR_COLUMNS:
        return str(value)
    return quantize(value)


def _cell(column: str, value) -> str:
    if column in BOOL_COLUMNS:
        return "true" if value else "false"
    if column in INT_COLUMNS or column in STR_COLUMNS:
        return str(value)
    return fmt_float(value)


@dataclass
class Table:
    """Rows of one experiment; values are already rounded to CSV precision."""

    kind: str
    rows: list[dict] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def columns(self) -> tuple:
        return SCHEMAS[self.kind]

    def add(self, **values) -> None:
        missing = set(self.columns) - set(values)
        if missing:
            raise ValueError(f"row lacks column(s) {sorted(missing)}")
        self.rows.append({c: _cast(c, values[c]) for c in self.columns})

    def to_csv(self) -> str:
        if not self.rows:
            raise ValueError("refusing to write an empty table")
        lines = [f"# {k}: {v}" for k, v in self.meta.items()]
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(_cell(c, row[c]) for c in self.columns))
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> Path:
        text = self.to_csv()
        path = Path(path)
        with open(path, "w", encoding="ascii", newline="") as fh:
            fh.write(text)
        return path


def read_csv(path: str | Path, kind: str) -> Table:
    meta, rows = {}, []
    header = None
    with open(path, encoding="ascii") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# "):
                key, _, value = line[2:].partition(": ")
                meta[key] = value
            elif header is None:
                header = tuple(line.split(","))
                if header != SCHEMAS[kind]:
                    raise ValueError(f"unexpected columns {header}")
            elif line:
                rows.append({c: _cast(c, v) for c, v in zip(header, line.split(","))})
    return Table(kind, rows, meta)


def header_meta(command: str, config, seeds, overrides: dict, profile: str | None) -> dict:
    return {
        "command": command,
        "config_sha256": config.digest(),
        "seeds": ",".join(str(s) for s in seeds),
        "profile": profile or "desk",
        "overrides": ";".join(f"{k}={v!r}" for k, v in overrides.items()) or "none",
        "config": json.dumps(config.to_dict(), sort_keys=True, default=repr),
    }


# ---- SVG -------------------------------------------------------------------
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def _ticks(lo: float, hi: float, log: bool) -> list[float]:
    if log:
        return [10.0 ** k for k in range(math.floor(math.log10(lo)), math.ceil(math.log10(hi)) + 1)]
    span = hi - lo or 1.0
    step = 10 ** math.floor(math.log10(span / 5))
    for m in (1, 2, 5, 10):
        if span / (m * step) <= 6:
            step *= m
            break
    start = math.floor(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step) + 2)]


def svg_plot(series: dict, xlabel: str, ylabel: str, title: str, logx: bool = False,
             width: int = 640, height: int = 420) -> str:
    """Line-and-marker plot of ``{label: (xs, ys)}``; non-finite points are dropped."""
    pts = {k: [(x, y) for x, y in zip(*v) if math.isfinite(x) and math.isfinite(y)
               and (x > 0 or not logx)] for k, v in series.items()}
    xs = [x for p in pts.values() for x, _ in p]
    ys = [y for p in pts.values() for _, y in p]
    if not xs:
        xs, ys = [1.0, 10.0], [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x0 == x1:
        x0, x1 = (x0 / 2, x0 * 2) if logx else (x0 - 1, x1 + 1)
    if y0 == y1:
        y0, y1 = y0 - 1, y1 + 1
    ml, mr, mt, mb = 70, 160, 40, 50
    pw, ph = width - ml - mr, height - mt - mb
    fx = (lambda x: math.log10(x)) if logx else (lambda x: x)

    def sx(x):
        return ml + pw * (fx(x) - fx(x0)) / (fx(x1) - fx(x0))

    def sy(y):
        return mt + ph * (1 - (y - y0) / (y1 - y0))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{ml + pw / 2:.1f}" y="20" text-anchor="middle" font-size="13">{title}</text>',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _ticks(x0, x1, logx):
        if x0 <= t <= x1:
            label = f"1e{round(math.log10(t))}" if logx else f"{t:g}"
            out.append(f'<line x1="{sx(t):.1f}" y1="{mt + ph}" x2="{sx(t):.1f}" y2="{mt + ph + 4}" stroke="black"/>'
                       f'<text x="{sx(t):.1f}" y="{mt + ph + 16}" text-anchor="middle">{label}</text>')
    for t in _ticks(y0, y1, False):
        if y0 <= t <= y1:
            out.append(f'<line x1="{ml - 4}" y1="{sy(t):.1f}" x2="{ml}" y2="{sy(t):.1f}" stroke="black"/>'
                       f'<text x="{ml - 6}" y="{sy(t) + 4:.1f}" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{mt + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {mt + ph / 2:.1f})">{ylabel}</text>')
    for i, (label, p) in enumerate(pts.items()):
        color = PALETTE[i % len(PALETTE)]
        p = sorted(p)
        if len(p) > 1:
            path = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in p)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for x, y in p:
            out.append(f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="3" fill="{color}"/>')
        ly = mt + 14 + 16 * i
        out.append(f'<line x1="{ml + pw + 10}" y1="{ly - 4}" x2="{ml + pw + 30}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/><text x="{ml + pw + 34}" y="{ly}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
