"""Dimension sweeps: build (d, N, k) sequences, evaluate them exactly, write CSV/SVG."""
from __future__ import annotations

import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Iterable, Literal, Sequence, TextIO

from randcone import asymptotics as asy
from randcone.bigcomb import (ConeIndex, InvalidConeIndex, Model, difference, log_of_rational,
                              quotient_ce, quotient_dt)

Regime = Literal["fixed-ratio", "fixed-k", "sqrt-window", "power-window", "oscillating"]
REGIMES = ("fixed-ratio", "fixed-k", "sqrt-window", "power-window", "oscillating")

CSV_COLUMNS = ("d", "N", "k", "delta_d", "rho_d", "quotient_dt", "quotient_ce", "diff_log_dt",
               "diff_log_ce", "envelope_dt", "envelope_ce", "predicted_limit")


@dataclass(frozen=True)
class SequenceSpec:
    regime: Regime
    delta: float
    rho: float | None = None
    k_fixed: int | None = None
    window: asy.WindowSpec | None = None
    rounding: str = "half-up"

    def __post_init__(self) -> None:
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}; expected one of {REGIMES}")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if self.regime == "fixed-ratio":
            if self.rho is None or not 0.0 <= self.rho < 1.0:
                raise ValueError("fixed-ratio needs rho in [0, 1)")
        elif self.regime == "fixed-k":
            if self.k_fixed is None or self.k_fixed < 1:
                raise ValueError("fixed-k needs k_fixed >= 1")
        elif self.regime in ("sqrt-window", "power-window"):
            if self.window is None:
                raise ValueError(f"{self.regime} needs a window")
            if (self.window.mode == "sqrt-window") != (self.regime == "sqrt-window"):
                raise ValueError(f"window mode {self.window.mode!r} does not match regime {self.regime!r}")
            if self.delta < 0.5:
                raise ValueError("window regimes need delta >= 1/2")
        elif self.regime == "oscillating":
            if not 0.5 < self.delta < 1.0:
                raise ValueError("oscillating construction needs 1/2 < delta < 1")
        if self.rounding not in ("half-up", "floor"):
            raise ValueError(f"unknown rounding rule {self.rounding!r}")


@dataclass(frozen=True)
class SweepRow:
    d: int
    N: int
    k: int
    delta_d: float
    rho_d: float
    quotient_dt: float | None = None
    quotient_ce: float | None = None
    diff_log_dt: float | None = None
    diff_log_ce: float | None = None
    envelope_dt: float | None = None
    envelope_ce: float | None = None
    predicted_limit: float | None = None


def _exact(x: float | Fraction) -> Fraction:
    # decimal reading so that delta=0.8 means 4/5, not the nearest binary64
    return x if isinstance(x, Fraction) else Fraction(repr(float(x)))


def _round(x: Fraction, rule: str) -> int:
    return math.floor(x + Fraction(1, 2)) if rule == "half-up" else math.floor(x)


def make_sequence(spec: SequenceSpec, d: int) -> ConeIndex:
    """The (d, N(d), k(d)) triple of a regime at dimension ``d``."""
    if spec.regime == "oscillating":
        return oscillating_construction(spec.delta, d)[0]
    N = _round(d / _exact(spec.delta), spec.rounding)
    if spec.regime == "fixed-ratio":
        k = _round(_exact(spec.rho) * d, spec.rounding)
    elif spec.regime == "fixed-k":
        k = spec.k_fixed
    else:
        w = spec.window
        k = 2 * d - N + _round(Fraction(w.c * d ** w.alpha), spec.rounding)
    try:
        return ConeIndex(d, N, k)
    except InvalidConeIndex as exc:
        raise InvalidConeIndex(f"d={d} is below the validity floor of {spec.regime}: {exc}") from None


def oscillating_construction(delta: float, d: int) -> tuple[ConeIndex, float]:
    """Index with G(delta, rho(d)) = ((-1)^d / 2 + 1) log N / N, N = floor(d/delta), k = floor(rho(d) d).

    Even ``d`` put the exponent at 3/2 log N / N, odd ``d`` at 1/2 log N / N,
    so the DT difference swings between ~sqrt(N) and ~1/sqrt(N).
    """
    if not 0.5 < delta < 1.0:
        raise ValueError(f"need 1/2 < delta < 1, got {delta}")
    N = math.floor(d / _exact(delta))
    if N < 2:
        raise InvalidConeIndex(f"d={d} is below the validity floor of the oscillating construction")
    level = ((0.5 if d % 2 == 0 else -0.5) + 1.0) * math.log(N) / N
    rho_s = asy.rho_strong(delta)
    lo, hi = rho_s + 1e-9, asy.rho_weak(delta)

    def f(r: float) -> float:
        return asy.g_exponent(delta, r) - level

    if f(lo) >= 0:
        raise asy.RootFindingError(f"level {level:.3e} too small to bracket at d={d}")
    while f(hi) <= 0:
        if hi >= 1.0 - 1e-12:
            raise asy.RootFindingError(f"level {level:.3e} above the range of G at d={d}")
        hi = min(1.0 - 1e-12, 0.5 * (hi + 1.0))
    rho_d = asy.bisect_root(f, lo, hi)
    residual = f(rho_d)
    if abs(residual) >= 1e-12:
        raise asy.RootFindingError(f"residual {residual:.3e} at d={d}")
    k = math.floor(rho_d * d)
    try:
        idx = ConeIndex(d, N, k)
    except InvalidConeIndex as exc:
        raise InvalidConeIndex(f"d={d} is below the validity floor of the oscillating construction: {exc}") from None
    return idx, rho_d


def predicted_quotient_limit(spec: SequenceSpec) -> float | None:
    """Limit of the CE quotient E f_k(C_N) / C(N, k) along ``spec``; None when there is none."""
    delta = spec.delta
    if spec.regime == "fixed-ratio":
        rho_w = asy.rho_weak(delta) if delta < 1 else 1.0
        if spec.rho < rho_w:
            return 1.0
        if spec.rho > rho_w:
            return 0.0
        return None
    if spec.regime == "fixed-k":
        return 1.0 if delta >= 0.5 else (2 * delta) ** spec.k_fixed
    if spec.regime == "sqrt-window":
        if delta == 0.5:
            return asy.window_limit_ratio(0.0, spec.window.c)
        return asy.window_limit_ce(asy.rho_weak(delta), spec.window.c)
    if spec.regime == "power-window":
        return {"upper-power": 0.0, "two-sided-power": 0.5, "lower-power": 1.0}[spec.window.mode]
    return None


def predicted_difference_limit(spec: SequenceSpec) -> float | None:
    """0 or inf by the sign of G(delta, rho); None on the strong threshold or without a ratio."""
    if spec.regime != "fixed-ratio":
        return None
    g = asy.g_exponent(spec.delta, spec.rho)
    if g < 0:
        return 0.0
    if g > 0:
        return math.inf
    return None


def _in_envelope_domain(idx: ConeIndex) -> bool:
    delta_d = Fraction(idx.d, idx.N)
    return Fraction(1, 2) < delta_d < 1 and 0 < Fraction(idx.k, idx.d) < 2 - 1 / delta_d


def evaluate_row(idx: ConeIndex, models: Sequence[Model] = (), predicted: float | None = None) -> SweepRow:
    """Exact quotients for ``idx`` plus log-differences and envelopes for ``models``."""
    values: dict[str, float | None] = {
        "quotient_dt": float(quotient_dt(idx)),
        "quotient_ce": float(quotient_ce(idx)),
    }
    envelope_ok = _in_envelope_domain(idx)
    for model in models:
        values[f"diff_log_{model}"] = log_of_rational(difference(idx, model))
        if envelope_ok:
            values[f"envelope_{model}"] = asy.difference_envelope(idx, model)
    return SweepRow(idx.d, idx.N, idx.k, idx.d / idx.N, idx.k / idx.d,
                    predicted_limit=predicted, **values)


def _run(spec: SequenceSpec, d_list: Iterable[int], models: Sequence[Model],
         predicted: float | None, threads: int) -> list[SweepRow]:
    ds = sorted(set(d_list))
    if not ds:
        raise ValueError("empty dimension list")

    def one(d: int) -> SweepRow:
        return evaluate_row(make_sequence(spec, d), models, predicted)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, ds))
    return [one(d) for d in ds]


def run_quotient_sweep(spec: SequenceSpec, d_list: Iterable[int], threads: int = 1) -> list[SweepRow]:
    return _run(spec, d_list, (), predicted_quotient_limit(spec), threads)


def run_difference_sweep(spec: SequenceSpec, d_list: Iterable[int],
                         model: Model | Literal["both"] = "both", threads: int = 1) -> list[SweepRow]:
    """Rows with log(C(N,k) - E f_k) and the envelope g(d) / h(d) for ``model``."""
    if spec.regime == "fixed-ratio":
        if not 0.5 < spec.delta < 1.0:
            raise ValueError(f"difference sweeps need 1/2 < delta < 1, got {spec.delta}")
        if not 0.0 < spec.rho < asy.rho_weak(spec.delta):
            raise ValueError(f"difference sweeps need 0 < rho < rho_W(delta), got rho={spec.rho}")
    elif spec.regime != "oscillating":
        raise ValueError(f"difference sweeps support fixed-ratio and oscillating, not {spec.regime}")
    models: tuple[Model, ...] = ("dt", "ce") if model == "both" else (model,)
    return _run(spec, d_list, models, predicted_difference_limit(spec), threads)


def classify_difference(spec: SequenceSpec) -> str:
    """``"zero"`` below the strong threshold, ``"infinity"`` above it."""
    limit = predicted_difference_limit(spec)
    if limit is None:
        raise ValueError("no classification on the strong threshold")
    return "zero" if limit == 0.0 else "infinity"


# ---------------------------------------------------------------------------
# output

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return format(value, ".17g")


def write_csv(rows: Sequence[SweepRow], out: TextIO) -> None:
    out.write(",".join(CSV_COLUMNS) + "\n")
    for row in sorted(rows, key=lambda r: r.d):
        out.write(",".join(_fmt(getattr(row, c)) for c in CSV_COLUMNS) + "\n")


def emit_csv(rows: Sequence[SweepRow], destination: str | os.PathLike | TextIO) -> None:
    """Write rows in ascending ``d`` under the fixed column header."""
    if not rows:
        raise ValueError("no rows to write")
    if hasattr(destination, "write"):
        write_csv(rows, destination)
        return
    buf = io.StringIO()
    write_csv(rows, buf)
    try:
        with open(destination, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write CSV to {os.fspath(destination)}: {exc.strerror}") from exc


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def render_svg_lineplot(rows: Sequence[SweepRow], x: str, ys: Sequence[str],
                        width: int = 640, height: int = 400) -> str:
    names = {f.name for f in fields(SweepRow)}
    unknown = [c for c in (x, *ys) if c not in names]
    if unknown:
        raise ValueError(f"unknown column(s) {unknown}; available: {sorted(names)}")
    if not rows:
        raise ValueError("no rows to plot")
    rows = sorted(rows, key=lambda r: getattr(r, x))
    series = {y: [(float(getattr(r, x)), float(getattr(r, y))) for r in rows
                  if getattr(r, y) is not None and math.isfinite(getattr(r, y))] for y in ys}
    guide = [(float(getattr(r, x)), r.predicted_limit) for r in rows
             if r.predicted_limit is not None and math.isfinite(r.predicted_limit)]
    pts = [p for s in series.values() for p in s] + guide
    if not pts:
        raise ValueError("nothing finite to plot")

    xs = [p[0] for p in pts]
    yv = [p[1] for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(yv), max(yv)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    span = y1 - y0 if y1 > y0 else max(abs(y0), 1.0)
    y0, y1 = y0 - 0.05 * span, y1 + 0.05 * span

    left, right, top, bottom = 70, 150, 20, 50
    pw, ph = width - left - right, height - top - bottom

    def sx(v: float) -> str:
        return f"{left + (v - x0) / (x1 - x0) * pw:.2f}"

    def sy(v: float) -> str:
        return f"{top + (y1 - v) / (y1 - y0) * ph:.2f}"

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
           f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>']
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        yv_ = y0 + (y1 - y0) * i / 4
        out.append(f'<text x="{sx(xv)}" y="{top + ph + 15}" text-anchor="middle">{xv:.6g}</text>')
        out.append(f'<text x="{left - 5}" y="{sy(yv_)}" text-anchor="end">{yv_:.6g}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 10}" text-anchor="middle">{x}</text>')

    legend = []
    for i, (name, s) in enumerate(series.items()):
        colour = _PALETTE[i % len(_PALETTE)]
        if s:
            path = " ".join(f"{sx(a)},{sy(b)}" for a, b in s)
            out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{path}"/>')
        legend.append((name, colour, ""))
    if guide:
        path = " ".join(f"{sx(a)},{sy(b)}" for a, b in guide)
        out.append(f'<polyline fill="none" stroke="gray" stroke-dasharray="4 3" points="{path}"/>')
        legend.append(("predicted_limit", "gray", ' stroke-dasharray="4 3"'))
    for i, (name, colour, dash) in enumerate(legend):
        ly = top + 10 + 16 * i
        lx = left + pw + 10
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{colour}"{dash}/>')
        out.append(f'<text x="{lx + 25}" y="{ly + 4}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg_lineplot(rows: Sequence[SweepRow], x: str, ys: Sequence[str],
                      destination: str | os.PathLike | TextIO) -> None:
    svg = render_svg_lineplot(rows, x, ys)
    if hasattr(destination, "write"):
        destination.write(svg)
        return
    try:
        with open(destination, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(svg)
    except OSError as exc:
        raise OSError(f"cannot write SVG to {os.fspath(destination)}: {exc.strerror}") from exc
