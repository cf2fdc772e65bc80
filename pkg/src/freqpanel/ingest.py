"""Parsers and dataset assembly.

Fixed-width climate-division records, long-format CSV panels, weight
files, growth-rate construction, and the temperature/growth merge that
produces an analysis-ready dataset.

The fixed-width layout is an identifier followed by twelve 7-character
monthly values. Two identifier variants are accepted, detected per line
from the record length:

* 11 characters: state(2) county(3) element(2) year(4)
* 10 characters: state(2) division(2) element(2) year(4)

-99.90 marks a missing month. A year with one missing month is filled
from the adjacent months; more than one missing month rejects that
unit-year (recorded in the panel meta). Sub-state series are aggregated
to the state with the supplied weights, renormalized over the sub-units
present in a given year.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import (
    AxisMismatch,
    EmptyIntersection,
    MalformedRecord,
    MissingYearCoverage,
    NonPositiveLevel,
    UnknownElementCode,
)
from .series import Panel, demean_pre_cutoff

__all__ = [
    "STATE_CODES",
    "ELEMENT_CODES",
    "AssembledDataset",
    "parse_nclimdiv",
    "write_nclimdiv",
    "read_long_csv",
    "write_long_csv",
    "read_weights_csv",
    "build_growth",
    "assemble_dataset",
]

# contiguous-state codes of the climate-division dataset (alphabetical,
# Alaska/Hawaii/DC are not part of this table and are dropped on sight)
STATE_CODES = {
    1: "AL", 2: "AZ", 3: "AR", 4: "CA", 5: "CO", 6: "CT", 7: "DE", 8: "FL",
    9: "GA", 10: "ID", 11: "IL", 12: "IN", 13: "IA", 14: "KS", 15: "KY",
    16: "LA", 17: "ME", 18: "MD", 19: "MA", 20: "MI", 21: "MN", 22: "MS",
    23: "MO", 24: "MT", 25: "NE", 26: "NV", 27: "NH", 28: "NJ", 29: "NM",
    30: "NY", 31: "NC", 32: "ND", 33: "OH", 34: "OK", 35: "OR", 36: "PA",
    37: "RI", 38: "SC", 39: "SD", 40: "TN", 41: "TX", 42: "UT", 43: "VT",
    44: "VA", 45: "WA", 46: "WV", 47: "WI", 48: "WY",
}
_ABBREV_TO_CODE = {v: k for k, v in STATE_CODES.items()}

# element codes of the climate-division dataset
ELEMENT_CODES = {
    "01": "precipitation",
    "02": "average temperature",
    "05": "pdsi",
    "06": "phdi",
    "07": "zndx",
    "08": "pmdi",
    "25": "heating degree days",
    "26": "cooling degree days",
    "27": "maximum temperature",
    "28": "minimum temperature",
}

MISSING_SENTINEL = -99.90
_MONTH_WIDTH = 7
_N_MONTHS = 12


def _fill_single_missing(months: np.ndarray) -> np.ndarray:
    """Replace the single missing month by the mean of its nearest neighbors."""
    out = months.copy()
    (idx,) = np.where(np.isnan(months))
    i = int(idx[0])
    neighbors = [j for j in (i - 1, i + 1) if 0 <= j < _N_MONTHS and not np.isnan(months[j])]
    out[i] = np.mean([months[j] for j in neighbors])
    return out


def parse_nclimdiv(data, element: str = "02", weights=None) -> Panel:
    """Parse fixed-width climate records into a state-by-year panel.

    `weights` optionally maps sub-unit identifiers (the state+division or
    state+county digits, e.g. "01001") to aggregation weights; sub-units
    of a state are averaged equally when absent. Units outside the
    48-state table are dropped. The returned panel covers the largest
    consecutive year range shared by all states; rejected and interpolated
    unit-years are listed in ``panel.meta``.
    """
    if isinstance(data, bytes):
        data = data.decode("ascii")
    if element not in ELEMENT_CODES:
        raise UnknownElementCode(f"unknown element code {element!r}")

    cells: dict = {}  # (state_code, year) -> {sub_id: annual}
    rejected = []
    interpolated = []
    for lineno, raw in enumerate(data.splitlines(), start=1):
        line = raw.rstrip("\n\r")
        if not line.strip():
            continue
        id_len = len(line) - _MONTH_WIDTH * _N_MONTHS
        if id_len not in (10, 11):
            raise MalformedRecord(
                f"line {lineno}: record length {len(line)} does not match the "
                "10- or 11-character identifier layouts"
            )
        sub_digits = 3 if id_len == 11 else 2
        try:
            state = int(line[0:2])
            sub = line[2 : 2 + sub_digits]
            elem = line[2 + sub_digits : 4 + sub_digits]
            year = int(line[4 + sub_digits : 8 + sub_digits])
            months = np.array(
                [
                    float(line[id_len + _MONTH_WIDTH * m : id_len + _MONTH_WIDTH * (m + 1)])
                    for m in range(_N_MONTHS)
                ]
            )
        except ValueError as e:
            raise MalformedRecord(f"line {lineno}: {e}") from None
        if elem not in ELEMENT_CODES:
            raise UnknownElementCode(f"line {lineno}: unknown element code {elem!r}")
        if elem != element:
            continue
        if state not in STATE_CODES:
            continue  # Alaska/Hawaii/regional aggregates
        months[np.isclose(months, MISSING_SENTINEL)] = np.nan
        n_missing = int(np.isnan(months).sum())
        key = (state, year)
        if n_missing > 1:
            rejected.append({"unit": STATE_CODES[state], "sub": sub, "year": year,
                             "missing_months": n_missing})
            continue
        if n_missing == 1:
            months = _fill_single_missing(months)
            interpolated.append({"unit": STATE_CODES[state], "sub": sub, "year": year})
        cells.setdefault(key, {})[f"{state:02d}{sub}"] = float(months.mean())

    if not cells:
        raise MissingYearCoverage("no usable records for the requested element")

    def aggregate(subs: dict) -> float:
        if weights is None:
            return float(np.mean(list(subs.values())))
        w = np.array([float(weights.get(k, 0.0)) for k in subs])
        if w.sum() <= 0:
            return float(np.mean(list(subs.values())))
        return float(np.dot(w / w.sum(), list(subs.values())))

    states = sorted({s for s, _ in cells})
    by_state = {s: {y for s2, y in cells if s2 == s} for s in states}
    first = max(min(ys) for ys in by_state.values())
    last = min(max(ys) for ys in by_state.values())
    if first > last:
        raise MissingYearCoverage("states do not share any common year")
    years = np.arange(first, last + 1)
    values = np.empty((len(states), years.size))
    gaps = []
    for i, s in enumerate(states):
        for j, y in enumerate(years):
            subs = cells.get((s, int(y)))
            if not subs:
                gaps.append((STATE_CODES[s], int(y)))
            else:
                values[i, j] = aggregate(subs)
    if gaps:
        raise MissingYearCoverage(
            f"{len(gaps)} unit-years missing inside the common range, e.g. {gaps[:5]}"
        )
    return Panel(
        tuple(STATE_CODES[s] for s in states),
        years,
        values,
        None,
        "degF",
        {"source": "nclimdiv", "element": element, "rejected": rejected,
         "interpolated": interpolated},
    )


def write_nclimdiv(panel: Panel, element: str = "02") -> str:
    """Serialize a state panel back to the 11-character fixed-width layout.

    Each annual value is written as twelve equal monthly values at the
    format's native 2-decimal precision, so parse(write(parse(f))) equals
    parse(f) whenever annual means are representable at that precision.
    """
    lines = []
    for i, unit in enumerate(panel.unit_ids):
        code = _ABBREV_TO_CODE.get(unit)
        if code is None:
            raise ValueError(f"unit {unit!r} is not a known state abbreviation")
        for j, year in enumerate(panel.years):
            v = panel.values[i, j]
            lines.append(
                f"{code:02d}000{element}{int(year):04d}" + f"{v:7.2f}" * _N_MONTHS
            )
    return "\n".join(lines) + "\n"


def read_long_csv(path_or_buffer) -> Panel:
    """Read a long-format panel CSV with columns unit, year, value."""
    df = pd.read_csv(path_or_buffer)
    expected = ["unit", "year", "value"]
    if list(df.columns[:3]) != expected:
        raise MalformedRecord(f"expected columns {expected}, found {list(df.columns)}")
    wide = df.pivot_table(index="unit", columns="year", values="value", aggfunc="first")
    if wide.isna().any().any():
        holes = int(wide.isna().sum().sum())
        raise MissingYearCoverage(f"panel has {holes} missing unit-year cells")
    years = np.asarray(wide.columns, dtype=int)
    if np.any(np.diff(years) != 1):
        raise MissingYearCoverage("year axis has gaps")
    return Panel(tuple(wide.index), years, wide.to_numpy(dtype=float))


def write_long_csv(panel: Panel, path) -> None:
    rows = [
        {"unit": u, "year": int(y), "value": panel.values[i, j]}
        for i, u in enumerate(panel.unit_ids)
        for j, y in enumerate(panel.years)
    ]
    pd.DataFrame(rows, columns=["unit", "year", "value"]).to_csv(path, index=False)


def read_weights_csv(path_or_buffer) -> dict:
    """Read a weights CSV with columns unit, weight into a mapping."""
    df = pd.read_csv(path_or_buffer)
    expected = ["unit", "weight"]
    if list(df.columns[:2]) != expected:
        raise MalformedRecord(f"expected columns {expected}, found {list(df.columns)}")
    return {str(u): float(w) for u, w in zip(df["unit"], df["weight"])}


def build_growth(levels: Panel) -> Panel:
    """Annual growth in percent: 100 * (log Y_t - log Y_{t-1}); drops year one."""
    if np.any(levels.values <= 0):
        bad = int((levels.values <= 0).sum())
        raise NonPositiveLevel(f"{bad} level cells are not strictly positive")
    growth = 100.0 * np.diff(np.log(levels.values), axis=1)
    return Panel(
        levels.unit_ids,
        levels.years[1:],
        growth,
        levels.weights,
        "pct_growth",
        {**levels.meta, "transform": "100*dlog"},
    )


@dataclass(frozen=True)
class AssembledDataset:
    """Aligned temperature and growth panels ready for regression work.

    `temperature` keeps its full year range (components are estimated on
    the long sample and merged down); `growth` is trimmed to the common
    sample. `sample_years` is the year intersection.
    """

    temperature: Panel
    growth: Panel
    sample_years: np.ndarray
    provenance: dict = field(default_factory=dict)


def assemble_dataset(x: Panel, y: Panel, weights=None, cutoff: int = 1980) -> AssembledDataset:
    """Demean temperature before `cutoff` per unit, align axes, attach weights."""
    common = tuple(u for u in x.unit_ids if u in set(y.unit_ids))
    if not common:
        raise AxisMismatch("temperature and growth panels share no units")
    x = x.subset_units(common) if common != x.unit_ids else x
    y = y.subset_units(common) if common != y.unit_ids else y

    demeaned = Panel.from_rows(
        [demean_pre_cutoff(s, cutoff) for s in x.iter_rows()],
        meta={**x.meta, "demean_cutoff": cutoff},
    )
    first = max(int(x.years[0]), int(y.years[0]))
    last = min(int(x.years[-1]), int(y.years[-1]))
    if first > last:
        raise EmptyIntersection(
            f"temperature ({x.years[0]}-{x.years[-1]}) and growth "
            f"({y.years[0]}-{y.years[-1]}) do not overlap"
        )
    if weights is not None:
        demeaned = demeaned.with_weights(weights)
        y = y.with_weights(weights)
    elif x.weights is not None:
        demeaned = demeaned.with_weights(x.weights, normalize=False)

    growth = y.window(first, last)
    return AssembledDataset(
        temperature=demeaned,
        growth=growth,
        sample_years=np.arange(first, last + 1),
        provenance={
            "cutoff": int(cutoff),
            "sample_years": [first, last],
            "n_units": len(common),
            "temperature_years": [int(x.years[0]), int(x.years[-1])],
        },
    )
