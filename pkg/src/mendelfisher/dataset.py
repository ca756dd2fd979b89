"""Mendel's data: 84 binomial experiments and Fisher's multinomial layout.

The binomial table follows Edwards' decomposition, except that the
single-trait F2 rows (ids 1-7) are kept exactly as Mendel reported them.
Fisher's grouping keeps the bifactorial, trifactorial and gametic
experiments as multinomials; everything else enters as a 2-cell layout.
"""

from __future__ import annotations

import csv
import enum
import io
import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "ExperimentGroup",
    "BinomialExperiment",
    "MultinomialExperiment",
    "Dataset",
    "DatasetError",
    "load_embedded",
    "parse_csv",
    "export_csv",
    "export_json",
    "CSV_HEADER",
    "GROUP_ORDER",
]


class DatasetError(ValueError):
    """Malformed or inconsistent experiment data."""


class ExperimentGroup(str, enum.Enum):
    RATIO_3_TO_1 = "Ratio3to1"
    RATIO_2_TO_1 = "Ratio2to1"
    BIFACTORIAL = "Bifactorial"
    GAMETIC_RATIOS = "GameticRatios"
    TRIFACTORIAL = "Trifactorial"
    PLANT_VARIATION = "PlantVariation"

    @property
    def short(self) -> str:
        return _SHORT_LABELS[self]


_SHORT_LABELS = {
    ExperimentGroup.RATIO_3_TO_1: "3:1",
    ExperimentGroup.RATIO_2_TO_1: "2:1",
    ExperimentGroup.BIFACTORIAL: "BF",
    ExperimentGroup.GAMETIC_RATIOS: "GR",
    ExperimentGroup.TRIFACTORIAL: "TF",
    ExperimentGroup.PLANT_VARIATION: "PV",
}

#: Row order used by the chi-square summary tables.
GROUP_ORDER = (
    ExperimentGroup.RATIO_3_TO_1,
    ExperimentGroup.RATIO_2_TO_1,
    ExperimentGroup.BIFACTORIAL,
    ExperimentGroup.GAMETIC_RATIOS,
    ExperimentGroup.TRIFACTORIAL,
    ExperimentGroup.PLANT_VARIATION,
)

_ALLOWED_P0 = {Fraction(3, 4), Fraction(2, 3), Fraction(1, 2)}


@dataclass(frozen=True)
class BinomialExperiment:
    id: int
    group: ExperimentGroup
    trait: str
    n: int
    n1: int
    p0: Fraction

    def __post_init__(self):
        if self.n < 1:
            raise DatasetError(f"experiment {self.id}: n must be positive")
        if not 0 <= self.n1 <= self.n:
            raise DatasetError(
                f"experiment {self.id}: need 0 <= n1 <= n, got n1={self.n1}, n={self.n}")
        if not 0 < self.p0 < 1:
            raise DatasetError(f"experiment {self.id}: p0 must lie in (0, 1)")

    @property
    def expected(self) -> Fraction:
        return self.n * self.p0


@dataclass(frozen=True)
class MultinomialExperiment:
    """Cell counts with integer theoretical ratios (Fisher's unit of analysis)."""

    label: str
    group: ExperimentGroup
    counts: tuple[int, ...]
    ratios: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts) != len(self.ratios) or len(self.counts) < 2:
            raise DatasetError(f"{self.label}: counts and ratios need equal length >= 2")
        if any(c < 0 for c in self.counts):
            raise DatasetError(f"{self.label}: negative count")
        if any(r <= 0 for r in self.ratios):
            raise DatasetError(f"{self.label}: ratios must be positive")

    @property
    def df(self) -> int:
        return len(self.counts) - 1

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def probabilities(self) -> tuple[Fraction, ...]:
        s = sum(self.ratios)
        return tuple(Fraction(r, s) for r in self.ratios)


@dataclass(frozen=True)
class Dataset:
    binomials: tuple[BinomialExperiment, ...]
    fisher_multinomials: tuple[MultinomialExperiment, ...] = field(default=())

    def __post_init__(self):
        ids = [b.id for b in self.binomials]
        if len(set(ids)) != len(ids):
            raise DatasetError("duplicate experiment ids")

    def __len__(self):
        return len(self.binomials)

    def by_id(self, exp_id: int) -> BinomialExperiment:
        for b in self.binomials:
            if b.id == exp_id:
                return b
        raise KeyError(exp_id)

    def group(self, g: ExperimentGroup) -> tuple[BinomialExperiment, ...]:
        return tuple(b for b in self.binomials if b.group == g)

    def fisher_group(self, g: ExperimentGroup) -> tuple[MultinomialExperiment, ...]:
        return tuple(m for m in self.fisher_multinomials if m.group == g)

    def validate_full(self) -> None:
        """Check the invariants of the complete 84-experiment table."""
        ids = sorted(b.id for b in self.binomials)
        if ids != list(range(1, 85)):
            raise DatasetError("ids must be exactly 1..84")
        counts = {p: sum(1 for b in self.binomials if b.p0 == p) for p in _ALLOWED_P0}
        want = {Fraction(3, 4): 42, Fraction(2, 3): 27, Fraction(1, 2): 15}
        if counts != want:
            raise DatasetError(f"per-ratio counts {counts} differ from {want}")
        if self.fisher_multinomials:
            df = sum(m.df for m in self.fisher_multinomials)
            df_pv = sum(m.df for m in self.fisher_group(ExperimentGroup.PLANT_VARIATION))
            if (df - df_pv, df) != (64, 84):
                raise DatasetError(f"Fisher grouping df totals {df - df_pv}/{df}, want 64/84")


# ---------------------------------------------------------------------------
# embedded data

_G = ExperimentGroup
_Q34, _Q23, _Q12 = Fraction(3, 4), Fraction(2, 3), Fraction(1, 2)

# (id, group, trait, n, n1, p0)
_BINOMIAL_ROWS = [
    (1, _G.RATIO_3_TO_1, "A", 7324, 5474, _Q34),
    (2, _G.RATIO_3_TO_1, "B", 8023, 6022, _Q34),
    (3, _G.RATIO_3_TO_1, "C", 929, 705, _Q34),
    (4, _G.RATIO_3_TO_1, "D", 1181, 882, _Q34),
    (5, _G.RATIO_3_TO_1, "E", 580, 428, _Q34),
    (6, _G.RATIO_3_TO_1, "F", 858, 651, _Q34),
    (7, _G.RATIO_3_TO_1, "G", 1064, 787, _Q34),
    (8, _G.PLANT_VARIATION, "A", 57, 45, _Q34),
    (9, _G.PLANT_VARIATION, "A", 35, 27, _Q34),
    (10, _G.PLANT_VARIATION, "A", 31, 24, _Q34),
    (11, _G.PLANT_VARIATION, "A", 29, 19, _Q34),
    (12, _G.PLANT_VARIATION, "A", 43, 32, _Q34),
    (13, _G.PLANT_VARIATION, "A", 32, 26, _Q34),
    (14, _G.PLANT_VARIATION, "A", 112, 88, _Q34),
    (15, _G.PLANT_VARIATION, "A", 32, 22, _Q34),
    (16, _G.PLANT_VARIATION, "A", 34, 28, _Q34),
    (17, _G.PLANT_VARIATION, "A", 32, 25, _Q34),
    (18, _G.PLANT_VARIATION, "B", 36, 25, _Q34),
    (19, _G.PLANT_VARIATION, "B", 39, 32, _Q34),
    (20, _G.PLANT_VARIATION, "B", 19, 14, _Q34),
    (21, _G.PLANT_VARIATION, "B", 97, 70, _Q34),
    (22, _G.PLANT_VARIATION, "B", 37, 24, _Q34),
    (23, _G.PLANT_VARIATION, "B", 26, 20, _Q34),
    (24, _G.PLANT_VARIATION, "B", 45, 32, _Q34),
    (25, _G.PLANT_VARIATION, "B", 53, 44, _Q34),
    (26, _G.PLANT_VARIATION, "B", 64, 50, _Q34),
    (27, _G.PLANT_VARIATION, "B", 62, 44, _Q34),
    (28, _G.BIFACTORIAL, "A", 556, 423, _Q34),
    (29, _G.BIFACTORIAL, 'B among "A"', 423, 315, _Q34),
    (30, _G.BIFACTORIAL, 'B among "a"', 133, 101, _Q34),
    (31, _G.TRIFACTORIAL, "A", 639, 480, _Q34),
    (32, _G.TRIFACTORIAL, 'B among "A"', 480, 367, _Q34),
    (33, _G.TRIFACTORIAL, 'B among "a"', 159, 122, _Q34),
    (34, _G.TRIFACTORIAL, "C among AaBb", 175, 127, _Q34),
    (35, _G.TRIFACTORIAL, "C among AaBB", 70, 52, _Q34),
    (36, _G.TRIFACTORIAL, "C among AABb", 78, 60, _Q34),
    (37, _G.TRIFACTORIAL, "C among AABB", 44, 30, _Q34),
    (38, _G.TRIFACTORIAL, "C among Aabb", 76, 60, _Q34),
    (39, _G.TRIFACTORIAL, "C among AAbb", 37, 26, _Q34),
    (40, _G.TRIFACTORIAL, "C among aaBb", 79, 55, _Q34),
    (41, _G.TRIFACTORIAL, "C among aaBB", 43, 33, _Q34),
    (42, _G.TRIFACTORIAL, "C among aabb", 37, 30, _Q34),
    (43, _G.RATIO_2_TO_1, "A", 565, 372, _Q23),
    (44, _G.RATIO_2_TO_1, "B", 519, 353, _Q23),
    (45, _G.RATIO_2_TO_1, "C", 100, 64, _Q23),
    (46, _G.RATIO_2_TO_1, "D", 100, 71, _Q23),
    (47, _G.RATIO_2_TO_1, "E", 100, 60, _Q23),
    (48, _G.RATIO_2_TO_1, "F", 100, 67, _Q23),
    (49, _G.RATIO_2_TO_1, "G", 100, 72, _Q23),
    (50, _G.RATIO_2_TO_1, "E", 100, 65, _Q23),
    (51, _G.BIFACTORIAL, 'A among "AB"', 301, 198, _Q23),
    (52, _G.BIFACTORIAL, 'A among "Ab"', 102, 67, _Q23),
    (53, _G.BIFACTORIAL, 'B among "aB"', 96, 68, _Q23),
    (54, _G.BIFACTORIAL, 'B among Aa"B"', 198, 138, _Q23),
    (55, _G.BIFACTORIAL, 'B among AA"B"', 103, 65, _Q23),
    (56, _G.TRIFACTORIAL, 'A among "AB"', 367, 245, _Q23),
    (57, _G.TRIFACTORIAL, 'A among "Ab"', 113, 76, _Q23),
    (58, _G.TRIFACTORIAL, 'B among "aB"', 122, 79, _Q23),
    (59, _G.TRIFACTORIAL, 'B among Aa"B"', 245, 175, _Q23),
    (60, _G.TRIFACTORIAL, 'B among AA"B"', 122, 78, _Q23),
    (61, _G.TRIFACTORIAL, "C among AaBb", 127, 78, _Q23),
    (62, _G.TRIFACTORIAL, "C among AaBB", 52, 38, _Q23),
    (63, _G.TRIFACTORIAL, "C among AABb", 60, 45, _Q23),
    (64, _G.TRIFACTORIAL, "C among AABB", 30, 22, _Q23),
    (65, _G.TRIFACTORIAL, "C among Aabb", 60, 40, _Q23),
    (66, _G.TRIFACTORIAL, "C among AAbb", 26, 17, _Q23),
    (67, _G.TRIFACTORIAL, "C among aaBb", 55, 36, _Q23),
    (68, _G.TRIFACTORIAL, "C among aaBB", 33, 25, _Q23),
    (69, _G.TRIFACTORIAL, "C among aabb", 30, 20, _Q23),
    (70, _G.GAMETIC_RATIOS, "A", 90, 43, _Q12),
    (71, _G.GAMETIC_RATIOS, "B among AA", 43, 20, _Q12),
    (72, _G.GAMETIC_RATIOS, "B among Aa", 47, 25, _Q12),
    (73, _G.GAMETIC_RATIOS, "A", 110, 57, _Q12),
    (74, _G.GAMETIC_RATIOS, "B among Aa", 57, 31, _Q12),
    (75, _G.GAMETIC_RATIOS, "B among aa", 53, 27, _Q12),
    (76, _G.GAMETIC_RATIOS, "A", 87, 44, _Q12),
    (77, _G.GAMETIC_RATIOS, "B among AA", 44, 25, _Q12),
    (78, _G.GAMETIC_RATIOS, "B among Aa", 43, 22, _Q12),
    (79, _G.GAMETIC_RATIOS, "A", 98, 49, _Q12),
    (80, _G.GAMETIC_RATIOS, "B among Aa", 49, 24, _Q12),
    (81, _G.GAMETIC_RATIOS, "B among aa", 49, 22, _Q12),
    (82, _G.GAMETIC_RATIOS, "G", 166, 87, _Q12),
    (83, _G.GAMETIC_RATIOS, "C among Gg", 87, 47, _Q12),
    (84, _G.GAMETIC_RATIOS, "C among gg", 79, 38, _Q12),
]

# 1:2:1 segregation of a single factor (AA, Aa, aa)
_SEG = (1, 2, 1)

# Bifactorial: rows BB, Bb, bb; columns AA, Aa, aa
_BIFACTORIAL_COUNTS = (
    38, 60, 28,
    65, 138, 68,
    35, 67, 30,
)

# Trifactorial, row-major as printed: B outer, C middle, A inner
_TRIFACTORIAL_COUNTS = (
    8, 14, 8, 22, 38, 25, 14, 18, 10,
    15, 49, 19, 45, 78, 36, 18, 48, 24,
    9, 20, 10, 17, 40, 20, 11, 16, 7,
)

_GAMETIC_COUNTS = (
    (20, 23, 25, 22),
    (31, 26, 27, 26),
    (25, 19, 22, 21),
    (24, 25, 22, 27),
    (47, 40, 38, 41),
)


def _product_ratios(k: int) -> tuple[int, ...]:
    """Ratios of k independent 1:2:1 factors, first factor outermost."""
    out = []
    for combo in itertools.product(_SEG, repeat=k):
        r = 1
        for c in combo:
            r *= c
        out.append(r)
    return tuple(out)


def _binomial_as_multinomial(b: BinomialExperiment) -> MultinomialExperiment:
    p = b.p0
    return MultinomialExperiment(
        label=f"exp{b.id}",
        group=b.group,
        counts=(b.n1, b.n - b.n1),
        ratios=(p.numerator, p.denominator - p.numerator),
    )


def _fisher_layout(binomials: Sequence[BinomialExperiment]) -> tuple[MultinomialExperiment, ...]:
    by_group = {g: [b for b in binomials if b.group == g] for g in GROUP_ORDER}
    units: list[MultinomialExperiment] = []
    units += [_binomial_as_multinomial(b) for b in by_group[_G.RATIO_3_TO_1]]
    units += [_binomial_as_multinomial(b) for b in by_group[_G.RATIO_2_TO_1]]
    units.append(MultinomialExperiment(
        "bifactorial", _G.BIFACTORIAL, _BIFACTORIAL_COUNTS, _product_ratios(2)))
    units += [
        MultinomialExperiment(f"gametic{i + 1}", _G.GAMETIC_RATIOS, c, (1, 1, 1, 1))
        for i, c in enumerate(_GAMETIC_COUNTS)
    ]
    units.append(MultinomialExperiment(
        "trifactorial", _G.TRIFACTORIAL, _TRIFACTORIAL_COUNTS, _product_ratios(3)))
    units += [_binomial_as_multinomial(b) for b in by_group[_G.PLANT_VARIATION]]
    return tuple(units)


_EMBEDDED: Dataset | None = None


def load_embedded() -> Dataset:
    """The full 84-experiment table together with Fisher's grouping."""
    global _EMBEDDED
    if _EMBEDDED is None:
        binomials = tuple(BinomialExperiment(*row) for row in _BINOMIAL_ROWS)
        ds = Dataset(binomials, _fisher_layout(binomials))
        ds.validate_full()
        _EMBEDDED = ds
    return _EMBEDDED


# ---------------------------------------------------------------------------
# CSV / JSON

CSV_HEADER = ("id", "group", "trait", "n", "n1", "p0_num", "p0_den")


def _parse_int(value: str, line: int, name: str) -> int:
    try:
        return int(value.strip())
    except ValueError:
        raise DatasetError(f"line {line}: field {name!r} is not an integer: {value!r}") from None


def parse_csv(text: bytes | str) -> Dataset:
    """Parse binomial experiments from CSV.

    Lines starting with ``#`` are ignored.

    The result carries no Fisher multinomial layout; it is a fragment
    with the binomial rows only.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DatasetError(f"input is not valid UTF-8: {exc}") from None
    # blank out comment lines so reported line numbers stay true
    lines = ["\n" if ln.startswith("#") else ln for ln in io.StringIO(text, newline="")]
    reader = csv.reader(io.StringIO("".join(lines)))
    header = None
    for row in reader:
        if row and any(c.strip() for c in row):
            header = row
            break
    if header is None:
        raise DatasetError("line 1: missing header")
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise DatasetError(f"line {reader.line_num}: expected header {','.join(CSV_HEADER)}")
    rows = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(CSV_HEADER):
            raise DatasetError(f"line {line}: expected {len(CSV_HEADER)} fields, got {len(row)}")
        rec = dict(zip(CSV_HEADER, row))
        try:
            group = ExperimentGroup(rec["group"].strip())
        except ValueError:
            raise DatasetError(f"line {line}: field 'group' has unknown value {rec['group']!r}") from None
        num = _parse_int(rec["p0_num"], line, "p0_num")
        den = _parse_int(rec["p0_den"], line, "p0_den")
        if den <= 0:
            raise DatasetError(f"line {line}: field 'p0_den' must be positive")
        try:
            rows.append(BinomialExperiment(
                id=_parse_int(rec["id"], line, "id"),
                group=group,
                trait=rec["trait"],
                n=_parse_int(rec["n"], line, "n"),
                n1=_parse_int(rec["n1"], line, "n1"),
                p0=Fraction(num, den),
            ))
        except DatasetError as exc:
            raise DatasetError(f"line {line}: {exc}") from None
    return Dataset(tuple(sorted(rows, key=lambda b: b.id)))


def export_csv(dataset: Dataset | Iterable[BinomialExperiment]) -> bytes:
    binomials = dataset.binomials if isinstance(dataset, Dataset) else tuple(dataset)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for b in sorted(binomials, key=lambda b: b.id):
        writer.writerow([b.id, b.group.value, b.trait, b.n, b.n1,
                         b.p0.numerator, b.p0.denominator])
    return buf.getvalue().encode("utf-8")


def export_json(dataset: Dataset) -> bytes:
    doc = {
        "binomials": [
            {"id": b.id, "group": b.group.value, "trait": b.trait, "n": b.n, "n1": b.n1,
             "p0": {"num": b.p0.numerator, "den": b.p0.denominator}}
            for b in sorted(dataset.binomials, key=lambda b: b.id)
        ],
        "fisher_multinomials": [
            {"label": m.label, "group": m.group.value, "counts": list(m.counts),
             "ratios": list(m.ratios), "df": m.df}
            for m in dataset.fisher_multinomials
        ],
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")
