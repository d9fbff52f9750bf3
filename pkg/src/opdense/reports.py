"""Instruction-count report parsing and serialization.

A report is the plain-text format produced by instruction counting tools:
one line per opcode of the form ``<rank>. <count> <density>% <mnemonic>``
followed by an optional ``TOTAL <n>`` line. Parsed density percentages
are thrown away; they are recomputed later at higher precision from the
counts and the total.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    DuplicateMnemonic,
    EmptyReport,
    MalformedLine,
    NoFilesFound,
    UnresolvedLabel,
)
from .labels import ClassLabel, LabelScheme, infer_scheme
from .rounding import round_half_up_fraction

REPORT_LINE_RE = re.compile(r"^\s*(\d+)\.\s+(\d+)\s+(\d+\.\d+)%\s+(\S+)\s*$")
TOTAL_LINE_RE = re.compile(r"^\s*TOTAL\s+(\d+)\s*$")


@dataclass
class OpcodeHistogram:
    """Opcode mnemonic -> occurrence count for one sample."""

    sample_id: str
    counts: dict[str, int]
    total: int
    source: str  # "report" | "disassembly"

    def __post_init__(self):
        if not self.counts:
            raise EmptyReport(f"{self.sample_id}: no opcode rows")
        for name, count in self.counts.items():
            if not name or name != name.lower() or any(c.isspace() for c in name):
                raise MalformedLine(0, name, "mnemonic must be lowercase without whitespace")
            if count < 0:
                raise MalformedLine(0, name, "negative count")
        if self.total <= 0:
            raise EmptyReport(f"{self.sample_id}: nonpositive total")
        if self.total < sum(self.counts.values()):
            raise MalformedLine(0, str(self.total), "total smaller than the sum of counts")
        if self.source not in ("report", "disassembly"):
            raise ValueError(f"unknown source {self.source!r}")


@dataclass
class LabeledHistogram:
    histogram: OpcodeHistogram
    label: ClassLabel


def parse_report(text: str, sample_id: str) -> OpcodeHistogram:
    """Parse a report into an OpcodeHistogram.

    Counts may be zero padded; rank numbers need not be contiguous. An
    explicit TOTAL line, when present, must be the last non-blank line
    and wins over the sum of the rows (a report may be truncated).
    """
    if not text.strip():
        raise EmptyReport(f"{sample_id}: empty report")
    counts: dict[str, int] = {}
    explicit_total: int | None = None
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if explicit_total is not None:
            raise MalformedLine(line_no, line, "content after the TOTAL line")
        m = REPORT_LINE_RE.match(line)
        if m:
            mnemonic = m.group(4).lower()
            if mnemonic in counts:
                raise DuplicateMnemonic(mnemonic, line_no)
            counts[mnemonic] = int(m.group(2))
            continue
        t = TOTAL_LINE_RE.match(line)
        if t:
            explicit_total = int(t.group(1))
            continue
        raise MalformedLine(line_no, line)
    if not counts:
        raise EmptyReport(f"{sample_id}: no opcode rows")
    total = explicit_total if explicit_total is not None else sum(counts.values())
    if explicit_total is not None and explicit_total < sum(counts.values()):
        raise MalformedLine(0, str(explicit_total), "total smaller than the sum of counts")
    return OpcodeHistogram(sample_id=sample_id, counts=counts, total=total, source="report")


def format_report(histogram: OpcodeHistogram) -> str:
    """Serialize back to the report grammar: rows ranked by descending
    count (ties alphabetical), densities at two decimals, explicit TOTAL."""
    rows = sorted(histogram.counts.items(), key=lambda kv: (-kv[1], kv[0]))
    width = max(4, len(str(len(rows))))
    out = []
    for rank, (mnemonic, count) in enumerate(rows, start=1):
        pct = round_half_up_fraction(count * 100, histogram.total, 2)
        out.append(f"{rank:0{width}d}.\t{count:06d}\t{pct:.2f}%\t{mnemonic}")
    out.append(f"TOTAL\t{histogram.total}")
    return "\n".join(out) + "\n"


@dataclass
class ScanFailure:
    path: Path
    error: Exception


@dataclass
class ScanResult:
    histograms: list[LabeledHistogram]
    failures: list[ScanFailure] = field(default_factory=list)
    scheme: LabelScheme = LabelScheme.binary


def read_manifest(path: Path | str) -> dict[str, str]:
    """Two-column CSV ``sample_id,label``; a literal header row is skipped."""
    out: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or not any(cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise MalformedLine(0, ",".join(row), "manifest rows must have two columns")
            sid, label = row[0].strip(), row[1].strip()
            if (sid, label) == ("sample_id", "label"):
                continue
            out[sid] = label
    return out


def scan_directory(root: Path | str, manifest: dict[str, str] | None = None) -> ScanResult:
    """Parse every ``.txt`` report under ``root`` and label it.

    The manifest wins over the directory layout; otherwise the label is
    the immediate parent directory name. Output is ordered by sample_id
    ascending regardless of filesystem enumeration order; files that fail
    to parse or to resolve a valid label are reported, not fatal.
    """
    root = Path(root)
    files = sorted(root.rglob("*.txt"), key=lambda p: (p.stem, str(p)))
    if not files:
        raise NoFilesFound(f"no .txt report files under {root}")
    manifest = manifest or {}

    seen: set[str] = set()
    parsed: list[tuple[Path, OpcodeHistogram, str]] = []
    failures: list[ScanFailure] = []
    for path in files:
        sid = path.stem
        if sid in seen:
            failures.append(ScanFailure(path, UnresolvedLabel(sid, "duplicate sample id")))
            continue
        try:
            histogram = parse_report(path.read_text(encoding="utf-8"), sid)
        except Exception as exc:  # recorded per file, scan continues
            failures.append(ScanFailure(path, exc))
            continue
        seen.add(sid)
        if sid in manifest:
            raw_label = manifest[sid]
        elif path.parent != root:
            raw_label = path.parent.name
        else:
            failures.append(ScanFailure(path, UnresolvedLabel(sid, "file sits in the root and has no manifest entry")))
            continue
        parsed.append((path, histogram, raw_label))

    try:
        scheme = infer_scheme(lbl for _, _, lbl in parsed)
    except Exception:
        # Mixed or unknown labels: keep whatever fits the family scheme,
        # fail the rest individually.
        scheme = LabelScheme.family

    histograms: list[LabeledHistogram] = []
    for path, histogram, raw_label in parsed:
        try:
            label = ClassLabel(scheme, raw_label)
        except Exception:
            failures.append(ScanFailure(path, UnresolvedLabel(histogram.sample_id, f"label {raw_label!r} fits no scheme")))
            continue
        histograms.append(LabeledHistogram(histogram, label))

    histograms.sort(key=lambda lh: lh.histogram.sample_id)
    return ScanResult(histograms=histograms, failures=failures, scheme=scheme)
