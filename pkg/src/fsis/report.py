"""Run scenario tasks and write deterministic report bundles.

A bundle is a directory with

* ``summary.txt``: verdicts, bounds, caveats and effective settings;
* one CSV per task table (per-node curves, per-pair results);
* ``values.csv``: every number quoted in the summary, keyed by task;
* ``manifest.json``: input hash, effective settings, output hashes, exit code.

Numbers are written in their shortest round-trip decimal form, so two runs
of the same scenario with the same build are byte-identical.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fibers import FrequencyGrid, GridWarning, check_grid, fiber_stack
from .gramian import frame_analysis
from .sampling import (SamplingReport, UnionModel, fd_union_report, sis_stability,
                       sis_union_report)
from .scenario import Scenario
from .subspaces import SubspacePair, Verdict, friedrichs_angle, friedrichs_from_frames

__all__ = ["ReportBundle", "TaskError", "run", "spectrum_curve", "format_number",
           "EXIT_OK", "EXIT_ERROR", "EXIT_NEGATIVE"]

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 2

RIESZ_MISSING = "dimension function non-constant: Riesz basis of translates does not exist"


class TaskError(RuntimeError):
    pass


def format_number(x) -> str:
    """Shortest round-trip decimal text; ``nan`` for missing values."""
    if x is None:
        return "nan"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else format_number(v) for v in row) + "\n")
    return buf.getvalue()


def _omega_header(grid: FrequencyGrid) -> list[str]:
    return ["omega"] if grid.n == 1 else [f"omega_{i + 1}" for i in range(grid.n)]


def _omega_cells(grid: FrequencyGrid) -> list[list[float]]:
    return grid.nodes.tolist()


@dataclass
class ReportBundle:
    summary: str
    tables: dict[str, str]
    manifest: dict
    exit_code: int

    def write(self, output_dir: str | Path) -> Path:
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.txt").write_text(self.summary, encoding="utf-8", newline="\n")
        for name, text in self.tables.items():
            (out / name).write_text(text, encoding="utf-8", newline="\n")
        (out / "manifest.json").write_text(
            json.dumps(self.manifest, indent=2, sort_keys=True) + "\n",
            encoding="utf-8", newline="\n")
        return out


@dataclass
class _Builder:
    lines: list[str] = field(default_factory=list)
    values: list[tuple[str, str, str]] = field(default_factory=list)
    tables: dict[str, str] = field(default_factory=dict)
    negative: bool = False
    task: str = "run"

    def text(self, line: str = ""):
        self.lines.append(line)

    def value(self, label: str, key: str, x, suffix: str = ""):
        s = format_number(x)
        self.values.append((self.task, key, s))
        self.lines.append(f"  {label} = {s}{suffix}")

    def table(self, name: str, header: list[str], rows):
        self.tables[name] = _csv(header, rows)
        self.lines.append(f"  table: {name}")


def spectrum_curve(subspace, sampling_set, grid: FrequencyGrid, tol) -> list[tuple]:
    """Rows ``(omega..., sigma2_min_nonzero, sigma2_max, rank, dim)``, one per node.

    The squared singular values are those of the cross-correlation between
    the canonical Parseval fibers of ``subspace`` and the fibers of the
    sampling set; NaN marks nodes without a nonzero singular value.
    """
    res = sis_stability(list(subspace), list(sampling_set), grid, tol)
    return [tuple(w) + (res.sigma2_min[i], res.sigma2_max[i], int(res.ranks[i]), int(res.dims[i]))
            for i, w in enumerate(_omega_cells(grid))]


def _union_tables(b: _Builder, prefix: str, rep: SamplingReport):
    rows = []
    for p in rep.pairs:
        st = p.stability
        rows.append((p.gamma, p.theta, "+".join(p.generators), p.length,
                     p.rank_condition, str(p.injective).lower(), str(p.label),
                     str(p.closedness), p.friedrichs, st.stable, st.alpha, st.beta))
    b.table(f"{prefix}_pairs.csv",
            ["gamma", "theta", "generators", "length", "rank_condition", "injective",
             "label", "closedness", "friedrichs", "stable", "alpha", "beta"], rows)
    if rep.grid is None:
        return
    for p in rep.pairs:
        st = p.stability
        cells = _omega_cells(rep.grid)
        b.tables[f"{prefix}_{p.gamma}_{p.theta}.csv"] = _csv(
            _omega_header(rep.grid) + ["dim", "rank", "sigma2_min", "sigma2_max"],
            [tuple(w) + (int(st.dims[i]), int(st.ranks[i]), st.sigma2_min[i], st.sigma2_max[i])
             for i, w in enumerate(cells)])


def _report_union(b: _Builder, rep: SamplingReport):
    for p in rep.pairs:
        st = p.stability
        b.text(f"  pair ({p.gamma}, {p.theta}): injectivity {_fmt_inj(p.injective)} "
               f"[{p.label}], stability {'yes' if st.stable else 'no'}"
               + (f" ({st.reason})" if st.reason and not st.stable else ""))
        if p.failing_nodes and rep.grid is not None:
            b.value(f"pair ({p.gamma}, {p.theta}) rank-test failures", f"{p.gamma}.{p.theta}.failing_nodes",
                    len(p.failing_nodes), " node(s)")
    inj = rep.injective
    b.text(f"  union injective: {_fmt_inj(inj)}")
    b.text(f"  union stable: {'yes' if rep.stable else 'no'}")
    if rep.stable:
        b.value("union alpha", "alpha", rep.alpha)
        b.value("union beta", "beta", rep.beta)
    b.value("sampling set size #I", "n_samples", rep.n_samples)
    b.value("sample-count lower bound", "sample_lower_bound", rep.sample_lower_bound)
    if not rep.meets_lower_bound:
        b.text("  LOWER-BOUND VIOLATION: #I is smaller than the largest pair length; "
               "no stable (and, for closed sums, no injective) sampling is possible")
    b.value("Bessel bound of sampling set", "bessel_bound", rep.bessel_bound)
    for note in rep.notes:
        b.text(f"  note: {note}")
    if inj is not True or not rep.stable:
        b.negative = True


def _fmt_inj(v) -> str:
    return {True: "yes", False: "no", None: "undetermined"}[v]


def _run_task(b: _Builder, i: int, task: dict, sc: Scenario, grid: FrequencyGrid, tol):
    kind = task["task"]
    prefix = f"task{i}_{kind.replace('-', '_')}"
    if kind == "analyze-union":
        names = task.get("subspaces", list(sc.subspaces))
        b.text(f"Task {kind} #{i}: union of {', '.join(names)}")
        if sc.mode == "finite":
            model = UnionModel({k: np.stack([sc.generators[g] for g in sc.subspaces[k]], axis=1)
                                for k in names})
            Psi = np.stack([sc.generators[g] for g in sc.sampling_set], axis=1)
            rep = fd_union_report(model, Psi, tol)
        else:
            model = UnionModel({k: sc.subspace(k) for k in names})
            rep = sis_union_report(model, sc.sampling(), grid, tol)
        _report_union(b, rep)
        _union_tables(b, prefix, rep)
    elif kind == "analyze-sis":
        name = task["subspace"]
        b.text(f"Task {kind} #{i}: subspace {name}")
        rep = sis_union_report(UnionModel({name: sc.subspace(name)}), sc.sampling(), grid, tol)
        _report_union(b, rep)
        _union_tables(b, prefix, rep)
    elif kind == "dimension":
        name = task["subspace"]
        b.text(f"Task {kind} #{i}: subspace {name}")
        fa = frame_analysis(sc.subspace(name), grid, tol.rank_tol, tol.spec_tol)
        dims = fa.dim_fn.values
        b.value("dimension function min", "dim_min", int(dims.min()) if dims.size else 0)
        b.value("dimension function max (length estimate)", "dim_max", fa.length_estimate)
        b.value("Bessel bound beta", "beta", fa.bessel_bound)
        b.value("frame lower bound alpha", "alpha", fa.frame_lower)
        b.text(f"  frame sequence of translates: {'yes' if fa.is_frame_sequence else 'no'}")
        if not fa.dim_fn.is_constant:
            b.text(f"  {RIESZ_MISSING}")
        elif fa.is_riesz:
            b.text("  dimension function constant: the translates form a Riesz basis")
        else:
            b.text("  dimension function constant: a Riesz basis of translates exists "
                   "(these generators do not form one)")
        b.table(f"{prefix}_{name}.csv", _omega_header(grid) + ["dim"],
                [tuple(w) + (int(dims[j]),) for j, w in enumerate(_omega_cells(grid))])
    elif kind == "spectrum-curve":
        name = task["subspace"]
        b.text(f"Task {kind} #{i}: subspace {name} against the sampling set")
        rows = spectrum_curve(sc.subspace(name), sc.sampling(), grid, tol)
        b.table(f"{prefix}_{name}.csv",
                _omega_header(grid) + ["sigma2_min_nonzero", "sigma2_max", "rank", "dim"], rows)
    elif kind == "angle":
        U, V = task["U"], task["V"]
        b.text(f"Task {kind} #{i}: Friedrichs angle between {U} and {V}")
        rep = friedrichs_angle(SubspacePair(sc.subspace(U), sc.subspace(V)), grid, tol)
        header = _omega_header(grid) + ["dixmier", "friedrichs"]
        cols = [rep.dixmier, rep.friedrichs]
        if "ominus" in task:
            XU = [sc.generators[g] for g in task["ominus"]["U"]]
            XV = [sc.generators[g] for g in task["ominus"]["V"]]
            window = SubspacePair(XU, XV).window
            SU, SV = fiber_stack(XU, grid, window), fiber_stack(XV, grid, window)
            supplied = np.array([friedrichs_from_frames(SU[j], SV[j], tol.spec_tol)
                                 for j in range(grid.size)])
            header.append("friedrichs_supplied")
            cols.append(supplied)
            b.value("Friedrichs cosine from supplied complement generators (grid max)",
                    "friedrichs_supplied_max", float(supplied.max()) if supplied.size else 0.0)
        b.value("Friedrichs cosine (grid max)", "friedrichs_max", rep.c)
        b.value("Dixmier cosine (grid max)", "dixmier_max", rep.c0)
        b.value("closedness threshold eps", "close_eps", rep.close_eps)
        b.text(f"  verdict: {rep.verdict} ({rep.caveat})")
        if rep.indeterminate_nodes:
            b.value("indeterminate nodes", "indeterminate_nodes", len(rep.indeterminate_nodes))
        b.table(f"{prefix}_{U}_{V}.csv", header,
                [tuple(w) + tuple(c[j] for c in cols) for j, w in enumerate(_omega_cells(grid))])
        if rep.verdict is not Verdict.CLOSED:
            b.negative = True
    b.text()


def run(sc: Scenario, output_dir: str | Path | None = None, grid_M: int | None = None,
        **tolerance_overrides) -> ReportBundle:
    """Execute every task of ``sc`` in order and build (and optionally write) the bundle.

    Keyword overrides (``rank_tol``, ``spec_tol``, ``conv_eps``, ``max_iter``,
    ``close_eps``) and ``grid_M`` replace the scenario's values; ``None``
    keeps them. Task failures raise :class:`TaskError` naming the task.
    """
    tol = sc.tolerances.updated(**tolerance_overrides)
    M = grid_M if grid_M is not None else sc.M
    b = _Builder()
    b.text(f"fsis report for scenario '{sc.name}' ({sc.mode} mode)")
    b.task = "settings"
    if sc.mode == "sis":
        grid = FrequencyGrid(sc.n, M)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", GridWarning)
            grid = check_grid(grid, list(sc.generators.values()))
        b.value("dimension n", "n", sc.n)
        b.value("grid nodes per axis M", "M", M)
        b.value("grid offset", "grid_offset", grid.offset)
        for w in caught:
            b.text(f"  warning: {w.message}")
    else:
        grid = None
        b.value("ambient dimension N", "N", sc.ambient_dim)
    for key, val in tol.as_dict().items():
        b.value(key, key, val)
    b.text("  verdicts are numerical certificates on a finite grid, not proofs")
    b.text()
    for i, task in enumerate(sc.tasks, start=1):
        b.task = f"task{i}"
        try:
            _run_task(b, i, task, sc, grid, tol)
        except Exception as exc:
            raise TaskError(f"task #{i} ({task['task']}): {type(exc).__name__}: {exc}") from exc
    if not sc.tasks:
        b.text("no tasks")
    b.tables["values.csv"] = _csv(["task", "key", "value"], b.values)
    summary = "\n".join(b.lines).rstrip("\n") + "\n"
    exit_code = EXIT_NEGATIVE if b.negative else EXIT_OK
    files = {"summary.txt": summary, **b.tables}
    manifest = {
        "scenario": sc.name,
        "input_sha256": sc.input_sha256,
        "mode": sc.mode,
        "grid": None if grid is None else {"n": grid.n, "M": grid.M, "offset": grid.offset},
        "tolerances": tol.as_dict(),
        "exit_code": exit_code,
        "outputs": [{"file": name, "sha256": hashlib.sha256(text.encode()).hexdigest()}
                    for name, text in sorted(files.items())],
    }
    bundle = ReportBundle(summary, dict(b.tables), manifest, exit_code)
    if output_dir is not None:
        bundle.write(output_dir)
    return bundle
