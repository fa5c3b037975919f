"""Monte Carlo study of the maximum-likelihood estimators.

For each (theta, n) cell, ``replications`` samples are drawn with child
seeds ``derive_seed(seed, cell_index, replication)`` and refit. A cell reports
the average estimate (AE) and sample standard deviation (SD) of every
parameter over the replications whose fit converged. Failures are counted,
not retried.
"""

import csv
import io
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .distribution import BLFR, PARAM_NAMES, BlfrParams, Family
from .estimation import FitOptions, fit
from .exceptions import BlfrError, DomainError
from .sampling import RngState, derive_seed, sample_blfr

# The six (alpha, beta, a, b) designs of the reference simulation.
DESIGN_THETAS = tuple(
    BlfrParams(a=a, b=b, alpha=al, beta=be)
    for al, be, a, b in [
        (0.5, 0.5, 1, 1),
        (0.5, 0.5, 1, 2),
        (0.5, 0.5, 3, 1),
        (1, 2, 1, 3),
        (3, 2, 1, 1),
        (3, 3, 3, 3),
    ]
)

# Table columns follow the (alpha, beta, a, b) ordering of the reference layout.
TABLE_ORDER = ("alpha", "beta", "a", "b")
TABLE_COLUMNS = (
    ("n",)
    + tuple(f"{p}_true" for p in TABLE_ORDER)
    + tuple(f"ae_{p}" for p in TABLE_ORDER)
    + tuple(f"sd_{p}" for p in TABLE_ORDER)
    + ("convergence_rate", "replications_used")
)

LOW_CONVERGENCE = 0.5


class StudyWarning(UserWarning):
    """A cell kept fewer than half of its replications."""


@dataclass(frozen=True)
class StudyConfig:
    theta_grid: tuple = DESIGN_THETAS
    n_grid: tuple = (30, 200)
    replications: int = 500
    seed: int = 20_110_503
    family: Family = BLFR
    fit_options: FitOptions = FitOptions(n_starts=1)
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "theta_grid", tuple(self.theta_grid))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "family", Family.get(self.family))
        if not self.theta_grid or not self.n_grid:
            raise DomainError("theta_grid and n_grid must be non-empty")
        if not all(isinstance(t, BlfrParams) for t in self.theta_grid):
            raise DomainError("theta_grid entries must be BlfrParams")
        if int(self.replications) != self.replications or self.replications < 2:
            raise DomainError("replications must be an integer of at least 2")
        if any(n < self.family.k for n in self.n_grid):
            raise DomainError(f"every sample size must be at least {self.family.k}")
        if self.workers < 1:
            raise DomainError("workers must be at least 1")

    def cells(self):
        """``(index, theta, n)`` in theta-major order."""
        return [(i * len(self.n_grid) + j, th, n) for i, th in enumerate(self.theta_grid) for j, n in enumerate(self.n_grid)]

    def to_dict(self):
        return {
            "theta_grid": [t.to_dict() for t in self.theta_grid],
            "n_grid": list(self.n_grid),
            "replications": self.replications,
            "seed": self.seed,
            "family": self.family.tag,
            "n_starts": self.fit_options.n_starts,
            "workers": self.workers,
        }


@dataclass
class StudyCell:
    theta: BlfrParams
    n: int
    average_estimates: dict
    sd_estimates: dict
    convergence_rate: float
    replications_used: int
    failures: dict = field(default_factory=dict)

    def row(self):
        out = {"n": self.n}
        for p in TABLE_ORDER:
            out[f"{p}_true"] = getattr(self.theta, p)
        for p in TABLE_ORDER:
            out[f"ae_{p}"] = self.average_estimates.get(p, math.nan)
        for p in TABLE_ORDER:
            out[f"sd_{p}"] = self.sd_estimates.get(p, math.nan)
        out["convergence_rate"] = self.convergence_rate
        out["replications_used"] = self.replications_used
        return out


@dataclass
class StudyResult:
    cells: list
    seed: int = None
    replications: int = None
    family: Family = BLFR
    warnings: list = field(default_factory=list)

    def cell(self, theta, n):
        for c in self.cells:
            if c.theta == theta and c.n == n:
                return c
        raise KeyError((theta, n))

    def to_dict(self):
        def num(v):
            return None if not math.isfinite(v) else float(v)

        return {
            "seed": self.seed,
            "replications": self.replications,
            "family": self.family.tag,
            "columns": list(TABLE_COLUMNS),
            "rows": [{k: (num(v) if isinstance(v, float) else v) for k, v in c.row().items()} for c in self.cells],
            "failures": [dict(c.failures) for c in self.cells],
            "warnings": list(self.warnings),
        }


def _replicate(args):
    """One replication; returns the free-parameter estimates or a failure tag."""
    theta, n, seed, family, options = args
    try:
        x = sample_blfr(n, theta, RngState(seed))
        res = fit(family, x, options)
    except (BlfrError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return type(exc).__name__
    return [getattr(res.theta_hat, p) for p in PARAM_NAMES]


def _aggregate(theta, n, outcomes, family):
    good = np.array([o for o in outcomes if not isinstance(o, str)], dtype=float).reshape(-1, 4)
    failures = {}
    for o in outcomes:
        if isinstance(o, str):
            failures[o] = failures.get(o, 0) + 1
    used = good.shape[0]
    ae, sd = {}, {}
    for j, p in enumerate(PARAM_NAMES):
        if p not in family.free_params:
            continue
        col = good[:, j]
        ae[p] = float(np.mean(col)) if used else math.nan
        sd[p] = float(np.std(col, ddof=1)) if used >= 2 else math.nan
    return StudyCell(theta, n, ae, sd, used / len(outcomes), used, failures)


def run_study(config):
    """Run every cell of ``config`` and aggregate.

    Cells with a convergence rate below one half get a :class:`StudyWarning`,
    which is also recorded in ``result.warnings``. Results do not depend on
    ``config.workers``.
    """
    tasks, spans = [], []
    for idx, theta, n in config.cells():
        start = len(tasks)
        tasks.extend(
            (theta, n, derive_seed(config.seed, idx, r), config.family, config.fit_options)
            for r in range(config.replications)
        )
        spans.append((theta, n, start, len(tasks)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        if config.workers > 1:
            with ProcessPoolExecutor(config.workers) as pool:
                outcomes = list(pool.map(_replicate, tasks, chunksize=16))
        else:
            outcomes = [_replicate(t) for t in tasks]
    result = StudyResult([], config.seed, config.replications, config.family)
    for theta, n, lo, hi in spans:
        cell = _aggregate(theta, n, outcomes[lo:hi], config.family)
        result.cells.append(cell)
        if cell.convergence_rate < LOW_CONVERGENCE:
            msg = f"cell theta={theta.to_dict()} n={n}: only {cell.replications_used}/{hi - lo} fits converged"
            result.warnings.append(msg)
            warnings.warn(msg, StudyWarning, stacklevel=2)
    return result


def emit_study_table(result, fmt="csv"):
    """Table text in ``"csv"`` or ``"json"``; one row per (theta, n) cell."""
    if fmt == "json":
        return json.dumps(result.to_dict(), indent=2) + "\n"
    if fmt != "csv":
        raise DomainError(f"unknown table format {fmt!r}")
    buf = io.StringIO()
    writer = csv.DictWriter(buf, TABLE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for c in result.cells:
        writer.writerow({k: repr(float(v)) if isinstance(v, float) else v for k, v in c.row().items()})
    return buf.getvalue()


def _cell_from_row(row, family):
    theta = BlfrParams(**{p: float(row[f"{p}_true"]) for p in PARAM_NAMES})

    def val(key):
        v = row[key]
        return math.nan if v in (None, "") else float(v)

    free = family.free_params
    return StudyCell(
        theta=theta,
        n=int(row["n"]),
        average_estimates={p: val(f"ae_{p}") for p in free},
        sd_estimates={p: val(f"sd_{p}") for p in free},
        convergence_rate=float(row["convergence_rate"]),
        replications_used=int(row["replications_used"]),
    )


def load_study_table(text, family=BLFR):
    """Rebuild a :class:`StudyResult` from :func:`emit_study_table` output (CSV or JSON)."""
    family = Family.get(family)
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        family = Family.get(doc.get("family", family.tag))
        result = StudyResult(
            [_cell_from_row(r, family) for r in doc["rows"]],
            doc.get("seed"),
            doc.get("replications"),
            family,
            list(doc.get("warnings", [])),
        )
        for cell, fails in zip(result.cells, doc.get("failures", [])):
            cell.failures = dict(fails)
        return result
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != TABLE_COLUMNS:
        raise DomainError("study table header does not match the documented columns")
    return StudyResult([_cell_from_row(r, family) for r in reader], family=family)


def _parse_theta(spec):
    if isinstance(spec, dict):
        return BlfrParams(**{k: float(v) for k, v in spec.items()})
    vals = [float(v) for v in str(spec).replace(",", " ").split()]
    if len(vals) != 4:
        raise DomainError(f"a theta needs four values (alpha beta a b), got {spec!r}")
    al, be, a, b = vals
    return BlfrParams(a=a, b=b, alpha=al, beta=be)


def load_study_config(path, **overrides):
    """Read a :class:`StudyConfig` from JSON or ``key = value`` lines.

    Recognized keys: ``replications``, ``seed``, ``n_grid`` (sizes separated by
    commas or spaces), ``theta`` (one ``alpha beta a b`` set per line, may
    repeat; JSON takes a ``theta_grid`` list of objects or 4-lists),
    ``family``, ``n_starts`` and ``workers``. Keyword ``overrides`` win over
    the file.
    """
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
    else:
        doc = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise DomainError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in body.split("=", 1))
            if key == "theta":
                doc.setdefault("theta_grid", []).append(value)
            else:
                doc[key] = value
    known = {"replications", "seed", "n_grid", "theta_grid", "family", "n_starts", "workers"}
    unknown = set(doc) - known
    if unknown:
        raise DomainError(f"unknown study config keys: {sorted(unknown)}")
    doc.update({k: v for k, v in overrides.items() if v is not None})
    kw = {}
    if "theta_grid" in doc:
        kw["theta_grid"] = [
            _parse_theta(" ".join(map(str, t)) if isinstance(t, (list, tuple)) else t) for t in doc["theta_grid"]
        ]
    if "n_grid" in doc:
        ng = doc["n_grid"]
        kw["n_grid"] = [int(v) for v in (ng if isinstance(ng, list) else str(ng).replace(",", " ").split())]
    for key in ("replications", "seed", "workers"):
        if key in doc:
            kw[key] = int(doc[key])
    if "family" in doc:
        kw["family"] = doc["family"]
    cfg = StudyConfig(**kw)
    if "n_starts" in doc:
        cfg = replace(cfg, fit_options=FitOptions(n_starts=int(doc["n_starts"])))
    return cfg
