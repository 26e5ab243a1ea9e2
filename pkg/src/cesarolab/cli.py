"""Batch front end: scenario config in, deterministic CSV / JSON reports out.

Usage::

    cesarolab analyze-sequence block_counterexample J=8 --out runs/block
    cesarolab analyze-system swap
    cesarolab tensor-check P33_swap u=0.25 v=0.75
    cesarolab verify-theorems --seed 42 --out runs/suite
    cesarolab catalog list

Each scenario resolves to one JSON config (see ``resolve_config``) that is
echoed into ``report.json``; feeding that echo back through ``--config``
reproduces the run.  With ``--out DIR`` every table goes to ``DIR/<table>.csv``
plus ``DIR/report.json`` and nothing is written to stdout.

Exit codes: 0 success, 1 input error, 2 an undecided verdict under --strict.
"""

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import catalog as cat
from . import sequences as seqs
from . import systems
from . import tensor_norms as tn
from .numerics import spectrum

log = logging.getLogger("cesarolab")

SCENARIOS = ("analyze-sequence", "analyze-system", "tensor-check", "verify-theorems")
OBJECT_KEYS = ("catalog", "matrix", "terms", "pair", "tensor")
DEFAULTS = {"tol": seqs.DEFAULT_TOL, "seed": 0, "strict": False,
            "exact_max_n": seqs.EXACT_MAX_N}
SUITE_DEFAULTS = {"pairs": 100, "orbits": 100, "brackets": 200, "horizon": 10000}

EXIT_OK, EXIT_INPUT, EXIT_UNDECIDED = 0, 1, 2


class ConfigError(ValueError):
    """Malformed scenario config; the message names the offending field."""


# ----------------------------------------------------------------- reports

@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)

    def add(self, *row):
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} cells, table has {len(self.columns)} columns")
        self.rows.append(list(row))


@dataclass
class Report:
    metadata: dict
    tables: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def verdict(self, name, value, **witness):
        if isinstance(value, (bool, np.bool_)):
            value = "yes" if value else "no"
        value = getattr(value, "value", value)
        if value not in ("yes", "no", "undecided"):
            raise ValueError(f"bad verdict {value!r}")
        self.verdicts[name] = {"verdict": value, "witness": _jsonable(witness)}

    @property
    def undecided(self):
        return sorted(k for k, v in self.verdicts.items() if v["verdict"] == "undecided")

    def as_json(self):
        body = {"metadata": self.metadata, "verdicts": self.verdicts, "notes": self.notes,
                "tables": {k: f"{k}.csv" for k in self.tables}}
        return json.dumps(_jsonable(body), indent=2, sort_keys=True) + "\n"

    def write(self, out_dir):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, table in self.tables.items():
            emit_csv(table, out / f"{name}.csv")
        with open(out / "report.json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.as_json())


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if v == 0.0:
            v = 0.0  # no "-0"
        return format(v, ".12g")
    if isinstance(v, (complex, np.complexfloating)):
        raise TypeError("split complex values into real and imaginary columns")
    if v is None:
        return ""
    return str(v)


def csv_text(table):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def emit_csv(table, path):
    """UTF-8, header row, 12 significant digits, LF line endings."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(table))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return float(format(v, ".12g")) if np.isfinite(v) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    if hasattr(obj, "value"):
        return obj.value
    return obj


# ----------------------------------------------------------------- config

def parse_params(items):
    """key=value strings to a dict; values are JSON when they parse as JSON."""
    out = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"parameter {item!r}: expected key=value")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def load_config(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    # a report.json is accepted too: its config echo is a complete config
    if "metadata" in cfg and isinstance(cfg["metadata"], dict) and "config" in cfg["metadata"]:
        cfg = cfg["metadata"]["config"]
    return cfg


def _grid_arg(text):
    try:
        grid = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be comma-separated integers: {text!r}")
    return grid


def resolve_config(scenario, file_cfg=None, name=None, params=None, flags=None):
    """Merge defaults < config file < positional object < flags and validate."""
    cfg = {"scenario": scenario, **DEFAULTS, "grid": None, "object": None, "options": {}}
    if file_cfg:
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        if file_cfg.get("scenario", scenario) != scenario:
            raise ConfigError(f"field 'scenario': config says {file_cfg['scenario']!r}, "
                              f"command is {scenario!r}")
        cfg.update(file_cfg)
        cfg["options"] = dict(file_cfg.get("options") or {})
    if name is not None:
        cfg["object"] = {"catalog": name, "params": dict(params or {})}
    elif params:
        if not cfg["object"] or "catalog" not in cfg["object"]:
            raise ConfigError("key=value parameters need a catalog name")
        cfg["object"] = {**cfg["object"],
                         "params": {**cfg["object"].get("params", {}), **params}}
    for k, v in (flags or {}).items():
        if v is not None:
            cfg[k] = v
    _validate(cfg)
    return cfg


def _validate(cfg):
    scenario = cfg["scenario"]
    if scenario not in SCENARIOS:
        raise ConfigError(f"field 'scenario': must be one of {SCENARIOS}")
    try:
        cfg["tol"] = float(cfg["tol"])
    except (TypeError, ValueError):
        raise ConfigError("field 'tol': must be a number") from None
    if not cfg["tol"] > 0:
        raise ConfigError("field 'tol': must be positive")
    for key in ("seed", "exact_max_n"):
        if not isinstance(cfg[key], int) or isinstance(cfg[key], bool):
            raise ConfigError(f"field '{key}': must be an integer")
    if not isinstance(cfg["strict"], bool):
        raise ConfigError("field 'strict': must be true or false")
    if cfg["grid"] is not None:
        g = cfg["grid"]
        if not isinstance(g, list) or not g or not all(isinstance(v, int) for v in g):
            raise ConfigError("field 'grid': must be a non-empty list of integers")
        if g[0] < 1 or any(b <= a for a, b in zip(g, g[1:])):
            raise ConfigError("field 'grid': must be strictly increasing positive integers")
    if not isinstance(cfg["options"], dict):
        raise ConfigError("field 'options': must be an object")
    obj = cfg["object"]
    if scenario == "verify-theorems":
        if obj is not None:
            raise ConfigError("field 'object': verify-theorems draws random systems, "
                              "it takes no object")
        return
    if not isinstance(obj, dict):
        raise ConfigError("field 'object': required (catalog name or inline data)")
    present = [k for k in OBJECT_KEYS if k in obj]
    if len(present) != 1:
        raise ConfigError(f"field 'object': exactly one of {OBJECT_KEYS} required, "
                          f"got {present or 'none'}")
    if "catalog" in obj:
        try:
            cat.get(obj["catalog"])
        except KeyError as e:
            raise ConfigError(f"field 'object.catalog': {e.args[0]}") from None


# ----------------------------------------------------------------- objects

def _build(cfg):
    """(kind, object) for the config's object spec."""
    obj = cfg["object"]
    if "catalog" in obj:
        entry = cat.get(obj["catalog"])
        try:
            built = entry.build(**obj.get("params", {}))
        except KeyError as e:
            raise ConfigError(f"field 'object.params': {e.args[0]}") from None
        except TypeError as e:
            raise ConfigError(f"field 'object.params': {e}") from None
        return entry.kind, built
    if "matrix" in obj:
        return "system", systems.DynSystem.from_matrix(_array(obj["matrix"], "object.matrix"),
                                                       obj.get("label", "inline"))
    if "pair" in obj:
        pair = obj["pair"]
        if not isinstance(pair, list) or len(pair) != 2:
            raise ConfigError("field 'object.pair': must hold exactly two matrices")
        return "system-pair", tuple(
            systems.DynSystem.from_matrix(_array(m, f"object.pair[{i}]"), f"inline{i}")
            for i, m in enumerate(pair))
    if "terms" in obj:
        tag = obj.get("norm", "euclidean")
        if tag not in seqs.NORM_TAGS:
            raise ConfigError(f"field 'object.norm': must be one of {seqs.NORM_TAGS}")
        return "sequence", seqs.BoundedSequence.from_array(
            _array(obj["terms"], "object.terms"), tag, obj.get("bound"), label="inline")
    return "tensor", _array(obj["tensor"], "object.tensor")


def _array(data, where):
    try:
        a = np.array(data, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"field '{where}': must be a rectangular numeric array") from None
    if a.ndim != 2:
        raise ConfigError(f"field '{where}': must be two-dimensional")
    return a


def _sequence_grid(cfg, seq, default):
    if cfg["grid"] is not None:
        return cfg["grid"]
    grid = [n for n in default if n <= seq.horizon]
    if not grid or grid[-1] < seq.horizon:
        grid.append(seq.horizon)
    return grid


# ----------------------------------------------------------------- scenarios

def analyze_sequence(cfg, report):
    kind, obj = _build(cfg)
    opts = cfg["options"]
    default_grid = seqs.DEFAULT_GRID
    if kind == "system":
        d = obj.algebra_dim
        x = opts.get("x", [1.0] + [0.0] * (d - 1))
        horizon = max(cfg["grid"] or [opts.get("horizon", 10000)])
        obj = cat.orbit_sequence(obj, x, bool(opts.get("centered", True)), horizon)
        opts.setdefault("x", x)
    elif kind != "sequence":
        raise ConfigError(f"field 'object': analyze-sequence needs a sequence or a system, "
                          f"got {kind}")
    seq = obj
    if getattr(seq, "block_boundaries", None) is not None:
        default_grid = [b - 1 for b in seq.block_boundaries[1:]]
    grid = _sequence_grid(cfg, seq, default_grid)
    cfg["grid"] = [int(n) for n in grid]

    v = seqs.classify(seq, grid, cfg["tol"], exact_max_n=cfg["exact_max_n"])
    cols = v.profile.as_columns()
    t = Table(list(cols))
    for i in range(len(grid)):
        t.add(*(cols[c][i] for c in cols))
    report.tables["profile"] = t

    coords = seq.space.coordinate_functionals()
    per_f = Table(["n"] + [f"W_e{i + 1}" for i in range(len(coords))])
    W = [seqs.weak_profile(seq, f, grid) for f in coords]
    for i, n in enumerate(grid):
        per_f.add(n, *(w[i] for w in W))
    report.tables["weak_by_coordinate"] = per_f

    d = v.details
    report.verdict("weak_mixing", v.weak_mixing, fresh_functionals=d["fresh_functionals"],
                   final_W=cols["W"][-1])
    report.verdict("uniform_weak_mixing", v.uniform_weak_mixing,
                   tail_lower=d["uniform_tail_lower"], tail_upper=d["uniform_tail_upper"])
    report.verdict("weak_ergodic", v.weak_ergodic,
                   fresh_functionals=d["fresh_functionals_weak_ergodic"], final_WE=cols["WE"][-1])
    report.verdict("ergodic", v.ergodic, tail=d["ergodic_tail"])
    report.notes["sequence"] = {"label": seq.label, "dim": seq.space.dim,
                                "norm": seq.space.norm_tag, "bound": seq.bound,
                                "horizon": seq.horizon, "window": list(v.window),
                                "unconstrained": d["unconstrained"]}


def _system_tables(report, sysm, mix, prefix=""):
    rep = mix.peripheral_eigenvalues
    spec = spectrum(sysm.matrix)
    t = Table(["index", "re", "im", "abs", "algebraic", "geometric", "peripheral"])
    periph = {complex(z) for z in rep}
    for i, lam in enumerate(spec.distinct):
        t.add(i, lam.real, lam.imag, abs(lam), spec.algebraic_mults[i],
              spec.geometric_mults[i], complex(lam) in periph)
    report.tables[f"{prefix}spectrum"] = t

    E = mix.projection.matrix
    t = Table(["row"] + [f"c{j}" for j in range(E.shape[1])])
    for i, row in enumerate(E):
        t.add(i, *np.real(row))
    report.tables[f"{prefix}projection"] = t

    states = systems.state_set_probe(sysm)
    t = Table(["state"] + [f"p{j}" for j in range(sysm.algebra_dim)])
    for i, s in enumerate(states.extreme_states):
        t.add(i, *s)
    report.tables[f"{prefix}invariant_states"] = t
    return states


def analyze_system(cfg, report):
    kind, sysm = _build(cfg)
    if kind != "system":
        raise ConfigError(f"field 'object': analyze-system needs a system, got {kind}")
    grid = cfg["grid"] or list(systems.DEVIATION_GRID)
    cfg["grid"] = [int(n) for n in grid]
    d = sysm.algebra_dim
    opts = cfg["options"]
    x = opts.setdefault("x", [1.0] + [0.0] * (d - 1))
    phi = opts.setdefault("phi", [1.0] + [0.0] * (d - 1))

    mix = systems.classify_system(sysm, cfg["tol"], grid, strict=False)
    states = _system_tables(report, sysm, mix)

    prof = systems.deviation_profile(sysm, x, phi, grid)
    D = systems.deviation_matrices(sysm.matrix, mix.projection.matrix, grid)
    t = Table(["n", "deviation", "max_coordinate_deviation"])
    for i, n in enumerate(grid):
        t.add(n, prof[i], D[i].max())
    report.tables["deviation_profile"] = t

    wm = ("undecided" if not mix.method_agreement else mix.unique_E_weak_mixing)
    report.verdict("ergodic", mix.unique_E_ergodic, ergodic_gap=mix.ergodic_gap)
    report.verdict("weak_mixing", wm, peripheral=mix.peripheral_eigenvalues, spectral=mix.spectral_weak_mixing,
                   direct=mix.direct_weak_mixing, direct_rate=mix.direct_rate,
                   worst_pair={"x": f"e{mix.worst_pair[0]}", "phi": f"e{mix.worst_pair[1]}"})
    report.verdict("faithful_invariant_state", states.faithful,
                   closed_classes=states.closed_classes)
    report.notes["system"] = {"label": sysm.label, "dim": d,
                              "fixed_space_dim": int(mix.projection.range_basis.shape[0]),
                              "defects": systems.projection_defects(mix.projection.matrix,
                                                                    sysm.matrix)}


def _tensor_object(cfg, report, w):
    opts = cfg["options"]
    t = Table(["tag", "norm", "dual_norm"])
    for tag in tn.TAGS:
        t.add(tag, tn.cross_norm(w, tag), tn.dual_cross_norm(w, tag))
    report.tables["cross_norms"] = t

    res = tn.elementary_ball_membership(w)
    member = isinstance(res, tn.BallMembershipCertificate)
    if member:
        dx, dy = w.shape
        t = Table(["k", "lambda"] + [f"f{i}" for i in range(dx)] + [f"g{j}" for j in range(dy)])
        for k, lam in enumerate(res.lambdas):
            t.add(k, lam, *np.real(res.f[k]), *np.real(res.g[k]))
        report.tables["certificate"] = t
        report.verdict("hull_member", True, residual=res.residual)
    else:
        report.verdict("hull_member", False, nuclear_norm=res.nuclear_norm)

    t = Table(["tag", "holds", "samples"])
    for tag in tn.TAGS:
        c = tn.condition_I_check(*w.shape, tag, samples=int(opts.get("samples", 200)),
                                 rng_seed=cfg["seed"])
        t.add(tag, c.holds, c.samples_checked)
        report.verdict(f"condition_I_{tag}", c.holds,
                       witness=None if c.witness is None else c.witness)
    report.tables["condition_I"] = t

    if "radius" in opts:
        ok = tn.ball_inclusion_probe(w, float(opts["radius"]), int(opts.get("samples", 200)),
                                     cfg["seed"])
        report.verdict("ball_inclusion", ok, radius=float(opts["radius"]))


def tensor_check(cfg, report):
    kind, obj = _build(cfg)
    if kind == "tensor":
        _tensor_object(cfg, report, obj)
        return
    if kind != "system-pair":
        raise ConfigError(f"field 'object': tensor-check needs a system pair or a tensor, "
                          f"got {kind}")
    a, b = obj
    tol = cfg["tol"]
    fac = systems.e_factorization_check(a, b)
    prod = systems.tensor_system(a, b)
    mix_t = systems.classify_system(prod, tol, strict=False)
    _system_tables(report, prod, mix_t, "tensor_")

    t = Table(["row"] + [f"c{j}" for j in range(fac.rhs.shape[1])])
    for i, row in enumerate(fac.rhs):
        t.add(i, *row)
    report.tables["product_of_projections"] = t

    report.verdict("e_factorizes", fac.factorizes, error=fac.error,
                   fixed_dim_tensor=fac.fixed_dim_tensor,
                   fixed_dim_product=fac.fixed_dim_product)
    ma = systems.theorem_mix_a_check(a, b, tol)
    report.verdict("mix_a_equivalence", ma.holds and ma.method_agreement,
                   weak_mixing_a=ma.weak_mixing_a, weak_mixing_b=ma.weak_mixing_b,
                   weak_mixing_tensor=ma.weak_mixing_tensor,
                   method_agreement=ma.method_agreement)
    report.verdict("tensor_weak_mixing",
                   mix_t.unique_E_weak_mixing if mix_t.method_agreement else "undecided",
                   direct_rate=mix_t.direct_rate)
    mc = systems.theorem_mix_c_check(a, b, mix_tol=tol)
    if mc.skipped:
        report.notes["mix_c"] = {"skipped": True, "reason": mc.reason}
    else:
        report.verdict("mix_c_tensor_ergodic", mc.holds, residual=mc.residual, n=mc.n)
    shapes = (a.algebra_dim, b.algebra_dim)
    t = Table(["tag", "holds", "samples"])
    for tag in tn.TAGS:
        c = tn.condition_I_check(*shapes, tag, samples=int(cfg["options"].get("samples", 200)),
                                 rng_seed=cfg["seed"])
        t.add(tag, c.holds, c.samples_checked)
    report.tables["condition_I"] = t


# ----------------------------------------------------------------- suites

def _case_seeds(seed, stream, count):
    ss = np.random.SeedSequence([seed, stream])
    return [int(s.generate_state(1)[0]) for s in ss.spawn(count)]


def random_pairs(seed, count):
    """Seeded (a, b) system pairs with dims 2..4 cycling through all profile pairs."""
    out = []
    for i, s in enumerate(_case_seeds(seed, 1, count)):
        rng = np.random.default_rng(s)
        da, db = (int(v) for v in rng.integers(2, 5, size=2))
        pa, pb = cat.PROFILES[i % 3], cat.PROFILES[(i // 3) % 3]
        out.append((cat.random_system(da, s, pa), cat.random_system(db, s + 1, pb)))
    return out


def random_orbits(seed, count, horizon=10000):
    """Seeded centered orbit sequences of random systems."""
    out = []
    for i, s in enumerate(_case_seeds(seed, 2, count)):
        rng = np.random.default_rng(s)
        d = int(rng.integers(2, 5))
        sysm = cat.random_system(d, s, cat.PROFILES[i % 3])
        x = rng.uniform(-1.0, 1.0, size=d)
        out.append(cat.orbit_sequence(sysm, x, True, horizon))
    return out


def random_short_sequences(seed, count, n=seqs.EXACT_MAX_N):
    """Seeded real euclidean sequences of length n and dims 1..4."""
    out = []
    for s in _case_seeds(seed, 3, count):
        rng = np.random.default_rng(s)
        dim = int(rng.integers(1, 5))
        terms = rng.standard_normal((n, dim)) * rng.uniform(0.1, 3.0)
        out.append(seqs.BoundedSequence.from_array(terms, "euclidean"))
    return out


def verify_theorems(cfg, report):
    opts = {**SUITE_DEFAULTS, **cfg["options"]}
    cfg["options"] = opts
    tol, seed = cfg["tol"], cfg["seed"]
    grid = cfg["grid"] or [n for n in seqs.DEFAULT_GRID if n <= opts["horizon"]]
    cfg["grid"] = grid

    t = Table(["case", "dim_a", "dim_b", "wm_a", "wm_b", "wm_tensor", "holds", "agree",
               "mix_c"])
    viol = disagree = mc_fail = 0
    for i, (a, b) in enumerate(random_pairs(seed, int(opts["pairs"]))):
        r = systems.theorem_mix_a_check(a, b, tol)
        mc = systems.theorem_mix_c_check(a, b, mix_tol=tol)
        mc_cell = "skipped" if mc.skipped else ("holds" if mc.holds else "fails")
        viol += not r.holds
        disagree += not r.method_agreement
        mc_fail += mc_cell == "fails"
        t.add(i, a.algebra_dim, b.algebra_dim, r.weak_mixing_a, r.weak_mixing_b,
              r.weak_mixing_tensor, r.holds, r.method_agreement, mc_cell)
    report.tables["mix_a"] = t
    report.verdict("mix_a_equivalence", viol == 0, cases=len(t.rows), violations=viol)
    report.verdict("method_agreement", disagree == 0, disagreements=disagree)
    report.verdict("mix_c", mc_fail == 0, failures=mc_fail)

    t = Table(["case", "dim", "weak_mixing", "tensor_ergodic", "agree"])
    bad = 0
    for i, s in enumerate(random_orbits(seed, int(opts["orbits"]), int(opts["horizon"]))):
        v1 = seqs.classify(s, grid, tol).weak_mixing
        v2 = seqs.classify(seqs.tensor_sequences(s, s), grid, tol).ergodic
        bad += v1 != v2
        t.add(i, s.space.dim, v1.value, v2.value, v1 == v2)
    report.tables["euwm"] = t
    report.verdict("euwm_equivalence", bad == 0, cases=len(t.rows), violations=bad)

    t = Table(["case", "n", "U_lower", "U_exact", "U_upper", "ok"])
    bad = 0
    slack = seqs.BOUND_SLACK
    n = min(int(cfg["exact_max_n"]), seqs.EXACT_MAX_N)
    for i, s in enumerate(random_short_sequences(seed, int(opts["brackets"]), n)):
        g = list(range(1, n + 1))
        lo, hi = seqs.uniform_bounds(s, g)
        ex = seqs.uniform_exact(s, g, n)
        ok = np.all(ex - lo >= -slack) and np.all(hi - ex >= -slack)
        bad += not ok
        t.add(i, n, lo[-1], ex[-1], hi[-1], bool(ok))
    report.tables["uniform_bracket"] = t
    report.verdict("uniform_bracket", bad == 0, cases=len(t.rows), violations=bad)


RUNNERS = {"analyze-sequence": analyze_sequence, "analyze-system": analyze_system,
           "tensor-check": tensor_check, "verify-theorems": verify_theorems}


def run(cfg):
    """Run a resolved config.  Returns (report, exit code)."""
    report = Report(metadata={})
    RUNNERS[cfg["scenario"]](cfg, report)
    # the echo is taken after the runner filled in defaults (grid, options)
    report.metadata = {"tool": "cesarolab", "version": __version__, "seed": cfg["seed"],
                       "config": _jsonable(cfg)}
    code = EXIT_UNDECIDED if cfg["strict"] and report.undecided else EXIT_OK
    return report, code


# ----------------------------------------------------------------- catalog

def catalog_table():
    t = Table(["name", "kind", "params", "description"])
    for name in sorted(cat.CATALOG):
        e = cat.CATALOG[name]
        t.add(name, e.kind, json.dumps(e.params, sort_keys=True), e.locator)
    return t


# ----------------------------------------------------------------- argv

def build_parser():
    p = argparse.ArgumentParser(prog="cesarolab",
                                description="Cesaro-mean mixing diagnostics for sequences "
                                            "and finite abelian C*-systems.")
    p.add_argument("--version", action="version", version=f"cesarolab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in SCENARIOS:
        s = sub.add_parser(name)
        s.add_argument("object", nargs="?", help="catalog name (see `catalog list`)")
        s.add_argument("params", nargs="*", help="catalog parameters as key=value")
        s.add_argument("--config", help="JSON scenario config")
        s.add_argument("--grid", type=_grid_arg, help="comma-separated horizons")
        s.add_argument("--tol", type=float)
        s.add_argument("--seed", type=int)
        s.add_argument("--out", help="output directory (CSV per table + report.json)")
        s.add_argument("--strict", action="store_true", default=None,
                       help="exit 2 when any verdict is undecided")
        s.add_argument("--exact-sup-max-n", type=int, dest="exact_max_n",
                       help="largest n for exact sign enumeration of the uniform statistic")
        s.add_argument("-v", "--verbose", action="store_true")
    c = sub.add_parser("catalog")
    c.add_argument("action", choices=["list"])
    c.add_argument("--out", help="output directory for catalog.csv")
    return p


def _print_report(report, stream):
    stream.write(report.as_json())
    for name, table in report.tables.items():
        stream.write(f"\n# {name}\n")
        stream.write(csv_text(table))


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    # diagnostics go to stderr through a handler owned by this call
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("cesarolab: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO if getattr(args, "verbose", False) else logging.WARNING)
    log.propagate = False
    try:
        return _main(args)
    finally:
        log.removeHandler(handler)


def _main(args):
    try:
        if args.command == "catalog":
            t = catalog_table()
            if args.out:
                Path(args.out).mkdir(parents=True, exist_ok=True)
                emit_csv(t, Path(args.out) / "catalog.csv")
            else:
                sys.stdout.write(csv_text(t))
            return EXIT_OK
        file_cfg = load_config(args.config) if args.config else None
        params = parse_params(args.params)
        flags = {"grid": args.grid, "tol": args.tol, "seed": args.seed,
                 "strict": args.strict, "exact_max_n": args.exact_max_n}
        cfg = resolve_config(args.command, file_cfg, args.object, params, flags)
        log.info("running %s", args.command)
        report, code = run(cfg)
    except (ConfigError, ValueError, KeyError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        log.error("input error: %s", msg)
        return EXIT_INPUT
    if args.out:
        try:
            report.write(args.out)
        except OSError as e:
            log.error("cannot write report: %s", e)
            return EXIT_INPUT
    else:
        _print_report(report, sys.stdout)
    if code == EXIT_UNDECIDED:
        log.warning("undecided: %s", ", ".join(report.undecided))
    return code


if __name__ == "__main__":
    sys.exit(main())
