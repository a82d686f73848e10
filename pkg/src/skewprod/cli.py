"""Command-line front end.

Usage::

    skewprod <command> [--config FILE] [--out DIR]

The config is an INI file.  ``[model]`` picks the fiber family, and a section
named after the command holds its parameters.  Every run writes
``<command>.json`` (sorted keys, config hash, library and schema version) and
``<command>.txt``; some commands add a CSV.  The output directory may also be
set through ``SKEWPROD_OUT``, the only environment override.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (SkewSystem, fiber_fixed_points, lyapunov_finite, make_orbit,
                       mme_ex_exponent, mme_monte_carlo)
from .errors import (BudgetExhausted, DegenerateRoot, NotFound, NumericalError, SkewprodError,
                     ValidationError)
from .fiber import arctan_model, check_hypotheses, glued_model, mobius_model, pld_model, quartic_model
from .itinerary import (contracting_periodic_near, contraction_data, density_scan,
                        expanding_periodic_near, fundamental_domains, homoclinic_certificate)
from .measure import CSV_COLUMNS, boundary_approx, traces_csv
from .symbolic import (EX_NAMES, block_frequencies, canonical_rotation, parry_measure,
                       parse_word, sample_path, word_str)
from .walk import (gap_statistics, ks_statistic, make_rng, nontransitivity_witness,
                   occupation_decay, reduce_word, reduced_value, vplus_walk)

SCHEMA_VERSION = 1
OUT_ENV = "SKEWPROD_OUT"

EXIT_OK, EXIT_VALIDATION, EXIT_NOT_FOUND, EXIT_NUMERICAL = 0, 2, 3, 4

REQUIRED = object()

# key -> (type, default); REQUIRED marks keys with no default
MODEL_KEYS = {"kind": (str, "pld"), "beta": (float, 2.0), "a": (float, 2.0),
              "width": (float, 0.05), "engine": (str, "auto")}

COMMANDS = {
    "check-hypotheses": {"grid": (int, 10001)},
    "mme": {"samples": (int, 100_000), "seed": (int, 0)},
    "parry": {"samples": (int, 0), "seed": (int, 0)},
    "lyapunov": {"word": (str, "random"), "x0": (float, 0.5), "n": (int, 10_000),
                 "seed": (int, 0)},
    "periodic-scan": {"max_period": (int, 6), "grid": (float, 1e-4)},
    "fundamental-domains": {"eps0": (float, 0.01)},
    "boundary-approx": {"delta": (float, REQUIRED), "target": (str, "0101"),
                        "n_grid": (str, "6,18,38,66")},
    "connect": {"p_a": (float, 0.3), "p_b": (float, 0.7), "klass": (str, "contracting"),
                "radius": (float, 0.05), "budget": (int, 200_000)},
    "density": {"x0": (float, 0.3), "direction": (str, "forward"), "mesh": (float, 0.01),
                "budget": (int, 1_000_000)},
    "reduce-word": {"word": (str, "00100010"), "x": (float, 0.3), "budget": (int, 10_000),
                    "max_len": (int, 20), "seed": (int, 0)},
    "walk-stats": {"samples": (int, 1_000_000), "ks_samples": (int, 100_000), "seed": (int, 0)},
    "occupation": {"eps": (float, 0.25), "n_grid": (str, "10000,1000000"), "seeds": (int, 50),
                   "x0": (float, 0.5), "particles": (int, 0), "seed": (int, 0)},
}

MODEL_KINDS = ("pld", "mobius", "arctan", "quartic", "parabolic")


@dataclass
class ExperimentConfig:
    command: str
    model: dict
    params: dict
    out_dir: Path = field(default=Path("reports"))

    def canonical(self) -> dict:
        return {"command": self.command, "model": self.model, "params": self.params}

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def build_model(self):
        kind = self.model["kind"]
        if kind == "pld":
            return pld_model()
        if kind == "mobius":
            return mobius_model(self.model["beta"])
        if kind == "arctan":
            return arctan_model()
        if kind == "quartic":
            return quartic_model(self.model["a"])
        return glued_model(self.model["width"])

    def system(self):
        return SkewSystem(self.build_model(), self.model["engine"])


def _coerce(section, key, typ, raw):
    try:
        return typ(raw)
    except ValueError:
        raise ValidationError(f"[{section}] {key}: cannot read {raw!r} as {typ.__name__}") from None


def _read_section(parser, section, schema):
    out = {}
    present = dict(parser.items(section)) if parser.has_section(section) else {}
    unknown = sorted(set(present) - set(schema))
    if unknown:
        raise ValidationError(f"[{section}] unknown key(s): {', '.join(unknown)}")
    for key, (typ, default) in schema.items():
        if key in present:
            out[key] = _coerce(section, key, typ, present[key])
        elif default is REQUIRED:
            raise ValidationError(f"[{section}] missing required key '{key}'")
        else:
            out[key] = default
    return out


def _int_list(section, key, text):
    try:
        vals = [int(float(v)) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"[{section}] {key}: expected comma-separated integers") from None
    if not vals:
        raise ValidationError(f"[{section}] {key}: empty list")
    return vals


def _validate(command, model, p):
    def need(cond, msg):
        if not cond:
            raise ValidationError(f"[{command}] {msg}")

    if model["kind"] not in MODEL_KINDS:
        raise ValidationError(f"[model] kind must be one of {', '.join(MODEL_KINDS)}")
    if model["engine"] not in ("auto", "direct", "near", "lifted"):
        raise ValidationError("[model] engine must be auto, direct, near or lifted")
    if not model["beta"] > 1.0:
        raise ValidationError("[model] beta must exceed 1")
    if not 0.0 < model["width"] < 0.25:
        raise ValidationError("[model] width must lie in (0, 0.25)")
    for key in ("samples", "n", "budget", "ks_samples", "seeds", "max_period", "max_len"):
        if key in p:
            need(p[key] >= (0 if (command, key) == ("parry", "samples") else 1),
                 f"{key} must be at least 1")
    if "delta" in p:
        need(0.0 < p["delta"] < 0.5, "delta must lie in (0, 1/2)")
    if "eps0" in p:
        need(0.0 < p["eps0"] < 0.25, "eps0 must lie in (0, 0.25)")
    if "eps" in p:
        need(0.0 < p["eps"] < 0.5, "eps must lie in (0, 1/2)")
    if "mesh" in p:
        need(0.0 < p["mesh"] < 1.0, "mesh must lie in (0, 1)")
    if "grid" in p:
        need(p["grid"] > 0, "grid must be positive")
    if "radius" in p:
        need(0.0 < p["radius"] < 0.5, "radius must lie in (0, 1/2)")
    for key in ("x0", "x", "p_a"):
        if key in p:
            need(0.0 <= p[key] <= 1.0 if key == "x0" and command == "lyapunov"
                 else 0.0 < p[key] < 1.0, f"{key} out of range")
    if "p_b" in p:
        need(0.0 <= p["p_b"] <= 1.0, "p_b must lie in [0, 1]")
    if "klass" in p:
        need(p["klass"] in ("expanding", "contracting"), "klass is expanding or contracting")
    if "direction" in p:
        need(p["direction"] in ("forward", "backward"), "direction is forward or backward")
    if "particles" in p:
        need(p["particles"] >= 0, "particles must be non-negative")
    for key in ("n_grid",):
        if key in p:
            vals = _int_list(command, key, p[key])
            need(min(vals) >= 1, f"{key} entries must be at least 1")
            p[key] = vals
    if "word" in p and not (command == "lyapunov" and p["word"] == "random"):
        need(len(parse_word(p["word"])) >= 1, "word must be non-empty")
    if "target" in p:
        need(len(parse_word(p["target"])) >= 1, "target must be non-empty")
    return p


def load_config(command: str, path=None, out_dir=None) -> ExperimentConfig:
    if command not in COMMANDS:
        raise ValidationError(f"unknown command {command!r}")
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    if path is not None:
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ValidationError(f"cannot read config {path}: {exc}") from None
        except configparser.Error as exc:
            raise ValidationError(f"malformed config: {exc}") from None
    extra = sorted(set(parser.sections()) - {"model", command})
    if extra:
        raise ValidationError(f"unknown section(s) for {command}: {', '.join(extra)}")
    model = _read_section(parser, "model", MODEL_KEYS)
    params = _validate(command, model, _read_section(parser, command, COMMANDS[command]))
    out = out_dir or os.environ.get(OUT_ENV) or "reports"
    return ExperimentConfig(command, model, params, Path(out))


# ---------------------------------------------------------------------------
# commands: each returns (result dict, summary lines, {csv name: text})

def _fmt(v):
    return f"{v:.10g}" if isinstance(v, float) else str(v)


def cmd_check_hypotheses(cfg):
    rep = check_hypotheses(cfg.build_model(), cfg.params["grid"])
    d = rep.as_dict()
    lines = [f"beta = {_fmt(rep.beta)}, lambda = {_fmt(rep.lam)}",
             f"kappa = {_fmt(rep.kappa) if rep.kappa is not None else 'n/a'}"]
    for h in ("h1", "h2", "h2_prime", "h3", "h4", "commutation"):
        v = d[h]
        lines.append(f"{h.upper():12s} {'n/a' if v is None else ('pass' if v else 'fail')}")
    return d, lines, {}


def cmd_mme(cfg):
    system = cfg.system()
    chain = parry_measure()
    mc = mme_monte_carlo(system, cfg.params["samples"], cfg.params["seed"])
    d = {"chi": mme_ex_exponent(system), "entropy": chain.entropy, "monte_carlo": mc.as_dict()}
    lines = [f"chi(mu_max^ex) = {_fmt(d['chi'])}", f"entropy = {_fmt(chain.entropy)}",
             f"Monte Carlo ({mc.samples} samples) = {_fmt(mc.estimate)}"]
    return d, lines, {}


def cmd_parry(cfg):
    chain = parry_measure()
    d = chain.as_dict()
    lines = [f"entropy = {_fmt(chain.entropy)} (log 2 = {_fmt(math.log(2))})",
             "pi = " + ", ".join(f"{n}:{_fmt(float(v))}" for n, v in zip(EX_NAMES, chain.pi))]
    if cfg.params["samples"] > 0:
        path = sample_path(chain, cfg.params["samples"], make_rng(cfg.params["seed"]))
        single, pairs = block_frequencies(path)
        d["empirical"] = {"samples": cfg.params["samples"], "single": single.tolist(),
                          "pairs": pairs.tolist()}
        lines.append("empirical pi = " + ", ".join(_fmt(float(v)) for v in single))
    return d, lines, {}


def cmd_lyapunov(cfg):
    p = cfg.params
    if p["word"] == "random":
        xi = lambda n: make_rng(p["seed"]).integers(0, 2, size=n)
        label = f"random(seed={p['seed']})"
    else:
        xi = parse_word(p["word"])
        label = word_str(xi)
    s = lyapunov_finite(cfg.system(), xi, p["x0"], p["n"])
    return {"base": label, **s.as_dict()}, [f"chi_{s.n}({label}, x0={_fmt(s.x0)}) = {_fmt(s.value)}"], {}


def _canonical_words(max_period):
    seen = set()
    for n in range(1, max_period + 1):
        for k in range(2 ** n):
            w = tuple((k >> (n - 1 - i)) & 1 for i in range(n))
            c = canonical_rotation(w)
            if c not in seen:
                seen.add(c)
                yield c


def cmd_periodic_scan(cfg):
    system = cfg.system()
    rows, degenerate = [], []
    for w in _canonical_words(cfg.params["max_period"]):
        try:
            orbits = fiber_fixed_points(system, w, cfg.params["grid"])
        except DegenerateRoot:
            degenerate.append(word_str(w))
            continue
        rows.extend(o.as_dict() for o in orbits)
    cols = ["word", "x", "period", "chi", "class", "location", "residual"]
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(cols)
    for r in rows:
        wr.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in cols])
    counts = {}
    for r in rows:
        counts[r["class"]] = counts.get(r["class"], 0) + 1
    lines = [f"{len(rows)} periodic fiber points", *(f"  {k}: {v}" for k, v in sorted(counts.items()))]
    if degenerate:
        lines.append("identity words (skipped): " + ", ".join(degenerate))
    return {"orbits": rows, "degenerate_words": degenerate, "counts": counts}, lines, \
        {"periodic_scan.csv": buf.getvalue()}


def cmd_fundamental_domains(cfg):
    model = cfg.build_model()
    fd = fundamental_domains(model, cfg.params["eps0"])
    d = {"expanding": fd.as_dict()}
    lines = [f"eps = {_fmt(fd.eps)}, N = {fd.N}",
             f"min (f0^N)' on I0 = {_fmt(fd.min_expansion)} >= floor {_fmt(fd.floor)}"]
    try:
        cd = contraction_data(model)
        d["contracting"] = cd.as_dict()
        lines.append(f"c = {_fmt(cd.c)}, upsilon = {_fmt(cd.upsilon)}")
    except SkewprodError as exc:
        d["contracting"] = None
        lines.append(f"contracting data unavailable: {exc}")
    return d, lines, {}


def cmd_boundary_approx(cfg):
    system = cfg.system()
    p = cfg.params
    traces = [boundary_approx(system, p["target"], p["delta"], n) for n in p["n_grid"]]
    lines = ["  n    N    M   period  distance      chi"]
    for t in traces:
        lines.append(f"{t.n:4d} {t.N:4d} {t.M:4d} {len(t.eta):7d}  {t.distance:.6f}  {t.chi:.3g}")
    return {"traces": [t.as_dict() for t in traces], "csv_columns": CSV_COLUMNS}, lines, \
        {"boundary_approx.csv": traces_csv(traces)}


def _synth(system, p, radius, klass):
    if p in (0.0, 1.0):
        return make_orbit(system, (0,), p, near=(int(p), 0.0))
    fn = expanding_periodic_near if klass == "expanding" else contracting_periodic_near
    return fn(system, p, radius).orbit


def cmd_connect(cfg):
    system = cfg.system()
    p = cfg.params
    a = _synth(system, p["p_a"], p["radius"], p["klass"])
    b = _synth(system, p["p_b"], p["radius"], p["klass"])
    cert = homoclinic_certificate(system, a, b, p["budget"])
    d = {"a": a.as_dict(), "b": b.as_dict(), **cert.as_dict()}
    lines = [f"a: word length {a.period}, x = {_fmt(a.x)}, chi = {_fmt(a.chi)}",
             f"b: word length {b.period}, x = {_fmt(b.x)}, chi = {_fmt(b.chi)}",
             f"a -> b: {word_str(cert.forward_link.word) or '(empty)'}",
             f"b -> a: {word_str(cert.backward_link.word) or '(empty)'}"]
    return d, lines, {}


def cmd_density(cfg):
    p = cfg.params
    r = density_scan(cfg.build_model(), p["x0"], p["direction"], p["mesh"], p["budget"])
    return r.as_dict(), [f"max gap {_fmt(r.max_gap)} at {r.gap_at}, {r.visited} cells"], {}


def cmd_reduce_word(cfg):
    p = cfg.params
    model = cfg.build_model()
    rw = reduce_word(parse_word(p["word"]))
    d = {"word": p["word"], "reduced": rw.as_dict()}
    lines = [f"f_[{p['word']}] = f0^{rw.j}" + (" o f1" if rw.s < 0 else "")]
    cert = nontransitivity_witness(model, p["x"], p["budget"], p["max_len"], p["seed"])
    d["value"] = float(reduced_value(model, rw, p["x"]))
    d["certificate"] = cert.as_dict()
    lines += [f"max deviation over {cert.words_checked} words = {cert.max_deviation:.3g}",
              f"largest gap {_fmt(cert.max_gap)} at {cert.gap_at}"]
    return d, lines, {}


def cmd_walk_stats(cfg):
    p = cfg.params
    g = gap_statistics(p["seed"], p["samples"])
    a = vplus_walk(p["seed"] + 1, p["samples"])
    b = vplus_walk(p["seed"] + 2, p["ks_samples"], "first-return")
    c = vplus_walk(p["seed"] + 3, p["ks_samples"])
    ks = ks_statistic(c.step_values, b.step_values)
    gd = g.as_dict()
    gd["d_law"] = {str(k): v for k, v in sorted(g.d_law.items()) if k <= 15}
    d = {"gaps": gd, "vplus": a.as_dict(), "ks_direct_vs_first_return": ks}
    lines = [f"even parity {_fmt(g.parity_even)}, P(d=1) {_fmt(g.p_d1)}, P(d=3) {_fmt(g.p_d3)}",
             f"V+ mean step {_fmt(a.mean_step)}, KS {_fmt(ks)}"]
    return d, lines, {}


def cmd_occupation(cfg):
    p = cfg.params
    parts = None
    if p["particles"] > 0:
        parts = make_rng(p["seed"]).uniform(p["eps"], 1.0 - p["eps"], p["particles"])
    tab = occupation_decay(cfg.build_model(), p["eps"], p["n_grid"], p["seeds"], p["x0"],
                           parts, p["seed"])
    lines = [f"n = {n}: {_fmt(m)} +- {_fmt(s)}"
             for n, m, s in zip(tab.n_grid, tab.mean_fraction, tab.stderr)]
    return tab.as_dict(), lines, {"occupation.csv": tab.csv()}


HANDLERS = {
    "check-hypotheses": cmd_check_hypotheses, "mme": cmd_mme, "parry": cmd_parry,
    "lyapunov": cmd_lyapunov, "periodic-scan": cmd_periodic_scan,
    "fundamental-domains": cmd_fundamental_domains, "boundary-approx": cmd_boundary_approx,
    "connect": cmd_connect, "density": cmd_density, "reduce-word": cmd_reduce_word,
    "walk-stats": cmd_walk_stats, "occupation": cmd_occupation,
}


# ---------------------------------------------------------------------------
# report emission

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def write_report(cfg: ExperimentConfig, status: str, result, lines, csvs, error=None):
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    stem = cfg.command.replace("-", "_")
    doc = {"schema_version": SCHEMA_VERSION, "version": __version__, "command": cfg.command,
           "config": cfg.canonical(), "config_hash": cfg.digest(), "status": status,
           "result": _jsonable(result)}
    if error is not None:
        doc["error"] = error
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    (cfg.out_dir / f"{stem}.json").write_text(text)
    head = [f"{cfg.command} [{status}] model={cfg.model['kind']} hash={cfg.digest()[:12]}"]
    (cfg.out_dir / f"{stem}.txt").write_text("\n".join(head + list(lines)) + "\n")
    for name, body in csvs.items():
        (cfg.out_dir / name).write_text(body)
    return doc


def run(command: str, config=None, out_dir=None, stream=sys.stdout) -> int:
    """Run one command; returns the exit code."""
    try:
        cfg = load_config(command, config, out_dir)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    code, status, result, lines, csvs, err = EXIT_OK, "ok", {}, [], {}, None
    try:
        result, lines, csvs = HANDLERS[command](cfg)
    except ValidationError as exc:
        code, status, err = EXIT_VALIDATION, "invalid", str(exc)
    except BudgetExhausted as exc:
        code, status, err = EXIT_NOT_FOUND, "budget-exhausted", str(exc)
        if exc.partial is not None and hasattr(exc.partial, "as_dict"):
            result = {"partial": exc.partial.as_dict()}
    except NotFound as exc:
        code, status, err = EXIT_NOT_FOUND, "not-found", str(exc)
    except NumericalError as exc:
        code, status, err = EXIT_NUMERICAL, "numerical-failure", f"{type(exc).__name__}: {exc}"
    if err is not None:
        print(f"error: {err}", file=sys.stderr)
    write_report(cfg, status, result, ([f"error: {err}"] if err else []) + list(lines), csvs, err)
    if stream is not None and lines:
        print("\n".join(lines), file=stream)
    return code


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="skewprod", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", "-c", help="INI file with [model] and [<command>] sections")
    ap.add_argument("--out", "-o", help=f"output directory (default ${OUT_ENV} or ./reports)")
    ap.add_argument("--version", action="version", version=f"skewprod {__version__}")
    args = ap.parse_args(argv)
    return run(args.command, args.config, args.out)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
