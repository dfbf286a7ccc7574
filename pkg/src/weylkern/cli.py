"""Command-line front end: thin adapters over the library.

Each verb parses options, calls library code, and serializes the result;
no numerics live in this module.  JSON numbers carry 17 significant
digits, CSV uses '.' as the decimal separator, and file writes go through
a temporary file plus an atomic rename.  WEYLKERN_SEED supplies the
default simulation seed, WEYLKERN_THREADS the default worker count.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
import tempfile
from fractions import Fraction as Q

import numpy as np

from weylkern import __version__
from weylkern.asymptotics import (
    at_zero,
    heat_small_t,
    newton_asym,
    normalization_identity,
    poisson_boundary_asym,
    spherical_asym,
)
from weylkern.dyson import (
    dyson_exit_law,
    dyson_exit_normalized,
    dyson_heat,
    dyson_heat_law,
    dyson_heat_normalized,
    dyson_mass,
    dyson_newton,
    dyson_poisson,
    killed_heat,
    semigroup_defect,
)
from weylkern.kernels import (
    CancellationOverflow,
    DomainError,
    KernelValue,
    c_constant,
    det_heat_a,
    heat_via_spherical,
    kernel_w,
    spherical_psi,
    suggest_heat_bits,
)
from weylkern.killingmax import ORDER_BUDGET, verify_face_pair, verify_system
from weylkern.montecarlo import (
    compare_density,
    compare_exit,
    exit_density_arc,
    pde_residual,
    simulate,
)
from weylkern.quadrature import arc_span_frame, gauss_nodes, weight_matrix
from weylkern.rootsys import (
    RootSystemError,
    build_root_system,
    pi_closure_subsets,
    pi_over,
    rho_of,
    subsystem_order,
    to_json_dict,
)

_KERNELS = ("heat", "newton", "poisson", "green", "spherical", "curved-heat", "det-heat")
_LAWS = ("poisson", "newton", "heat", "spherical", "dyson-exit", "dyson-heat", "at-zero")
_DEFAULT_STEPS = {
    "poisson": (0.2, 0.1, 0.05),
    "dyson-exit": (0.2, 0.1, 0.05),
    "newton": (0.2, 0.1, 0.05),
    "at-zero": (0.2, 0.1, 0.05),
    "heat": (0.04, 0.02, 0.01),
    "dyson-heat": (0.04, 0.02, 0.01),
    "spherical": (50.0, 100.0, 200.0),
}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# parsing and serialization


def parse_point(text: str) -> tuple:
    """Comma-separated coordinates; 'p/q' entries become exact rationals."""
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            raise DomainError(f"empty coordinate in point {text!r}")
        try:
            out.append(Q(tok) if "/" in tok else float(tok))
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"bad coordinate {tok!r}: {exc}") from None
    return tuple(out)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def _json_write(obj, out, level: int, compact: bool) -> None:
    pad = "" if compact else "  " * (level + 1)
    close_pad = "" if compact else "  " * level
    nl = "" if compact else "\n"
    sep = "," if compact else ",\n"
    if isinstance(obj, dict):
        if not obj:
            out.write("{}")
            return
        out.write("{" + nl)
        items = list(obj.items())
        for n, (k, v) in enumerate(items):
            out.write(pad + json.dumps(str(k)) + ": ")
            _json_write(v, out, level + 1, compact)
            out.write(sep if n + 1 < len(items) else nl)
        out.write(close_pad + "}")
    elif isinstance(obj, (list, tuple)) or isinstance(obj, np.ndarray):
        seq = list(obj)
        if not seq:
            out.write("[]")
            return
        out.write("[" + nl)
        for n, v in enumerate(seq):
            out.write(pad)
            _json_write(v, out, level + 1, compact)
            out.write(sep if n + 1 < len(seq) else nl)
        out.write(close_pad + "]")
    elif isinstance(obj, bool) or isinstance(obj, np.bool_):
        out.write("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.write(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            out.write(format(x, ".17g"))
        else:
            out.write(json.dumps(str(x)))
    elif obj is None:
        out.write("null")
    elif isinstance(obj, str):
        out.write(json.dumps(obj))
    else:
        out.write(json.dumps(str(obj)))


def json_text(obj, compact: bool = False) -> str:
    """JSON serialization with floats at 17 significant digits."""
    buf = io.StringIO()
    _json_write(obj, buf, 0, compact)
    return buf.getvalue()


def csv_text(header, rows, config: dict) -> str:
    buf = io.StringIO()
    buf.write("# config: " + json_text(config, compact=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(c) for c in row])
    return buf.getvalue()


def atomic_write(path: str, text: str) -> None:
    target = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target), prefix=".weylkern-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        atomic_write(path, text)


def _base_config(ns, keys) -> dict:
    cfg = {}
    for k in keys:
        cfg[k] = getattr(ns, k.replace("-", "_"))
    cfg["version"] = __version__
    return cfg


# ---------------------------------------------------------------------------
# eval / dyson


def _eval_kernel(rs, kind: str, x, y, t, method, precision) -> KernelValue:
    if kind == "spherical":
        val = spherical_psi(rs, x, y, precision=precision)
        return KernelValue(float(val), "spherical", "limit", math.nan,
                           precision_bits=precision)
    if kind == "curved-heat":
        if t is None:
            raise DomainError("--t is required for curved-heat")
        from weylkern.kernels import curved_heat

        return KernelValue(curved_heat(rs, x, y, float(t)), "curved-heat",
                           "direct", math.nan)
    if kind == "det-heat":
        if t is None:
            raise DomainError("--t is required for det-heat")
        return det_heat_a(rs, x, y, float(t))
    return kernel_w(rs, kind, x, y, t=t, precision=precision, method=method)


def _value_payload(rs, kind: str, x, y, t, kv: KernelValue, cfg: dict) -> dict:
    return {
        "system": rs.name,
        "kind": kind,
        "t": t,
        "x": list(x),
        "y": list(y),
        "value": kv.value,
        "cancellation": kv.cancellation,
        "mode": kv.method,
        "precision_bits": kv.precision_bits,
        "config": cfg,
        "version": __version__,
    }


def _value_csv(rs, kind: str, x, y, t, kv: KernelValue, cfg: dict) -> str:
    a = rs.ambient_dim
    header = (["system", "kind", "t"]
              + [f"x{i}" for i in range(a)] + [f"y{i}" for i in range(a)]
              + ["value", "cancellation", "mode"])
    row = ([rs.name, kind, t]
           + [float(c) for c in x] + [float(c) for c in y]
           + [kv.value, kv.cancellation, kv.method])
    return csv_text(header, [row], cfg)


def _cmd_eval(ns) -> int:
    rs = build_root_system(ns.system)
    y = parse_point(ns.y)
    cfg = _base_config(ns, ("system", "kernel", "x", "y", "t", "method",
                            "precision", "grid", "format"))
    if ns.grid is not None:
        text = kernel_grid_csv(rs, ns.kernel, y, ns.t, ns.grid, cfg)
        _emit(text, ns.output)
        return 0
    if ns.x is None:
        raise DomainError("--x is required unless --grid is given")
    x = parse_point(ns.x)
    kv = _eval_kernel(rs, ns.kernel, x, y, ns.t, ns.method, ns.precision)
    if ns.format == "csv":
        text = _value_csv(rs, ns.kernel, x, y, ns.t, kv, cfg)
    else:
        text = json_text(_value_payload(rs, ns.kernel, x, y, ns.t, kv, cfg))
    _emit(text, ns.output)
    return 0


def kernel_grid_csv(rs, kind: str, y, t, grid: str, cfg: dict) -> str:
    """kernel_w on a rectangular lattice in fundamental-weight coordinates."""
    try:
        lo_s, hi_s, n_s = grid.split(":")
        lo, hi, n = float(lo_s), float(hi_s), int(n_s)
    except ValueError:
        raise DomainError(f"bad grid spec {grid!r}, expected lo:hi:n") from None
    if not (hi > lo >= 0.0) or n < 1:
        raise DomainError("grid needs 0 <= lo < hi and n >= 1")
    r = len(rs.fundamental_weights)
    if n ** r > 100_000:
        raise DomainError(f"grid of {n}^{r} points is too large")
    wm = weight_matrix(rs)
    centers = lo + (np.arange(n) + 0.5) * (hi - lo) / n
    rows = []
    for coeffs in itertools.product(centers, repeat=r):
        X = np.asarray(coeffs) @ wm
        kv = _eval_kernel(rs, kind, tuple(X), y, t, None, None)
        rows.append(list(X) + [kv.value])
    header = [f"x{i}" for i in range(rs.ambient_dim)] + ["value"]
    return csv_text(header, rows, cfg)


def _cmd_dyson(ns) -> int:
    rs = build_root_system(ns.system)
    x = parse_point(ns.x)
    y = parse_point(ns.y)
    cfg = _base_config(ns, ("system", "kind", "x", "y", "t", "method",
                            "precision", "format"))
    kind = ns.kind
    if kind == "transition":
        if ns.t is None:
            raise DomainError("--t is required for kind=transition")
        kv = dyson_heat(rs, x, y, ns.t, method=ns.method, precision=ns.precision)
    elif kind == "killed":
        if ns.t is None:
            raise DomainError("--t is required for kind=killed")
        kv = killed_heat(rs, x, y, ns.t, method=ns.method, precision=ns.precision)
    elif kind == "poisson":
        kv = dyson_poisson(rs, x, y)
    else:
        kv = dyson_newton(rs, x, y)
    if ns.format == "csv":
        text = _value_csv(rs, kind, x, y, ns.t, kv, cfg)
    else:
        text = json_text(_value_payload(rs, kind, x, y, ns.t, kv, cfg))
    _emit(text, ns.output)
    return 0


# ---------------------------------------------------------------------------
# asym


def _parse_steps(text: str | None, law: str) -> list[float]:
    if text is None:
        return list(_DEFAULT_STEPS[law])
    try:
        steps = [float(tok) for tok in text.split(",")]
    except ValueError:
        raise DomainError(f"bad steps {text!r}") from None
    if not steps or any(s <= 0 for s in steps):
        raise DomainError("steps must be positive")
    return steps


def _asym_form(rs, law: str, y0, x, lam, kind: str):
    if law == "poisson":
        return poisson_boundary_asym(rs, y0)
    if law == "dyson-exit":
        return dyson_exit_law(rs, y0)
    if law == "newton":
        return newton_asym(rs, y0)
    if law == "heat":
        if x is None:
            raise DomainError("--x is required for the heat law")
        return heat_small_t(rs, x, y0)
    if law == "dyson-heat":
        if x is None:
            raise DomainError("--x is required for the dyson-heat law")
        return dyson_heat_law(rs, x, y0)
    if law == "spherical":
        if lam is None:
            raise DomainError("--lam is required for the spherical law")
        return spherical_asym(rs, lam, y0)
    # at-zero: a constant, wrapped in a degenerate form
    from weylkern.asymptotics import AsymptoticForm

    return AsymptoticForm("at-zero", at_zero(rs, kind, y0), Q(0), 0.0, "|X|->0",
                          details={"kind": kind})


def _asym_step(rs, law: str, form, s: float, y0, x, lam, kind: str,
               precision: int | None):
    """(measured, model, ratio) for one parameter step of one law."""
    import mpmath

    if law in ("poisson", "dyson-exit"):
        X = tuple((1.0 - s) * float(c) for c in y0)
        kv = dyson_exit_normalized(rs, X, y0) if law == "dyson-exit" else \
            kernel_w(rs, "poisson", X, y0)
        model = form.constant * (1.0 - sum(c * c for c in X)) * s ** float(form.power)
        return kv.value, model, kv.value / model
    if law == "newton":
        yf = [float(c) for c in y0]
        if all(c == 0.0 for c in yf):
            if x is None:
                raise DomainError("--x (approach direction) is required for Y0 = 0")
            u = np.asarray([float(c) for c in x], dtype=float)
        else:
            base = np.asarray([float(c) for c in (x if x is not None else rs.rho)],
                              dtype=float)
            u = base - np.asarray(yf)
        u = u / np.linalg.norm(u)
        X = tuple(np.asarray(yf) + s * u)
        kv = kernel_w(rs, "newton", X, y0)
        model = form.constant * s ** float(form.power)
        return kv.value, model, kv.value / model
    if law == "at-zero":
        if x is None:
            raise DomainError("--x (approach direction) is required for at-zero")
        X = tuple(s * float(c) for c in x)
        kv = kernel_w(rs, kind, X, y0)
        return kv.value, form.constant, kv.value / form.constant
    if law in ("heat", "dyson-heat"):
        bits = precision if precision is not None else suggest_heat_bits(x, y0, s)
        kv = dyson_heat_normalized(rs, x, y0, s, precision=bits) if law == "dyson-heat" else \
            kernel_w(rs, "heat", x, y0, t=s, precision=bits)
        mv = kv.details.get("mp_value")
        with mpmath.workprec(max(bits, 60)):
            model = mpmath.mpf(form.constant) \
                * mpmath.power(s, float(form.power)) * mpmath.e ** (-form.rate / s)
            ratio = float((mv if mv is not None else mpmath.mpf(kv.value)) / model)
        return kv.value, float(model), ratio
    # spherical ray
    bits = precision if precision is not None else 200
    X = tuple(s * float(c) for c in y0)
    val = spherical_psi(rs, lam, X, precision=bits)
    with mpmath.workprec(bits):
        model = mpmath.mpf(form.constant) \
            * mpmath.power(s, float(form.power)) * mpmath.e ** (form.rate * s)
        ratio = float(val / model)
    return float(val), float(model), ratio


def asym_rows(rs, law: str, y0, x, lam, kind: str, steps, precision):
    """(form, [(step, measured, model, ratio), ...]) for one law."""
    form = _asym_form(rs, law, y0, x, lam, kind)
    out = []
    for s in steps:
        measured, model, ratio = _asym_step(rs, law, form, s, y0, x, lam,
                                            kind, precision)
        out.append((s, measured, model, ratio))
    return form, out


def _point_label(ns) -> str:
    parts = [f"y0={ns.y0}"]
    if ns.x is not None:
        parts.append(f"x={ns.x}")
    if ns.lam is not None:
        parts.append(f"lam={ns.lam}")
    return ";".join(parts)


def _cmd_asym(ns) -> int:
    rs = build_root_system(ns.system)
    y0 = parse_point(ns.y0)
    x = parse_point(ns.x) if ns.x is not None else None
    lam = parse_point(ns.lam) if ns.lam is not None else None
    steps = _parse_steps(ns.steps, ns.law)
    cfg = _base_config(ns, ("system", "law", "y0", "x", "lam", "kind",
                            "steps", "precision", "format"))
    cfg["steps"] = steps
    form, rows = asym_rows(rs, ns.law, y0, x, lam, ns.kind, steps, ns.precision)
    label = _point_label(ns)
    if ns.curve is not None:
        header = ["theorem", "system", "point", "step", "measured", "model", "ratio"]
        curve = [[form.kind, rs.name, label, s, m, mo, r] for s, m, mo, r in rows]
        atomic_write(ns.curve, csv_text(header, curve, cfg))
    if ns.format == "csv":
        if len(rows) != 3:
            raise DomainError("the summary table wants exactly 3 steps; "
                              "use --curve for longer runs")
        header = ["theorem", "system", "point", "constant", "power", "rate",
                  "ratio@s1", "ratio@s2", "ratio@s3"]
        row = [form.kind, rs.name, label, form.constant, str(form.power),
               form.rate] + [r for _, _, _, r in rows]
        text = csv_text(header, [row], cfg)
    else:
        text = json_text({
            "theorem": form.kind,
            "system": rs.name,
            "point": label,
            "constant": form.constant,
            "power": str(form.power),
            "rate": form.rate,
            "parameter": form.parameter,
            "steps": [{"step": s, "measured": m, "model": mo, "ratio": r}
                      for s, m, mo, r in rows],
            "config": cfg,
            "version": __version__,
        })
    _emit(text, ns.output)
    return 0


# ---------------------------------------------------------------------------
# simulate


def histogram_rows(report) -> list[list]:
    det = report.detail
    if "edges" in det:
        edges = [float(e) for e in det["edges"]]
        los, his = edges[:-1], edges[1:]
    else:
        n = len(report.observed)
        los, his = list(range(n)), list(range(1, n + 1))
    return [[lo, hi, int(round(float(c))), float(e)]
            for lo, hi, c, e in zip(los, his, report.observed, report.expected)]


def histogram_csv(rows, config: dict) -> str:
    return csv_text(["bin_lo", "bin_hi", "count", "expected"], rows, config)


def read_histogram(path: str) -> dict:
    """Parse a histogram CSV back into {'config': ..., 'rows': [...]}."""
    config = None
    rows = []
    body = []
    with open(path) as fh:
        for line in fh.read().splitlines():
            if line.startswith("# config:"):
                config = json.loads(line[len("# config:"):].strip())
            elif line:
                body.append(line)
    for row in csv.reader(body):
        if row[0] == "bin_lo":
            continue
        rows.append([float(row[0]), float(row[1]), int(row[2]), float(row[3])])
    return {"config": config, "rows": rows}


def _cmd_simulate(ns) -> int:
    rs = build_root_system(ns.system)
    x0 = parse_point(ns.x0)
    stop = "exit" if ns.exit else "time"
    if stop == "time" and ns.t is None:
        raise DomainError("--t is required unless --exit is given")
    seed = ns.seed if ns.seed is not None else int(os.environ.get("WEYLKERN_SEED", "0"))
    measure = simulate(rs, ns.process, x0, horizon=ns.t, n_paths=ns.paths,
                       dt=ns.dt, seed=seed, stop=stop,
                       block_size=ns.block_size, threads=ns.threads)
    cfg = dict(measure.config.to_dict(), threads=ns.threads, bins=ns.bins,
               alpha=ns.alpha, seed=seed, version=__version__)
    payload = {
        "process": ns.process,
        "stop": stop,
        "paths_finished": measure.n_finished,
        "paths_killed": measure.n_killed,
        "paths_aborted": measure.n_aborted,
        "elapsed": measure.elapsed,
        "config": cfg,
        "version": __version__,
    }
    ok = True
    if not ns.no_compare:
        if stop == "exit":
            report = compare_exit(rs, measure, n_bins=ns.bins, alpha=ns.alpha)
        else:
            report = compare_density(rs, measure, n_bins=ns.bins, alpha=ns.alpha)
        ok = report.passed
        payload.update({
            "statistic": "chi_square",
            "value": report.statistic,
            "dof": report.dof,
            "threshold": report.threshold,
            "alpha": report.alpha,
            "pvalue": report.pvalue,
            "pass": report.passed,
            "samples_used": report.n_used,
        })
        if ns.histogram is not None:
            atomic_write(ns.histogram, histogram_csv(histogram_rows(report), cfg))
        if ns.format == "csv":
            _emit(histogram_csv(histogram_rows(report), cfg), ns.output)
            if ns.report is not None:
                atomic_write(ns.report, json_text(payload))
            return 0 if ok else 2
    elif ns.histogram is not None or ns.format == "csv":
        raise DomainError("the CSV histogram needs a comparison; drop --no-compare")
    text = json_text(payload)
    _emit(text, ns.report if ns.report is not None else ns.output)
    return 0 if ok else 2


# ---------------------------------------------------------------------------
# killingmax


def _face_bits(mask: int, rank: int) -> tuple[int, ...]:
    return tuple(i for i in range(rank) if mask >> i & 1)


def _pair_report_dict(rep) -> dict:
    return {
        "lam_vanishing": list(rep.lam_vanishing),
        "y_vanishing": list(rep.y_vanishing),
        "observed": rep.observed,
        "expected": rep.expected,
        "stab_lambda": rep.stab_lambda,
        "stab_y": rep.stab_y,
        "stab_meet": rep.stab_meet,
        "holds": rep.holds,
        "witnesses": list(rep.witnesses),
    }


def _cmd_killingmax(ns) -> int:
    rs = build_root_system(ns.system)
    budget = ns.etype_budget if ns.etype_budget is not None else ORDER_BUDGET
    rank = len(rs.fundamental_weights)
    lines = []
    if ns.pair is not None:
        try:
            i_s, j_s = ns.pair.split(",")
            fi, fj = int(i_s), int(j_s)
        except ValueError:
            raise DomainError(f"bad --pair {ns.pair!r}, expected two face "
                              "bitmasks like 3,0") from None
        if not (0 <= fi < 2 ** rank and 0 <= fj < 2 ** rank):
            raise DomainError(f"face bitmasks must lie in [0, {2 ** rank})")
        reports = [verify_face_pair(rs, _face_bits(fi, rank),
                                    _face_bits(fj, rank), order_budget=budget)]
        summary = {
            "system": rs.name,
            "rank": rank,
            "weyl_order": rs.weyl_order,
            "pairs_checked": 1,
            "all_hold": reports[0].holds,
        }
    elif ns.all_faces:
        reports = []
        for fi in range(2 ** rank):
            for fj in range(2 ** rank):
                reports.append(verify_face_pair(
                    rs, _face_bits(fi, rank), _face_bits(fj, rank),
                    order_budget=budget))
        sysrep = verify_system(rs, order_budget=budget)
        summary = {
            "system": sysrep.system,
            "rank": sysrep.rank,
            "weyl_order": sysrep.weyl_order,
            "pairs_checked": sysrep.pairs_checked,
            "distinct_patterns": sysrep.distinct_patterns,
            "failures": len(sysrep.failures),
            "all_hold": sysrep.holds,
            "elapsed": sysrep.elapsed,
        }
    else:
        raise DomainError("give either --all-faces or --pair i,j")
    summary["config"] = {"system": ns.system, "etype_budget": budget,
                         "version": __version__}
    summary["version"] = __version__
    for rep in reports:
        lines.append(json_text(_pair_report_dict(rep), compact=True))
    lines.append(json_text({"summary": summary}, compact=True))
    _emit("\n".join(lines) + "\n", ns.output)
    return 0


# ---------------------------------------------------------------------------
# verify


def _verify_points(rs):
    """Deterministic regular pair: positive fundamental-weight combinations."""
    wm = weight_matrix(rs)
    r = len(rs.fundamental_weights)
    cx = np.array([0.30 + 0.06 * i for i in range(r)])
    cy = np.array([0.52 + 0.05 * i for i in range(r)])
    return cx @ wm, cy @ wm


def _ball_pair(rs):
    X, Y = _verify_points(rs)
    Xb = tuple(X * (0.55 / np.linalg.norm(X)))
    Ys = tuple(Y / np.linalg.norm(Y))
    return Xb, Ys


def _check(name: str, ok: bool, measured, expected, tolerance=None) -> dict:
    row = {"name": name, "ok": bool(ok), "measured": measured,
           "expected": expected}
    if tolerance is not None:
        row["tolerance"] = tolerance
    return row


def _suite_identities(rs, t: float) -> list[dict]:
    checks = []
    lhs, rhs = normalization_identity(rs)
    checks.append(_check("normalization-identity", lhs == rhs, str(lhs), str(rhs)))
    bad = 0
    total = 0
    for subset in pi_closure_subsets(rs).values():
        total += 1
        route1 = c_constant(rs, subset)
        rho_s = rho_of(rs, subset)
        route2 = Q(subsystem_order(rs, subset)) * pi_over(rs, rho_s, subset) \
            / Q(2) ** len(subset)
        if route1 != route2:
            bad += 1
    checks.append(_check("c-constant-routes", bad == 0,
                         f"{total - bad}/{total} subsets agree", f"{total}/{total}"))
    X, Y = _verify_points(rs)
    hv = kernel_w(rs, "heat", tuple(X), tuple(Y), t=t)
    hs = float(heat_via_spherical(rs, tuple(X), tuple(Y), t))
    rel = abs(hv.value - hs) / abs(hs)
    checks.append(_check("heat-spherical-equivalence", rel <= 1e-10, hv.value, hs, 1e-10))
    if rs.family == "A":
        dv = det_heat_a(rs, tuple(X), tuple(Y), t)
        rel = abs(hv.value - dv.value) / abs(dv.value)
        checks.append(_check("det-sum-equivalence", rel <= 1e-10, hv.value,
                             dv.value, 1e-10))
    return checks


def _suite_conservation(rs, t: float, seed: int) -> list[dict]:
    checks = []
    Xb, Ys = _ball_pair(rs)
    rank = len(rs.fundamental_weights)
    if rank <= 3:
        mass = dyson_mass(rs, Xb, t)
        checks.append(_check("dyson-mass", abs(mass - 1.0) <= 1e-3, mass, 1.0, 1e-3))
        quad, direct = semigroup_defect(rs, Xb, Ys, t / 2, t / 2)
        rel = abs(quad - direct) / abs(direct)
        checks.append(_check("chapman-kolmogorov", rel <= 1e-3, quad, direct, 1e-3))
    else:
        checks.append({"name": "dyson-mass", "ok": True,
                       "measured": f"skipped: quadrature impractical at rank {rank}",
                       "expected": "n/a"})
    if rank == 1:
        emass = dyson_poisson(rs, Xb, (1.0,) + (0.0,) * (rs.ambient_dim - 1)).value
        checks.append(_check("exit-mass", abs(emass - 1.0) <= 1e-3, emass, 1.0, 1e-3))
    elif rank == 2:
        _, _, theta_max = arc_span_frame(rs)
        th, w = gauss_nodes(0.0, theta_max, 400)
        emass = float(np.dot(w, exit_density_arc(rs, "dyson", Xb, th)))
        checks.append(_check("exit-mass", abs(emass - 1.0) <= 1e-3, emass, 1.0, 1e-3))
    rng = np.random.default_rng(seed)
    wm = weight_matrix(rs)
    r = len(rs.fundamental_weights)
    worst = math.inf
    for _ in range(50):
        cx = rng.uniform(0.05, 1.0, r)
        cy = rng.uniform(0.05, 1.0, r)
        X = cx @ wm
        Y = cy @ wm
        X = tuple(X * (rng.uniform(0.1, 0.9) / np.linalg.norm(X)))
        Y = tuple(Y / np.linalg.norm(Y))
        worst = min(worst, kernel_w(rs, "poisson", X, Y).value)
    checks.append(_check("poisson-positivity", worst > 0.0, worst, "> 0"))
    return checks


def _suite_pde(rs, t: float) -> list[dict]:
    checks = []
    Xb, Ys = _ball_pair(rs)
    _, Yin = _verify_points(rs)
    Yin = tuple(Yin * (0.8 / np.linalg.norm(Yin)))
    cases = [("heat", Xb, Yin, t), ("poisson", Xb, Ys, None),
             ("newton", Xb, Yin, None), ("green", Xb, Yin, None)]
    for kind, X, Y, tt in cases:
        try:
            rep = pde_residual(rs, kind, X, Y, t=tt, h=1e-3)
            rep2 = pde_residual(rs, kind, X, Y, t=tt, h=5e-4)
        except DomainError as exc:
            checks.append({"name": f"pde-{kind}", "ok": True,
                           "measured": f"skipped: {exc}", "expected": "n/a"})
            continue
        ok = rep.passed and rep2.passed
        checks.append(_check(f"pde-{kind}", ok,
                             max(rep.residual, rep2.residual), 0.0, 1e-4))
    return checks


def _cmd_verify(ns) -> int:
    rs = build_root_system(ns.system)
    cfg = _base_config(ns, ("system", "suite", "t", "seed", "format"))
    checks = []
    if ns.suite in ("identities", "all"):
        checks += _suite_identities(rs, ns.t)
    if ns.suite in ("conservation", "all"):
        checks += _suite_conservation(rs, ns.t, ns.seed or 0)
    if ns.suite in ("pde", "all"):
        checks += _suite_pde(rs, ns.t)
    all_ok = all(c["ok"] for c in checks)
    if ns.format == "csv":
        header = ["name", "ok", "measured", "expected", "tolerance"]
        rows = [[c["name"], c["ok"], c["measured"], c["expected"],
                 c.get("tolerance")] for c in checks]
        text = csv_text(header, rows, cfg)
    else:
        text = json_text({"suite": ns.suite, "system": rs.name, "checks": checks,
                          "all_ok": all_ok, "config": cfg, "version": __version__})
    _emit(text, ns.output)
    return 0 if all_ok else 2


# ---------------------------------------------------------------------------
# export-roots, export_table


def _cmd_export_roots(ns) -> int:
    rs = build_root_system(ns.system)
    doc = to_json_dict(rs)
    doc["config"] = {"system": ns.system, "version": __version__}
    doc["version"] = __version__
    _emit(json_text(doc), ns.output)
    return 0


def export_table(kind: str, config: dict) -> str:
    """CSV text for one of the three exportable table kinds.

    asymptotic-ratio: config needs system, law, y0 and the law's other
    points, plus optional steps/precision.  histogram: config needs a
    ComparisonReport under "report".  kernel-grid: config needs system,
    kernel, y, grid, and t when the kernel wants one.
    """
    if kind == "asymptotic-ratio":
        rs = build_root_system(config["system"])
        law = config["law"]
        y0 = parse_point(config["y0"])
        x = parse_point(config["x"]) if config.get("x") else None
        lam = parse_point(config["lam"]) if config.get("lam") else None
        steps = config.get("steps") or _DEFAULT_STEPS[law]
        form, rows = asym_rows(rs, law, y0, x, lam, config.get("kind", "poisson"),
                               steps, config.get("precision"))
        label = ";".join(f"{k}={config[k]}" for k in ("y0", "x", "lam")
                         if config.get(k))
        header = ["theorem", "system", "point", "step", "measured", "model", "ratio"]
        out = [[form.kind, rs.name, label, s, m, mo, r] for s, m, mo, r in rows]
        return csv_text(header, out, dict(config, version=__version__))
    if kind == "histogram":
        report = config["report"]
        cfg = {k: v for k, v in config.items() if k != "report"}
        cfg["version"] = __version__
        return histogram_csv(histogram_rows(report), cfg)
    if kind == "kernel-grid":
        rs = build_root_system(config["system"])
        y = parse_point(config["y"])
        return kernel_grid_csv(rs, config["kernel"], y, config.get("t"),
                               config["grid"], dict(config, version=__version__))
    raise DomainError(f"unknown table kind {kind!r}")


# ---------------------------------------------------------------------------
# argument plumbing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _add_common(p, t_default=None):
    p.add_argument("--system", required=True, help="root system name, e.g. B2")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", default=None, help="write to this file atomically")
    if t_default is not ...:
        p.add_argument("--t", type=float, default=t_default)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="weylkern", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("eval", help="evaluate one reflection-averaged kernel")
    _add_common(p)
    p.add_argument("--kernel", choices=_KERNELS, required=True)
    p.add_argument("--x", help="point, e.g. 2,1 or 3/2,1/2")
    p.add_argument("--y", required=True)
    p.add_argument("--method", choices=("direct", "hp", "spherical", "extrapolated"))
    p.add_argument("--precision", type=int, help="working precision in bits")
    p.add_argument("--grid", help="lo:hi:n lattice in fundamental-weight "
                                  "coordinates; emits a kernel-grid CSV")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("asym", help="asymptotic law constants and ratio checks")
    _add_common(p, t_default=...)
    p.add_argument("--law", choices=_LAWS, required=True)
    p.add_argument("--y0", required=True)
    p.add_argument("--x")
    p.add_argument("--lam")
    p.add_argument("--kind", choices=("poisson", "newton"), default="poisson",
                   help="kernel kind for the at-zero law")
    p.add_argument("--steps", help="comma-separated parameter steps")
    p.add_argument("--precision", type=int)
    p.add_argument("--curve", help="also write a per-step ratio CSV here")
    p.set_defaults(func=_cmd_asym)

    p = sub.add_parser("dyson", help="killed and conditioned kernels")
    _add_common(p)
    p.add_argument("--kind", choices=("transition", "killed", "poisson", "newton"),
                   required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--method", choices=("direct", "hp", "spherical",
                                        "extrapolated", "det"))
    p.add_argument("--precision", type=int)
    p.set_defaults(func=_cmd_dyson)

    p = sub.add_parser("simulate", help="path simulation with a chi-square check")
    _add_common(p)
    p.add_argument("--process", choices=("killed", "dyson"), required=True)
    p.add_argument("--x0", required=True)
    p.add_argument("--exit", action="store_true",
                   help="stop at the unit sphere instead of a fixed time")
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=None,
                   help="default: WEYLKERN_SEED or 0")
    p.add_argument("--threads", type=int, default=0,
                   help="0: WEYLKERN_THREADS or a modest default")
    p.add_argument("--block-size", type=int, default=8192)
    p.add_argument("--bins", type=int, default=40)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--no-compare", action="store_true")
    p.add_argument("--histogram", help="write the binned comparison CSV here")
    p.add_argument("--report", help="write the JSON report here")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("killingmax", help="exhaustive maximizer-set factorization check")
    p.add_argument("--system", required=True)
    p.add_argument("--all-faces", action="store_true")
    p.add_argument("--pair", help="two face bitmasks i,j over simple roots")
    p.add_argument("--etype-budget", type=int, default=None,
                   help="group-order budget for enumeration")
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_killingmax)

    p = sub.add_parser("verify", help="invariant suites; exit 2 on failure")
    _add_common(p, t_default=0.25)
    p.add_argument("--suite", choices=("identities", "conservation", "pde", "all"),
                   default="all")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("export-roots", help="dump the root system as JSON")
    p.add_argument("--system", required=True)
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_export_roots)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        return ns.func(ns)
    except (RootSystemError, DomainError, CancellationOverflow) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
