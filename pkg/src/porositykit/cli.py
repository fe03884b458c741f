"""Command-line front end.

Every subcommand builds its objects, runs one analysis and writes either a
CSV table or a JSON report.  Exit codes: 0 success, 2 invalid input, 3 an
inequality that should hold did not.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import counterexample as cx
from .dimension import (antichain_sums, box_dimension, dimension_certificate,
                        holder_step, max_collection_sum, packing_dimension_estimate,
                        write_witness_csv)
from .dyadic import CubeIndex, root
from .errors import InvalidArgument, PorosityKitError
from .measures import (CascadeMeasure, comb_measure, sample_points,
                       write_masses_csv)
from .porosity import (flag_matrix, por_set, porosity_profile, running_fractions,
                       write_profile_csv)
from .reports import Report, report_schema_version
from .sets import (DyadicSet, PorousScaleSet, even_digits_zero, porous_scales,
                   write_survivors_csv)
from .specfile import build_measure, build_set, load_spec
from .theorem import (constants, dim_bound, epsilon0, kdef_holds, porosity_gain,
                      R_target, R_value, verify_claim1)

EXIT_OK, EXIT_INVALID, EXIT_CHECK = 0, 2, 3


# -- argument helpers ------------------------------------------------------------

def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    """``4,6`` or an inclusive range ``4:8``."""
    if ":" in text:
        a, b = text.split(":")
        return list(range(int(a), int(b) + 1))
    return [int(v) for v in text.split(",") if v.strip()]


def _grid(text: str) -> list[float]:
    """``lo:hi:count`` evenly spaced, endpoints included."""
    try:
        lo, hi, n = text.split(":")
        return np.linspace(float(lo), float(hi), int(n)).tolist()
    except ValueError as exc:
        raise InvalidArgument(f"field 'alpha-grid': expected lo:hi:count, got {text!r}") from exc


def _point(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidArgument(f"field 'x': cannot parse {text!r}") from exc


def _object_spec(arg: str, params: list[str], args) -> dict:
    spec = dict(load_spec(arg)) if Path(arg).is_file() else {"kind": arg}
    for item in params or []:
        if "=" not in item:
            raise InvalidArgument(f"field 'param': expected key=value, got {item!r}")
        key, value = item.split("=", 1)
        spec[key.strip().replace("-", "_")] = value.strip()
    for key in ("q", "log_base", "max_depth"):
        v = getattr(args, key, None)
        if v is not None:
            spec[key] = str(v)
    return spec


def _measure(args) -> CascadeMeasure:
    if not getattr(args, "measure", None):
        raise InvalidArgument("field 'measure' is required")
    return build_measure(_object_spec(args.measure, args.param, args))


def _set(args) -> DyadicSet:
    return build_set(_object_spec(args.set, args.param, args))


def _emit_table(header: list[str], rows: list[list], out: str | None) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    if out:
        Path(out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _emit_report(rep: Report, args) -> int:
    path = args.report or (args.out if args.format == "json" else None)
    text = rep.write(path)
    if path is None:
        sys.stdout.write(text)
    return EXIT_CHECK if rep.failed else EXIT_OK


def _config(args) -> dict:
    skip = {"func", "report", "out", "format"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# -- construct --------------------------------------------------------------------

def cmd_construct(args) -> int:
    if args.format == "csv" and not args.out:
        raise InvalidArgument("field 'out' is required for CSV output")
    rep = Report("construct", _config(args))
    if args.set:
        E = _set(args)
        depth = args.depth
        rows = E.count(depth)
        if args.format == "csv":
            write_survivors_csv(E, [depth], args.out)
        rep.add("survivor_count", "set construction", rows, None, None,
                build_depth=E.build_depth)
    else:
        m = _measure(args)
        if args.format == "csv":
            rows = write_masses_csv(m, args.depth, args.out)
        else:
            rows = 1 << (m.arity_log * args.depth)
        total = math.fsum(m.level_masses(m.arity_log * args.depth).tolist())
        rep.add("total_mass", "measure construction", total, 1.0,
                abs(total - 1) <= 1e-12, cubes=rows)
    if args.format == "csv":
        return EXIT_CHECK if rep.failed else EXIT_OK
    return _emit_report(rep, args)


# -- porosity -----------------------------------------------------------------------

def _porosity_points(args, target) -> list:
    if args.x:
        return [_point(v) for v in args.x.split(",")]
    if isinstance(target, DyadicSet):
        t = min(target.build_depth, 62)
        return [Fraction(2 * int(b) + 1, 1 << (t + 1))
                for b in target.sample_bits(args.seed, args.samples, t)]
    depth = max(args.arity_log * args.i_max + args.window_bits + 1, 8)
    return sample_points(target, args.seed, min(depth, target.max_depth), args.samples)


def _scale_agreement(args, E: DyadicSet, pts, rep: Report) -> None:
    prm = E.params
    ps = PorousScaleSet(prm["m"], prm["k"], prm["n"], prm.get("l_max"))
    full = PorousScaleSet(prm["m"], prm["k"], prm["n"])
    S = args.density_scale
    got, dens = porous_scales(full, S)
    enum = sum(1 for s in range(1, S) if full.contains(s))
    rep.add("porous_scale_count", "porous scales of the mean porous example",
            len(got), enum, len(got) == enum, density=dens)
    thresh = 0.5 - 2.0 ** (-prm["k"] * prm["n"])
    n = args.resolution or min(E.build_depth, 30)
    scales = range(1, n - 2)
    agree = total = contained = on = 0
    for x in pts:
        for s in scales:
            r = Fraction(1, 1 << s)
            v = por_set(E, x, r, n)
            slack = 2 * float(Fraction(1, 1 << n) / r)
            a = ps.contains(s)
            agree += (v >= thresh) == a
            total += 1
            if a:
                on += 1
                contained += v >= thresh - slack
    frac = agree / total
    rep.add("engine_vs_analytic_agreement", "porosity on the analytic scale set",
            frac, args.min_agreement, frac >= args.min_agreement,
            pairs=total, threshold=thresh, resolution=n)
    rep.add("analytic_scales_porous", "porosity on the analytic scale set",
            contained, on, contained == on)


def cmd_porosity(args) -> int:
    target = _set(args) if args.set else _measure(args)
    if args.set is None and args.eps is None:
        raise InvalidArgument("field 'eps' is required for measures")
    pts = _porosity_points(args, target)
    rep = Report("porosity", _config(args))
    if args.analytic:
        if not isinstance(target, DyadicSet) or target.rule != "example":
            raise InvalidArgument("field 'analytic' needs the example set")
        _scale_agreement(args, target, pts, rep)
        return _emit_report(rep, args)
    profiles = []
    for n, x in enumerate(pts):
        profiles.append(porosity_profile(target, x, args.i_max, args.offset, args.arity_log,
                                         args.eps, args.resolution, args.window_bits,
                                         point_id=f"p{n}"))
    if args.format == "csv":
        if not args.out:
            raise InvalidArgument("field 'out' is required for CSV output")
        write_profile_csv(profiles, args.alpha, args.out)
        return EXIT_OK
    for prof in profiles:
        f = prof.flags(args.alpha)
        rep.add(f"mean_porosity_{prof.point_id}", "mean porosity fraction",
                float(f.mean()), None, None, max_slack=float(prof.slack.max()))
    return _emit_report(rep, args)


# -- mean-porosity ----------------------------------------------------------------

def cmd_mean_porosity(args) -> int:
    m = _measure(args)
    checkpoints = sorted(set(args.checkpoints) | {args.depth})
    depth = args.depth
    need = depth + args.window_bits + 1
    if need > m.max_bits:
        raise InvalidArgument(f"field 'max-depth': measure needs {need} binary levels")
    pts = sample_points(m, args.seed, -(-need // m.arity_log), args.samples)
    R = running_fractions(flag_matrix(m, pts, depth, args.eps, args.alpha, args.window_bits))
    rep = Report("mean-porosity", _config(args))
    medians = []
    for c in checkpoints:
        med = float(np.median(R[:, c - 1]))
        medians.append(med)
        rep.add(f"median_fraction_depth_{c}", "mean porosity of the alternating cascade",
                med, args.min_median, med >= args.min_median,
                quartiles=[float(np.quantile(R[:, c - 1], q)) for q in (0.25, 0.75)])
    mono = all(b >= a for a, b in zip(medians, medians[1:]))
    rep.add("median_nondecreasing", "mean porosity of the alternating cascade",
            medians, None, mono)
    if args.format == "csv":
        rows = [[i, c, repr(float(R[i, c - 1]))] for i in range(len(pts)) for c in checkpoints]
        _emit_table(["sample_id", "depth", "fraction"], rows, args.out)
        if args.report:
            rep.write(args.report)
        return EXIT_CHECK if rep.failed else EXIT_OK
    return _emit_report(rep, args)


# -- dimension -----------------------------------------------------------------------

def cmd_dimension(args) -> int:
    rep = Report("dimension", _config(args))
    if args.comb_family:
        lo, hi = args.ratio_range
        for k in _ints(args.comb_family):
            m = comb_measure(k, (0, (1 << k) - 1), args.depth)
            est = packing_dimension_estimate(m, args.samples, args.depth, args.quantile,
                                             args.seed, args.window)
            alpha = (1 - 2.0 ** (-k - 3)) / 2
            b = dim_bound(1, args.p, alpha)
            ratio = b.bound / est.value
            rep.add(f"comb_k{k}_bound_ratio", "bound against the two-ends comb",
                    ratio, [lo, hi], est.value <= b.bound and lo <= ratio <= hi,
                    estimate=est.value, bound_value=b.bound, alpha=alpha, bound_k=b.k)
    elif args.set:
        E = _set(args)
        hi = E.build_depth // E.arity_log
        est = box_dimension(E, max(1, args.depth_lo or hi // 2), hi, args.window)
        rep.add("box_dimension_upper", "box counting", est.limsup, None, None,
                lower=est.liminf)
    else:
        m = _measure(args)
        est = packing_dimension_estimate(m, args.samples, args.depth, args.quantile,
                                         args.seed, args.window, args.depth_lo)
        rep.add("packing_dimension_estimate", "local dimension envelopes", est.value,
                None, None, liminf=est.liminf, max_envelope=est.limsup)
    return _emit_report(rep, args)


# -- certify ------------------------------------------------------------------------

def _holder_trials(args, rep: Report) -> None:
    rng = np.random.default_rng(args.seed)
    bad, worst, t0 = 0, -math.inf, time.perf_counter()
    for _ in range(args.holder_trials):
        N = int(rng.integers(1, 40))
        masses = rng.random(N) * rng.choice([1.0, 1e-3, 1e-9])
        masses[rng.random(N) < 0.1] = 0.0
        D = float(rng.uniform(0.05, 3.0))
        tau = float(rng.uniform(0.001, 0.999)) * D
        r = float(2.0 ** -rng.uniform(0, 40))
        lhs, rhs, ok = holder_step(masses, r, tau, D)
        bad += not ok
        worst = max(worst, lhs - rhs)
    rep.add("holder_step_violations", "power-mean step of the cube-sum bound", bad, 0,
            bad == 0, trials=args.holder_trials, worst_excess=worst,
            seconds=round(time.perf_counter() - t0, 3))


def _oracle_trials(args, rep: Report) -> None:
    rng = np.random.default_rng(args.seed)
    mismatches = 0
    for _ in range(args.oracle_trials):
        depth = int(rng.integers(0, 4))
        i_min = int(rng.integers(0, depth + 1))
        terms = [[Fraction(int(rng.integers(0, 1000)), 1000) for _ in range(2 ** i)]
                 for i in range(depth + 1)]
        best, wit = max_collection_sum(terms, 2, i_min)
        brute = max(antichain_sums(terms, 2, i_min))
        mismatches += (best != brute) or (sum((terms[i][j] for i, j in wit), Fraction(0)) != best)
    rep.add("tree_recursion_vs_enumeration", "max-collection recursion", mismatches, 0,
            mismatches == 0, trials=args.oracle_trials)


def cmd_certify(args) -> int:
    rep = Report("certify", _config(args))
    if args.holder_trials:
        _holder_trials(args, rep)
    if args.oracle_trials:
        _oracle_trials(args, rep)
    if args.measure:
        m = _measure(args)
        if args.depth > m.max_depth:
            raise InvalidArgument(f"field 'depth': measure has depth {m.max_depth}")
        expect = args.expect.split(",") if args.expect else [None] * len(args.D)
        if len(expect) != len(args.D):
            raise InvalidArgument("field 'expect': one verdict per D value")
        for D, want in zip(args.D, expect):
            tau = D / 2 if args.tau == "half" else float(args.tau)
            v = dimension_certificate(m, D, tau, args.i_min, args.depth)
            rep.add(f"certificate_D_{D:g}", "cube-sum dimension certificate", v.verdict,
                    want, None if want is None else v.verdict == want, **v.as_dict())
            if args.witness_out and v.witness is not None:
                write_witness_csv(v, f"{args.witness_out}.D{D:g}.csv")
    if not rep.results:
        raise InvalidArgument("field 'measure': nothing to certify")
    return _emit_report(rep, args)


# -- bound --------------------------------------------------------------------------

def _alphas(args) -> list[float]:
    if args.alpha_grid:
        return _grid(args.alpha_grid)
    if args.alpha_approach:
        n = args.alpha_approach
        # gaps 2^-7 .. 2^-54: from the first alpha with 2^k >= C down to the
        # smallest gap still representable below 1/2
        return [0.5 - 2.0 ** (-7 - 47 * j / max(n - 1, 1)) for j in range(n)]
    if args.alpha is not None:
        return _floats(args.alpha)
    raise InvalidArgument("field 'alpha': give --alpha, --alpha-grid or --alpha-approach")


def _constants_checks(d: int, alpha: float, p: float, rep: Report) -> None:
    tc = constants(d, alpha)
    k, l = tc.k, tc.l
    exact = (kdef_holds(d, alpha, k, l) and not kdef_holds(d, alpha, k + 1, l)
             and (k == 1 or not kdef_holds(d, alpha, k - 1, l)))
    rep.add(f"k_minimal_alpha_{alpha!r}", "defining inequality of k", k, None, exact)
    D0 = d - p + math.log2(9 * tc.C) / k
    D = D0 + 0.05 if D0 >= d else (D0 + d) / 2
    tcD = constants(d, alpha, D=D, p=p)
    eps = epsilon0(tcD, 2, check=False)
    got, want = R_value(tcD, eps, 2), R_target(tcD)
    resid = abs(got - want) / want
    rep.add(f"eps0_residual_alpha_{alpha!r}", "closed form of eps0", resid, 1e-12,
            resid <= 1e-12)
    n, K = porosity_gain(tcD, p)
    x = k * tcD.delta * D
    target = k - tcD.log2C
    tight = x * n > target and not x * (n - 1) > target and K > 1
    rep.add(f"porosity_gain_alpha_{alpha!r}", "porosity gain length", n, K, tight, K=K, D=D)


def cmd_bound(args) -> int:
    alphas = _alphas(args)
    header = ["alpha", "l", "k", "C", "N", "D0", "bound", "coarse_bound", "theorem_valid"]
    rows, rep = [], Report("bound", _config(args))
    for a in alphas:
        b = dim_bound(args.d, args.p, a, args.c_override)
        D0 = args.d - args.p + math.log2(9 * b.C) / b.k
        rows.append([repr(a), b.l, b.k, repr(float(b.C)), b.N, repr(D0), repr(b.bound),
                     repr(b.coarse_bound), int(b.theorem_valid)])
        rep.add(f"bound_alpha_{a!r}", "packing dimension bound", b.bound, float(args.d), None,
                k=b.k, l=b.l, C=b.C, coarse_bound=b.coarse_bound,
                theorem_valid=b.theorem_valid)
        if args.check:
            _constants_checks(args.d, a, args.check_p, rep)
    if args.format == "csv":
        _emit_table(header, rows, args.out)
        if args.report:
            rep.write(args.report)
        return EXIT_CHECK if rep.failed else EXIT_OK
    return _emit_report(rep, args)


# -- claim1 -------------------------------------------------------------------------

CLAIM1_MEASURES = ("lebesgue", "bernoulli", "counterexample")


def claim1_instances(measures, ks, ns, p: float = 0.5, margin: float = 0.05,
                     eps_factor: float = 0.5, max_depth: int = 64):
    """Yield ``(label, result)`` for every measure, ``k``, ``n`` and test cube."""
    for name in measures:
        spec = {"kind": name, "max_depth": str(max_depth)}
        if name == "bernoulli":
            spec["q"] = "0.25"
        m = build_measure(spec)
        for k in ks:
            alpha = (1 - 2.0 ** (-k - 3)) / 2
            base = constants(1, alpha, p=p)
            if base.k != k:
                raise InvalidArgument(f"field 'k': no alpha found with k={k}")
            D = base.D0 + margin
            tc = constants(1, alpha, D=D, p=p)
            for n in ns:
                eps = epsilon0(tc, n) * eps_factor
                for Q in (root(k), CubeIndex(k, (1,))):
                    res = verify_claim1(m, Q, tc, n, eps)
                    yield f"{name}_k{k}_n{n}_Q{'-'.join(map(str, Q.digits)) or 'root'}", res, tc


def cmd_claim1(args) -> int:
    rep = Report("claim1", _config(args))
    for label, res, tc in claim1_instances(args.measures.split(","), _ints(args.k),
                                           _ints(args.n), args.p, args.margin,
                                           args.eps_factor, args.max_depth):
        rep.add(label, "one-cube weighted estimate", res.lhs, res.rhs, res.holds,
                porous_counts=res.porous_counts, eps=res.eps, D=tc.D, alpha=tc.alpha)
    return _emit_report(rep, args)


# -- counterexample -------------------------------------------------------------------

def cmd_counterexample_verify(args) -> int:
    rep = Report("counterexample verify", _config(args))
    b = args.l + args.m
    i_max = args.depth // b
    if i_max < 1:
        raise InvalidArgument("field 'depth': must cover at least one block of l+m levels")
    build = max(args.mass_depth, (i_max + 1) * b)
    E = even_digits_zero(build)
    mu = build_measure({"kind": "counterexample", "log_base": str(args.log_base),
                        "max_depth": str(build + 1)})
    got = cx.measure_of_set_approx(mu, E, args.mass_depth)
    j = np.arange(2, args.mass_depth + 1, 2)
    closed = float(np.prod(1 - np.log(args.log_base) / np.log(j + 2)))
    rep.add(f"mass_of_E_{args.mass_depth}", "mass of the digit-constrained set", got,
            args.mass_limit, got < args.mass_limit, closed_form=closed)
    rep.add("mass_matches_closed_form", "mass of the digit-constrained set",
            abs(got - closed), 1e-10, abs(got - closed) <= 1e-10)
    ew = cx.EtaWeights(args.l, args.m, E, args.log_base)
    for i in range(1, i_max + 1):
        total, ok = cx.weighted_sum_check(ew, mu, i)
        rep.add(f"osa2_sum_i{i}", "summable weighted masses", total, 1.0, ok)
    pts = sample_points(mu, args.seed, i_max * b, args.chains)
    worst, bad = -math.inf, 0
    for pt in pts:
        prod, bound, _ = cx.eta_product(pt, ew, i_max)
        worst = max(worst, prod - bound)
        bad += prod > bound + 1e-12
    rep.add("eta_product_within_c_bound", "decay of weight products", bad, 0, bad == 0,
            chains=len(pts), worst_excess=worst)
    return _emit_report(rep, args)


def cmd_counterexample_digits(args) -> int:
    rep = Report("counterexample digits", _config(args))
    mu = build_measure({"kind": "counterexample", "log_base": str(args.log_base),
                        "max_depth": str(args.i + 1)})
    smaller, devs = 0, []
    for seed in range(args.seed, args.seed + args.seeds):
        r = cx.digit_equal_fraction(mu, seed, args.i, (args.i_short,))
        long_emp, long_exp = r[args.i]
        short_emp = r[args.i_short][0]
        devs.append(abs(long_emp - long_exp))
        smaller += long_emp < short_emp
    frac = smaller / args.seeds
    rep.add("digit_fraction_deviation", "equal-neighbour digit frequency", max(devs),
            args.tol, max(devs) <= args.tol, median_deviation=float(np.median(devs)))
    rep.add("digit_fraction_decreases", "equal-neighbour digit frequency", frac,
            args.min_fraction, frac >= args.min_fraction)
    return _emit_report(rep, args)


# -- parser ---------------------------------------------------------------------------

def _add_output(p: argparse.ArgumentParser, default: str = "json") -> None:
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=default)
    p.add_argument("--report", help="also write the JSON report here")


def _add_object(p: argparse.ArgumentParser, sets: bool = True) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--measure", help="measure spec file or kind name")
    if sets:
        g.add_argument("--set", help="set spec file or kind name")
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="override a spec field (repeatable)")
    p.add_argument("--q", type=float)
    p.add_argument("--log-base", type=float)
    p.add_argument("--max-depth", type=int)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="porositykit", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version",
                    version=f"report schema {report_schema_version()}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="survivor or mass table at one depth")
    _add_object(p)
    p.add_argument("--depth", type=int, required=True)
    _add_output(p, "csv")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("porosity", help="porosity profiles at points")
    _add_object(p)
    p.add_argument("--x", help="comma-separated points, e.g. 1/3,0.25")
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--i-max", type=int, default=20)
    p.add_argument("--offset", type=int, default=0)
    p.add_argument("--arity-log", type=int, default=1)
    p.add_argument("--eps", type=float)
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--resolution", type=int)
    p.add_argument("--window-bits", type=int, default=12)
    p.add_argument("--analytic", action="store_true",
                   help="compare flags with the example set's porous scales")
    p.add_argument("--density-scale", type=int, default=924)
    p.add_argument("--min-agreement", type=float, default=0.95)
    _add_output(p, "csv")
    p.set_defaults(func=cmd_porosity)

    p = sub.add_parser("mean-porosity", help="median mean-porosity fractions of samples")
    _add_object(p, sets=False)
    p.add_argument("--alpha", type=float, default=0.4)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth", type=int, default=30)
    p.add_argument("--checkpoints", type=_ints, default=[10, 20, 30])
    p.add_argument("--window-bits", type=int, default=12)
    p.add_argument("--min-median", type=float, default=0.8)
    _add_output(p)
    p.set_defaults(func=cmd_mean_porosity)

    p = sub.add_parser("dimension", help="packing or box dimension estimates")
    _add_object(p)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--depth", type=int, default=400)
    p.add_argument("--depth-lo", type=int)
    p.add_argument("--quantile", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--comb-family", help="k range, e.g. 4:8, of two-ends comb measures")
    p.add_argument("--p", type=float, default=1 - 1e-9)
    p.add_argument("--ratio-range", type=_floats, default=[1.0, 12.0])
    _add_output(p)
    p.set_defaults(func=cmd_dimension)

    p = sub.add_parser("certify", help="cube-sum dimension certificates and their checks")
    _add_object(p, sets=False)
    p.add_argument("--D", type=_floats, default=[])
    p.add_argument("--tau", default="half", help="'half' for D/2, or a constant")
    p.add_argument("--depth", type=int, default=30)
    p.add_argument("--i-min", type=int, default=1)
    p.add_argument("--expect", help="comma-separated expected verdicts, one per D")
    p.add_argument("--witness-out", help="path prefix for witness CSV files")
    p.add_argument("--holder-trials", type=int, default=0)
    p.add_argument("--oracle-trials", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("bound", help="constants and dimension bound per alpha")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--alpha")
    p.add_argument("--alpha-grid", help="lo:hi:count")
    p.add_argument("--alpha-approach", type=int, help="N values 1/2 - 2^-e, e from 7 to 54")
    p.add_argument("--c-override", type=float)
    p.add_argument("--check", action="store_true", help="verify k, eps0 and gain length")
    p.add_argument("--check-p", type=float, default=0.5)
    _add_output(p, "csv")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("claim1", help="one-cube weighted estimate on a grid of instances")
    p.add_argument("--measures", default=",".join(CLAIM1_MEASURES))
    p.add_argument("--k", default="4,6")
    p.add_argument("--n", default="2,3")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--margin", type=float, default=0.05)
    p.add_argument("--eps-factor", type=float, default=0.5)
    p.add_argument("--max-depth", type=int, default=64)
    _add_output(p)
    p.set_defaults(func=cmd_claim1)

    p = sub.add_parser("counterexample", help="checks on the alternating cascade")
    csub = p.add_subparsers(dest="action", required=True)
    v = csub.add_parser("verify", help="set mass, weighted sums and weight products")
    v.add_argument("--depth", type=int, default=24)
    v.add_argument("--mass-depth", type=int, default=40)
    v.add_argument("--mass-limit", type=float, default=0.01)
    v.add_argument("--l", type=int, default=1)
    v.add_argument("--m", type=int, default=2)
    v.add_argument("--log-base", type=float, default=math.e)
    v.add_argument("--chains", type=int, default=200)
    v.add_argument("--seed", type=int, default=0)
    _add_output(v)
    v.set_defaults(func=cmd_counterexample_verify)
    g = csub.add_parser("digits", help="equal-neighbour digit frequency")
    g.add_argument("--i", type=int, default=10 ** 6)
    g.add_argument("--i-short", type=int, default=1000)
    g.add_argument("--seeds", type=int, default=100)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--tol", type=float, default=0.01)
    g.add_argument("--min-fraction", type=float, default=0.95)
    g.add_argument("--log-base", type=float, default=math.e)
    _add_output(g)
    g.set_defaults(func=cmd_counterexample_digits)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ArithmeticError as exc:           # a residual check inside a computation
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (PorosityKitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
