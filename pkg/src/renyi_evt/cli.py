"""``renyi-evt`` command line.

Every flag can also be set through an environment variable named ``RENYI_``
plus the flag name in upper case with dashes as underscores (``--k-min`` ->
``RENYI_K_MIN``); a flag given on the command line wins.

Exit codes: 0 success, 1 failed verification, 2 bad usage, 3 budget exceeded,
4 internal consistency or precision failure.
"""
from __future__ import annotations

import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from functools import partial

import click
import mpmath

from . import __version__
from .config import (
    DEFAULT_MAX_DEGREE,
    DEFAULT_MAX_INTERVALS,
    DEFAULT_MAX_STRINGS,
    DEFAULT_PRECISION_BITS,
    Budget,
    BudgetExceeded,
    ConsistencyError,
    MapParams,
    PrecisionError,
)
from .io import RunManifest, format_table, write_output

EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_INTERNAL = 4


class RationalType(click.ParamType):
    """Positive rational given as ``3``, ``1/2`` or ``0.75`` (decimals are read exactly)."""

    name = "rational"

    def convert(self, value, param, ctx):
        if isinstance(value, Fraction):
            return value
        try:
            v = Fraction(str(value).strip())
        except (ValueError, ZeroDivisionError):
            self.fail(f"{value!r} is not a rational number", param, ctx)
        if v <= 0:
            self.fail(f"must be > 0, got {value}", param, ctx)
        return v


RATIONAL = RationalType()
POSITIVE = click.IntRange(min=1)


def _opt(flag: str, *decls, **kw):
    name = flag.split("/")[0].lstrip("-")
    return click.option(flag, *decls, envvar="RENYI_" + name.upper().replace("-", "_"), show_envvar=True, **kw)


beta_opt = _opt("--beta", type=click.IntRange(min=2), default=2, show_default=True, help="Integer base of the map.")
k_opt = _opt("--k", type=POSITIVE, default=2, show_default=True, help="Threshold 1 - beta^-k.")
k_min_opt = _opt("--k-min", type=click.IntRange(min=2), default=None, help="Start of a k sweep.")
k_max_opt = _opt("--k-max", type=click.IntRange(min=2), default=None, help="End of a k sweep (inclusive).")
lam_opt = _opt("--lambda", "lam", type=RATIONAL, default="1", show_default=True, help="n_k = floor(beta^k * lambda).")
n_opt = _opt("--n", type=POSITIVE, default=256, show_default=True, help="Orbit length.")
n_max_opt = _opt("--n-max", type=POSITIVE, default=10, show_default=True, help="Largest n in the table.")
q_max_opt = _opt("--q-max", type=POSITIVE, default=8, show_default=True, help="Largest cluster size tabulated.")
j_max_opt = _opt("--j-max", type=click.IntRange(min=0), default=None, help="Lags with exact joint measures (default: automatic).")
samples_opt = _opt("--samples", type=click.IntRange(min=0), default=100_000, show_default=True, help="Monte Carlo orbits.")
seed_opt = _opt("--seed", type=click.IntRange(min=0), default=0, show_default=True, help="Root seed of the RNG.")
workers_opt = _opt("--workers", type=POSITIVE, default=1, show_default=True, help="Worker processes.")
prec_opt = _opt(
    "--precision-bits", type=click.IntRange(min=53), default=DEFAULT_PRECISION_BITS, show_default=True, help="Working precision."
)


def common(fn):
    """Output and budget flags shared by every subcommand."""
    for deco in reversed(
        [
            _opt("--out", type=click.Path(dir_okay=False, writable=True), default=None, help="Write rows to this file."),
            _opt("--format", "fmt", type=click.Choice(["csv", "json"]), default=None, help="File format (default from extension)."),
            _opt("--budget-intervals", type=POSITIVE, default=DEFAULT_MAX_INTERVALS, show_default=True),
            _opt("--budget-strings", type=POSITIVE, default=DEFAULT_MAX_STRINGS, show_default=True),
            _opt("--budget-degree", type=POSITIVE, default=DEFAULT_MAX_DEGREE, show_default=True),
        ]
    ):
        fn = deco(fn)
    return fn


def _budget(kw) -> Budget:
    return Budget(kw.pop("budget_intervals"), kw.pop("budget_strings"), kw.pop("budget_degree"))


def _k_range(k_min, k_max, default_min=2, default_max=None):
    lo = k_min if k_min is not None else default_min
    hi = k_max if k_max is not None else (default_max if default_max is not None else lo)
    if hi < lo:
        raise click.BadParameter(f"--k-max {hi} < --k-min {lo}", param_hint="--k-max")
    return range(lo, hi + 1)


def _emit(name, rows, params, budget, out, fmt, rng=None, summary=None):
    click.echo(format_table(rows))
    if summary:
        for key, v in summary.items():
            click.echo(f"{key}: {v}")
    if out:
        manifest = RunManifest(
            subcommand=name,
            parameters=params,
            budgets={"intervals": budget.max_intervals, "strings": budget.max_strings, "degree": budget.max_degree},
            rng=rng,
            summary=summary,
        )
        for path in write_output(out, rows, manifest, fmt):
            click.echo(f"wrote {path}", err=True)
    return 0


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="renyi-evt")
def cli():
    """Partial maxima of x -> beta*x mod 1 by exact, spectral and Monte Carlo routes."""


@cli.command()
@beta_opt
@k_opt
@n_max_opt
@common
def sets(beta, k, n_max, out, fmt, **kw):
    """Exceedance sets E_i and the union measures B_n."""
    from .measure import exceedance_set, new_subinterval_counts

    budget = _budget(kw)
    p = MapParams(beta, k)
    budget.check_intervals(beta ** (n_max - 1), f"exceedance set E_{n_max - 1}")
    new = [1] + new_subinterval_counts(p, n_max, budget)
    rows = []
    acc = None
    for i in range(n_max):
        e = exceedance_set(p, i, budget)
        acc = e if acc is None else acc | e
        rows.append({"i": i, "subintervals": len(e.pairs), "new_subintervals": new[i], "leb_E": e.measure(), "B": acc.measure()})
    return _emit("sets", rows, {"beta": beta, "k": k, "n_max": n_max}, budget, out, fmt)


@cli.command()
@beta_opt
@k_opt
@n_max_opt
@common
def fib(beta, k, n_max, out, fmt, **kw):
    """F_n with B_n and P(M_n <= 1 - beta^-k) cross-checked against interval algebra where it fits."""
    from .measure import exceedance_union_measures
    from .recurrence import FibTable, fib_from_union_measures

    budget = _budget(kw)
    p = MapParams(beta, k)
    tab = FibTable(p)
    n_geo = 0
    while n_geo < n_max and beta**n_geo <= budget.max_intervals:
        n_geo += 1
    geo = exceedance_union_measures(p, n_geo, budget) if n_geo else []
    f_geo = [None] + fib_from_union_measures(p, geo) if geo else []
    rows = []
    for n in range(1, n_max + 1):
        b = tab.haiman_b(n)
        row = {"n": n, "F_n": tab.fib(n), "B_n": b, "max_prob": tab.max_prob(n)}
        if n <= n_geo:
            row["B_n_intervals"] = geo[n - 1]
            row["F_n_intervals"] = f_geo[n - 1]
            if geo[n - 1] != b or (f_geo[n - 1] is not None and f_geo[n - 1] != row["F_n"]):
                raise ConsistencyError(f"interval algebra disagrees with the recursion at n={n}")
        rows.append(row)
    return _emit("fib", rows, {"beta": beta, "k": k, "n_max": n_max}, budget, out, fmt)


@cli.command()
@beta_opt
@k_opt
@k_min_opt
@k_max_opt
@prec_opt
@common
def roots(beta, k, k_min, k_max, precision_bits, out, fmt, **kw):
    """All roots of p_k at one k, or the Newton bracket over --k-min..--k-max."""
    from .spectral import all_roots, check_bracket, dominant_root, newton_bounds

    budget = _budget(kw)
    params = {"beta": beta, "precision_bits": precision_bits}
    if k_min is None and k_max is None:
        p = MapParams(beta, k)
        p.require_k2()
        rs = all_roots(p, precision_bits, budget)
        rows = [
            {
                "index": i,
                "re": z.real,
                "im": z.imag,
                "modulus": abs(z),
                "residual": rs.residuals[i],
                "radius": rs.radii[i],
            }
            for i, z in enumerate(rs.roots)
        ]
        nb = newton_bounds(p, precision_bits)
        summary = {
            "dominant": mpmath.nstr(rs.dominant, 20),
            "r_min": mpmath.nstr(nb.r_min, 20),
            "r_max": str(nb.r_max),
            "max_other_modulus": mpmath.nstr(rs.max_other_modulus, 15),
            **{f"flag_{name}": val for name, val in rs.flags.items()},
        }
        return _emit("roots", rows, {**params, "k": k}, budget, out, fmt, summary=summary)
    rows = []
    for kk in _k_range(k_min, k_max, default_max=64):
        p = MapParams(beta, kk)
        budget.check_degree(kk + 1)
        nb = newton_bounds(p, precision_bits)
        chk = check_bracket(p, precision_bits)
        rows.append(
            {
                "k": kk,
                "r_min": nb.r_min,
                "dominant": dominant_root(p, precision_bits),
                "r_max": nb.r_max,
                "p_rmax_positive": chk.p_rmax_positive,
                "p_rmin_negative": chk.p_rmin_negative,
                "bracketed": chk.bracketed,
            }
        )
    return _emit("roots", rows, {**params, "k_min": rows[0]["k"], "k_max": rows[-1]["k"]}, budget, out, fmt)


@cli.command()
@beta_opt
@k_opt
@k_min_opt
@k_max_opt
@n_max_opt
@prec_opt
@common
def binet(beta, k, k_min, k_max, n_max, precision_bits, out, fmt, **kw):
    """Binet sum against exact F_n at one k, or the simplified floor formula over a k sweep."""
    from .evt import binet_coefficients, binet_fib, simplified_binet_check
    from .recurrence import FibTable

    budget = _budget(kw)
    params = {"beta": beta, "n_max": n_max, "precision_bits": precision_bits}
    if k_min is None and k_max is None:
        p = MapParams(beta, k)
        p.require_k2()
        coeffs = binet_coefficients(p, precision_bits, budget)
        tab = FibTable(p)
        rows = []
        for n in range(1, n_max + 1):
            f = tab.fib(n)
            b = binet_fib(coeffs, n)
            rows.append({"n": n, "F_n": f, "binet": b, "rel_err": abs(b - f) / f})
        return _emit("binet", rows, {**params, "k": k}, budget, out, fmt)
    rows = []
    for kk in _k_range(k_min, k_max, default_min=3, default_max=10):
        budget.check_degree(kk + 1)
        rep = simplified_binet_check(MapParams(beta, kk), (max(1, kk - 2), n_max), precision_bits)
        rows.append(
            {
                "k": kk,
                "n_lo": rep.n_lo,
                "n_hi": rep.n_hi,
                "mismatches": " ".join(map(str, rep.mismatches)),
                "first_unbroken": rep.first_unbroken,
                "min_margin": rep.min_margin,
                "all_agree": rep.all_agree,
            }
        )
    return _emit("binet", rows, {**params, "k_min": rows[0]["k"], "k_max": rows[-1]["k"]}, budget, out, fmt)


def _evt_row(k, beta, lam, budget, precision, exact_method):
    from .evt import convergence_record

    r = convergence_record(beta, lam, k, budget, precision, exact_method)
    return {
        "k": r.k,
        "n_k": r.n_k,
        "p_exact": r.p_exact,
        "p_fib": r.p_fib,
        "p_binet": r.p_binet,
        "limit": r.limit,
        "abs_err": r.abs_err,
        "tail_bound": r.tail_bound,
        "tail": r.tail,
        "dominant_term": r.dominant_term,
        "exact_method": r.exact_method,
        "routes_agree": r.routes_agree,
    }


@cli.command()
@beta_opt
@lam_opt
@k_min_opt
@k_max_opt
@prec_opt
@_opt(
    "--exact-method",
    type=click.Choice(["auto", "intervals", "haiman", "none"]),
    default="auto",
    show_default=True,
    help="How p_exact is computed.",
)
@workers_opt
@common
def evt(beta, lam, k_min, k_max, precision_bits, exact_method, workers, out, fmt, **kw):
    """Finite-k probabilities by every route against the limit exp(-theta*lambda)."""
    budget = _budget(kw)
    ks = _k_range(k_min, k_max, default_max=k_min if k_min is not None else 12)
    job = partial(_evt_row, beta=beta, lam=lam, budget=budget, precision=precision_bits, exact_method=exact_method)
    if workers > 1 and len(ks) > 1:
        with ProcessPoolExecutor(min(workers, len(ks))) as pool:
            rows = list(pool.map(job, ks))  # map keeps k order
    else:
        rows = [job(k) for k in ks]
    bad = [r["k"] for r in rows if not r["routes_agree"]]
    if bad:
        raise ConsistencyError(f"exact and Fibonacci routes disagree at k={bad}")
    params = {"beta": beta, "lambda": lam, "k_min": ks[0], "k_max": ks[-1], "precision_bits": precision_bits, "exact_method": exact_method}
    return _emit("evt", rows, params, budget, out, fmt)


@cli.command()
@beta_opt
@lam_opt
@k_min_opt
@k_max_opt
@j_max_opt
@common
def dprime(beta, lam, k_min, k_max, j_max, out, fmt, **kw):
    """n * sum_j P(X_0 > u_n, X_j > u_n) over lags 1..n/k, with the closed-form lower bound."""
    from .evt import dprime_sum

    budget = _budget(kw)
    ks = _k_range(k_min, k_max, default_min=3, default_max=8)
    rows = []
    for k in ks:
        d = dprime_sum(beta, lam, k, j_max, budget)
        rows.append(
            {
                "k": k,
                "n_k": d.n,
                "lags": d.lags,
                "exact_lags": d.exact_lags,
                "value": d.value,
                "lower_bound": d.lower_bound,
                "limit": d.limit,
                "bound_holds": d.value >= d.lower_bound,
            }
        )
    params = {"beta": beta, "lambda": lam, "k_min": ks[0], "k_max": ks[-1], "j_max": j_max}
    return _emit("dprime", rows, params, budget, out, fmt)


@cli.command()
@beta_opt
@k_opt
@q_max_opt
@n_opt
@samples_opt
@seed_opt
@workers_opt
@common
def cluster(beta, k, q_max, n, samples, seed, workers, out, fmt, **kw):
    """Exact conditional cluster-size law, plus a simulated histogram when --samples > 0."""
    from .evt import cluster_stats_exact
    from .orbit_sim import SimConfig, empirical_clusters, rng_identity

    budget = _budget(kw)
    law = cluster_stats_exact(beta, q_max, k, budget)
    rows = [{"q": q, "p_exact": pr, "p_geometric": Fraction(beta - 1, beta**q)} for q, pr in law.probs.items()]
    summary = {"theta_exact": law.theta, "mean_exact": law.mean}
    rng = None
    if samples:
        st = empirical_clusters(SimConfig(MapParams(beta, k), n, samples, seed), workers)
        for r in rows:
            c = st.tally.histogram.get(r["q"], 0)
            r["count_sim"] = c
            r["p_sim"] = c / st.clusters if st.clusters else float("nan")
        summary.update(
            {
                "clusters": st.clusters,
                "truncated_runs": st.tally.truncated,
                "theta_hat": st.theta_hat,
                "theta_product_limit": st.theta_km,
                "theta_se": st.theta_se,
                "chi2": st.chi2,
                "chi2_dof": st.chi2_dof,
                "chi2_p": st.chi2_p,
                "few_clusters": st.few_clusters,
            }
        )
        rng = rng_identity()
    params = {"beta": beta, "k": k, "q_max": q_max, "n": n, "samples": samples, "seed": seed}
    return _emit("cluster", rows, params, budget, out, fmt, rng=rng, summary=summary)


@cli.command()
@beta_opt
@k_opt
@n_opt
@samples_opt
@seed_opt
@workers_opt
@_opt("--uniformity/--no-uniformity", default=False, help="Also chi-square X_0 and X_5 against U(0,1).")
@common
def simulate(beta, k, n, samples, seed, workers, uniformity, out, fmt, **kw):
    """Monte Carlo estimate of P(M_n <= 1 - beta^-k) against the exact value."""
    from .orbit_sim import SimConfig, empirical_clusters, empirical_max_prob, rng_identity, simulate as run_sim, uniformity_check
    from .recurrence import FibTable

    budget = _budget(kw)
    if samples < 100:
        raise click.BadParameter("simulate needs --samples >= 100", param_hint="--samples")
    cfg = SimConfig(MapParams(beta, k), n, samples, seed)
    tally = run_sim(cfg, workers)
    est = empirical_max_prob(cfg, tally=tally)
    st = empirical_clusters(cfg, tally=tally)
    exact = FibTable(cfg.params).max_prob(n)
    rows = [
        {
            "beta": beta,
            "k": k,
            "n": n,
            "samples": samples,
            "seed": seed,
            "estimate": est.estimate,
            "stderr": est.stderr,
            "exact": exact,
            "z": est.z_score(exact),
            "clusters": st.clusters,
            "truncated_runs": tally.truncated,
            "theta_hat": st.theta_hat,
            "theta_product_limit": st.theta_km,
        }
    ]
    summary = None
    if uniformity:
        summary = {f"uniform_X{u.t}_p": u.p_value for u in uniformity_check(cfg)}
    params = {"beta": beta, "k": k, "n": n, "samples": samples, "seed": seed, "workers": workers}
    return _emit("simulate", rows, params, budget, out, fmt, rng=rng_identity(), summary=summary)


@cli.command()
@_opt("--quick/--full", default=False, help="Smaller brute-force grid and 2*10^4 simulated orbits.")
@common
def verify(quick, out, fmt, **kw):
    """Run every acceptance criterion; exit 1 if any fails."""
    from .acceptance import SEED, run_all

    budget = _budget(kw)
    results = run_all(quick=quick)
    for r in results:
        click.echo(r.line())
    rows = [{"criterion": r.number, "name": r.name, "passed": r.passed, "seconds": round(r.seconds, 3), "detail": r.detail} for r in results]
    if out:
        manifest = RunManifest("verify", {"quick": quick, "seed": SEED}, {"intervals": budget.max_intervals})
        write_output(out, rows, manifest, fmt)
    failed = [r.number for r in results if not r.passed]
    click.echo(f"{len(results) - len(failed)}/{len(results)} criteria passed" + (f"; failed: {failed}" if failed else ""))
    return EXIT_FAILED if failed else 0


def main(argv: list[str] | None = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        rv = cli.main(args=argv, prog_name="renyi-evt", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE if isinstance(e, click.UsageError) else e.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_FAILED
    except BudgetExceeded as e:
        click.echo(f"budget exceeded: {e.what} needs {e.needed}, limit {e.limit}", err=True)
        return EXIT_BUDGET
    except (ConsistencyError, PrecisionError) as e:
        click.echo(f"internal check failed: {e}", err=True)
        return EXIT_INTERNAL
    except ValueError as e:
        click.echo(f"invalid parameters: {e}", err=True)
        return EXIT_USAGE
    return rv if isinstance(rv, int) else 0


def run() -> None:
    sys.exit(main())
