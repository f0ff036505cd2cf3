"""``smoothcert`` command line.

Exit codes: 0 success, 2 invalid input, 3 a verdict came out negative
(abstention, uncertified probe, no witness, failed sweep check).
"""
from __future__ import annotations

import csv
import io
import json
import sys

import click

from . import bounds
from .certify import certify_l2, parse_classifier, smoothed_scores, tv_ball_certificate
from .noise import IsotropicGaussian, parse_distribution, parse_vector, spawn_seeds
from .norms import lp_norm, parse_p
from .sweep import CSV_HEADER, SweepSpec, run_sweep
from .tv import tv_shift
from .witness import NoWitness, build_witness, verify_witness

EXIT_OK, EXIT_INVALID, EXIT_VERDICT = 0, 2, 3


def _csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerows(rows)
    return buf.getvalue()


def _emit(fmt, doc, rows):
    if fmt == "json":
        click.echo(json.dumps(doc, indent=2, default=str))
    else:
        click.echo(_csv(rows), nl=False)


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {text!r}")


def common(f):
    f = click.option("--seed", type=int, default=42, show_default=True, help="Master RNG seed.")(f)
    f = click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
                     show_default=True)(f)
    return f


@click.group()
def cli():
    """Randomized-smoothing certificates, lower bounds and witnesses."""


@cli.command()
@click.option("--dist", required=True, help="e.g. gauss:sigma=1,d=3 or box:r=1,d=2 or iid:laplace:b=1,d=1")
@click.option("--shift", "--v", "shift", required=True, help="Comma-separated shift v, or one value to broadcast.")
@click.option("--mc/--no-mc", default=True, help="Fall back to Monte Carlo when no closed form exists.")
@click.option("--n", "n", type=int, default=200_000, show_default=True)
@common
def tv(dist, shift, mc, n, seed, fmt):
    """Total variation between D and D + v."""
    d = parse_distribution(dist)
    v = parse_vector(shift, d.d)
    res = tv_shift(d, v, allow_mc=mc, n=n, seed=seed)
    if res is None:
        raise ValueError(f"no closed form for {dist}; rerun with --mc")
    doc = {"dist": d.spec(), "shift": v.tolist(), **res.as_dict()}
    eps = lp_norm(v, 2)
    rows = [["2", d.d, repr(eps), "", key, repr(float(val))]
            for key, val in (("tv", res.value), ("tv_lo", res.lo), ("tv_hi", res.hi))]
    _emit(fmt, doc, rows)
    return EXIT_OK


@cli.command("bounds")
@click.option("--p", "p", required=True, help="Norm order, a number >= 2 or 'inf'.")
@click.option("--d", "d", type=int, required=True)
@click.option("--eps", type=float, required=True)
@click.option("--delta", type=float, required=True)
@click.option("--fraction", type=float, default=bounds.DEFAULT_FRACTION, show_default=True)
@common
def bounds_cmd(p, d, eps, delta, fraction, seed, fmt):
    """Closed-form variance lower bounds and sizing for one configuration."""
    report = bounds.bound_report(bounds.BoundConfig(parse_p(p), d, eps, delta), fraction=fraction)
    click.echo(report.to_json() if fmt == "json" else report.to_csv(), nl=fmt == "json")
    return EXIT_OK


@cli.command()
@click.option("--dist", required=True)
@click.option("--classifier", "clf", required=True, help="linear:w=[..],b=.. or constant:c=..")
@click.option("--x", "x", required=True)
@click.option("--n0", type=int, default=100, show_default=True)
@click.option("--n", "n", type=int, default=100_000, show_default=True)
@click.option("--alpha", type=float, default=0.001, show_default=True)
@click.option("--probe", multiple=True, help="Shift to certify through the TV ball (repeatable).")
@click.option("--min-radius", type=float, default=0.0, show_default=True,
              help="Fail unless the l_2 radius exceeds this.")
@common
def certify(dist, clf, x, n0, n, alpha, probe, min_radius, seed, fmt):
    """Certify a classifier's smoothed prediction at x."""
    d = parse_distribution(dist)
    f = parse_classifier(clf)
    xv = parse_vector(x, d.d)
    probes = [parse_vector(s, d.d) for s in probe]
    s_cert, s_gap, s_probe = spawn_seeds(seed, 3)
    doc = {"dist": d.spec(), "x": xv.tolist()}
    rows = []
    ok = True
    if isinstance(d, IsotropicGaussian):
        res = certify_l2(f, d, xv, n0=n0, n=n, alpha=alpha, seed=s_cert)
        doc["certificate"] = res.as_dict()
        rows += [["2", d.d, "", "", "l2_radius", repr(res.l2_radius)],
                 ["inf", d.d, "", "", "linf_radius", repr(res.linf_radius)]]
        ok = not res.abstained and res.l2_radius > min_radius
    if probes or not isinstance(d, IsotropicGaussian):
        scores = smoothed_scores(f, d, xv, n, alpha, s_gap)
        verdicts = tv_ball_certificate(d, f, xv, scores.gap_lower, probes, seed=s_probe)
        doc["scores"] = scores.as_dict()
        doc["probes"] = [v.as_dict() for v in verdicts]
        rows.append(["", d.d, "", "", "gap_lower", repr(scores.gap_lower)])
        for v, pv in zip(verdicts, probes):
            rows.append(["2", d.d, repr(lp_norm(pv, 2)), "", f"probe_{v.index}_margin", repr(v.margin)])
        ok = ok and scores.gap_lower > 0 and all(v.status == "certified" for v in verdicts)
    doc["verdict"] = "certified" if ok else "not-certified"
    _emit(fmt, doc, rows)
    return EXIT_OK if ok else EXIT_VERDICT


@cli.command()
@click.option("--dist", required=True)
@click.option("--shift", "--v", "shift", required=True)
@click.option("--delta", type=float, required=True)
@click.option("--n", "n", type=int, default=200_000, show_default=True)
@click.option("--ci-level", type=float, default=0.999, show_default=True)
@common
def witness(dist, shift, delta, n, ci_level, seed, fmt):
    """Build and verify a non-robust witness for shift v at level delta."""
    d = parse_distribution(dist)
    v = parse_vector(shift, d.d)
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    eps = repr(lp_norm(v, 2))
    try:
        w = build_witness(d, v, delta)
    except NoWitness as exc:
        _emit(fmt, {"dist": d.spec(), "verdict": "no-witness", "reason": str(exc)},
              [["2", d.d, eps, repr(delta), "witness_exists", "0.0"]])
        return EXIT_VERDICT
    res = verify_witness(w, d, n, seed, delta, ci_level)
    doc = {"dist": d.spec(), "witness": w.as_dict(), "check": res.as_dict(),
           "verdict": "verified" if res.passed else "failed"}
    rows = [["2", d.d, eps, repr(delta), key, repr(float(val))] for key, val in (
        ("witness_exists", 1.0), ("tv", w.tv), ("score_at_0", res.score_at_0),
        ("expected_score_at_0", res.expected_score_at_0), ("score_at_v", res.score_at_v),
        ("gap_lower", res.gap_lower), ("passed", float(res.passed)))]
    _emit(fmt, doc, rows)
    return EXIT_OK if res.passed else EXIT_VERDICT


@cli.command()
@click.option("--p", "ps", default="2,4,inf", show_default=True)
@click.option("--d", "ds", default="64,256,1024,4096", show_default=True)
@click.option("--eps", "epss", default="1.0", show_default=True)
@click.option("--delta", "deltas", default="0.1", show_default=True)
@click.option("--family", type=click.Choice(["gauss", "box"]), default="gauss", show_default=True)
@click.option("--budget", type=int, default=1000, show_default=True, help="Monte Carlo draws per cell.")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Write sweep.csv and sweep.json here.")
@common
def sweep(ps, ds, epss, deltas, family, budget, out, seed, fmt):
    """Sweep the (p, d, eps, delta) grid."""
    spec = SweepSpec(ps=[s.strip() for s in ps.split(",")], ds=[int(x) for x in _floats(ds)],
                     deltas=_floats(deltas), epss=_floats(epss), family=family,
                     budget=budget, seed=seed, out=out)
    res = run_sweep(spec)
    click.echo(res.to_json() if fmt == "json" else res.to_csv(), nl=fmt == "json")
    ok = all(vals["gaussian_worst_tv_ok"] == 1.0 and vals.get("mc_direction_moment_holds", 1.0) == 1.0
             for _, vals in res.cells)
    return EXIT_OK if ok else EXIT_VERDICT


def main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="smoothcert", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        return 1
    except click.ClickException as exc:
        exc.show()
        return EXIT_INVALID
    except (ValueError, TypeError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INVALID
    return EXIT_OK if rv is None else int(rv)


if __name__ == "__main__":
    sys.exit(main())
