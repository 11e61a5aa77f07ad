"""Command-line surface.

Subcommands: pmf-s, pmf-k, gap, first-success, estimate-seq, estimate-first,
moments, poisson-bounds, disaster, species, simulate.

Conventions: long flags only; every stochastic subcommand requires --seed
(no implicit entropy); CSV numbers carry 17 significant digits; pmf outputs
either sum to 1 +/- 1e-9 or end with an explicit `# deficit=` line.

Exit codes: 0 success; 2 invalid parameters; 3 solver nonconvergence;
4 infeasible/boundary estimate (the result is still printed, flagged).
"""

from __future__ import annotations

import argparse
import json
import math
import sys


from . import (
    disaster_chain,
    estimation,
    first_success,
    passage_times,
    simulate,
    species_sampling,
    success_counts,
)
from .errors import HarmonicTrialsError, NonconvergenceError
from .simulate import RngSpec
from .success_counts import AlphaModel, Weights

__all__ = ["main", "run"]


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write(args, text: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _pmf_lines(pmf, label: str = "index") -> str:
    lines = [f"{k},{_fmt(p)}" for k, p in zip(pmf.support, pmf.probs)]
    total = pmf.total
    if abs(total - 1.0) > 1e-9:
        lines.append(f"# deficit={_fmt(max(pmf.deficit, 1.0 - total))}")
    return "\n".join(lines) + "\n"


def _pmf_json(pmf) -> str:
    payload = {
        "offset": int(pmf.offset),
        "probs": [float(p) for p in pmf.probs],
        "deficit": float(pmf.deficit),
    }
    return json.dumps(payload, indent=2) + "\n"


def _emit_pmf(args, pmf) -> None:
    if args.format == "json":
        _write(args, _pmf_json(pmf))
    else:
        _write(args, _pmf_lines(pmf))


def _weights(args) -> Weights:
    return Weights(args.w1, args.w2)


def _json_safe(x):
    """Non-finite floats become strings so the output stays strict JSON."""
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)  # 'inf', '-inf', 'nan'
    return x


def _report_json(report: estimation.EstimateReport) -> str:
    payload = {
        "w1_hat": _json_safe(report.w1_hat),
        "w2_hat": _json_safe(report.w2_hat),
        "w_hat": _json_safe(report.w_hat),
        "constraint": report.constraint,
        "loglik": _json_safe(report.loglik),
        "iterations": report.iterations,
        "converged": report.converged,
        "boundary": report.boundary,
        "covariance": None
        if report.covariance is None
        else [[_json_safe(float(v)) for v in row] for row in report.covariance],
        "stderr": None
        if report.stderr() is None
        else [_json_safe(float(v)) for v in report.stderr()],
    }
    return json.dumps(payload, indent=2) + "\n"


def _read_tokens(path: str) -> list[str]:
    fh = sys.stdin if path == "-" else open(path, "r", encoding="utf-8")
    try:
        tokens = []
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tokens.extend(line.split())
        return tokens
    finally:
        if fh is not sys.stdin:
            fh.close()


def _cmd_pmf_s(args) -> int:
    model = AlphaModel(_weights(args), args.alpha)
    if args.method == "recursion":
        pmf = success_counts.pmf_successes(model, args.n)
    elif args.method == "stirling":
        pmf = success_counts.pmf_successes_closed_form(model.weights, args.n)
    else:
        pmf = success_counts.pmf_successes_dobinski(model, args.n)
    _emit_pmf(args, pmf)
    return 0


def _cmd_pmf_k(args) -> int:
    table = passage_times.passage_table(_weights(args), args.l, args.n_max)
    _emit_pmf(args, table.column(args.l))
    return 0


def _cmd_gap(args) -> int:
    law = passage_times.gap_pmf(_weights(args), args.l, args.i_max, args.horizon)
    _emit_pmf(args, law.probs)
    return 0


def _cmd_first_success(args) -> int:
    law = first_success.first_success_law(_weights(args), args.k_max)
    _emit_pmf(args, law.probs)
    return 0


def _cmd_estimate_seq(args) -> int:
    tokens = _read_tokens(args.input)
    try:
        bits = [int(t) for t in tokens]
    except ValueError:
        print("estimate-seq: input must contain 0/1 tokens", file=sys.stderr)
        return 2
    seq = estimation.TrialSequence.from_iterable(bits)
    report = estimation.mle_sequence(seq, args.constraint)
    _write(args, _report_json(report))
    return 4 if report.boundary is not None else 0


def _cmd_estimate_first(args) -> int:
    tokens = _read_tokens(args.input)
    try:
        times = [int(t) for t in tokens]
    except ValueError:
        print("estimate-first: input must contain positive integers", file=sys.stderr)
        return 2
    report = estimation.mle_first_success(times)
    _write(args, _report_json(report))
    return 4 if report.boundary is not None else 0


def _cmd_moments(args) -> int:
    weights = _weights(args)
    mu, sigma2 = success_counts.mean_variance(weights, args.n)
    lines = [
        f"{l},{_fmt(success_counts.factorial_moments(weights, args.n, l))}"
        for l in range(args.l_max + 1)
    ]
    lines.append(f"# mean={_fmt(mu)}")
    lines.append(f"# variance={_fmt(sigma2)}")
    _write(args, "\n".join(lines) + "\n")
    return 0


def _cmd_poisson_bounds(args) -> int:
    rep = success_counts.poisson_bounds(_weights(args), args.n)
    payload = {
        "mu_n": rep.mu_n,
        "sigma2_n": rep.sigma2_n,
        "tv_exact": rep.tv_exact,
        "tv_lower": rep.tv_lower,
        "tv_upper": rep.tv_upper,
    }
    _write(args, json.dumps(payload, indent=2) + "\n")
    return 0


def _cmd_disaster(args) -> int:
    spec = disaster_chain.ChainSpec(_weights(args), args.alpha)
    if args.task == "classify":
        _write(args, json.dumps({"classification": disaster_chain.classify(spec).value}) + "\n")
        return 0
    if args.task == "invariant":
        _emit_pmf(args, disaster_chain.invariant_measure(spec, args.n_max))
        return 0
    if args.task == "tail":
        lines = [
            f"{l},{_fmt(disaster_chain.overcrossing_tail(spec, args.n0, args.level, l))}"
            for l in range(args.l_max + 1)
        ]
        _write(args, "\n".join(lines) + "\n")
        return 0
    value = disaster_chain.expected_overcrossing(spec, args.n0, args.level)
    _write(args, json.dumps({"expected_overcrossing": value}) + "\n")
    return 0


def _cmd_species(args) -> int:
    model = AlphaModel(_weights(args), args.alpha)
    if args.parts is not None:
        parts = tuple(int(p) for p in args.parts.split(",") if p)
        cfg = species_sampling.SampleConfiguration(args.n0, parts)
        value = species_sampling.dtg_joint(model, cfg)
        _write(args, json.dumps({"n0": args.n0, "parts": list(parts), "probability": value}) + "\n")
        return 0
    if args.reservoir_table is None:
        print("species: give either --parts or --reservoir-table", file=sys.stderr)
        return 2
    n = args.reservoir_table
    lines = [
        f"{n0},{_fmt(species_sampling.reservoir_marginal(model.weights, n, n0))}"
        for n0 in range(n + 1)
    ]
    _write(args, "\n".join(lines) + "\n")
    return 0


def _cmd_simulate(args) -> int:
    rng = RngSpec(args.seed, args.stream)
    weights = _weights(args)
    if args.what == "trials":
        model = AlphaModel(weights, args.alpha)
        seq = simulate.sample_trials(model, args.n, rng)
        _write(args, "\n".join(str(int(b)) for b in seq.bits) + "\n")
        return 0
    if args.what == "first-success":
        batch = simulate.sample_first_success_batch(weights, args.reps, rng, args.cap)
        lines = [str(int(v)) for v in batch.values[~batch.censored]]
        n_cens = int(batch.censored.sum())
        if n_cens:
            lines.append(f"# censored={n_cens} cap={batch.cap} survival_at_cap={_fmt(batch.survival_at_cap)}")
        _write(args, "\n".join(lines) + "\n")
        return 0
    if args.what == "power":
        seq = simulate.sample_power_model(weights, args.exponent, args.n, rng)
        _write(args, "\n".join(str(int(b)) for b in seq.bits) + "\n")
        return 0
    if args.what == "disaster":
        spec = disaster_chain.ChainSpec(weights, args.alpha)
        path = simulate.sample_disaster(spec, args.steps, args.n_start, rng)
        _write(args, "\n".join(str(int(s)) for s in path.states) + "\n")
        return 0
    # species
    model = AlphaModel(weights, args.alpha)
    n0, counts, k = simulate.sample_species_batch(model, args.n, args.reps, rng)
    lines = []
    for r in range(args.reps):
        parts = "|".join(str(int(c)) for c in counts[r, : k[r]])
        lines.append(f"{int(n0[r])},{parts}")
    _write(args, "\n".join(lines) + "\n")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="htrials",
        description="Bernoulli trials with harmonic success probabilities: laws, estimation, simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_weights(p):
        p.add_argument("--w1", type=float, required=True)
        p.add_argument("--w2", type=float, required=True)

    def add_out(p):
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("pmf-s", help="law of the success count S_n")
    add_weights(p)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--method", choices=("recursion", "stirling", "dobinski"), default="recursion")
    add_out(p)
    p.set_defaults(func=_cmd_pmf_s)

    p = sub.add_parser("pmf-k", help="law of the l-th success time K_l+")
    add_weights(p)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    add_out(p)
    p.set_defaults(func=_cmd_pmf_k)

    p = sub.add_parser("gap", help="law of the gap between successes l-1 and l")
    add_weights(p)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--i-max", type=int, required=True)
    p.add_argument("--horizon", type=int, default=2000)
    add_out(p)
    p.set_defaults(func=_cmd_gap)

    p = sub.add_parser("first-success", help="law of K_1 (failures before the first success)")
    add_weights(p)
    p.add_argument("--k-max", type=int, required=True)
    add_out(p)
    p.set_defaults(func=_cmd_first_success)

    p = sub.add_parser("estimate-seq", help="MLE from a 0/1 trial sequence")
    p.add_argument("--input", default="-", help="bits file (whitespace separated); - for stdin")
    p.add_argument("--constraint", default="free", help="free, w=1, or w2=<value>")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_estimate_seq)

    p = sub.add_parser("estimate-first", help="MLE from first-success times")
    p.add_argument("--input", default="-", help="times file (one positive integer per line)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_estimate_first)

    p = sub.add_parser("moments", help="factorial moments of S_n")
    add_weights(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--l-max", type=int, default=4)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_moments)

    p = sub.add_parser("poisson-bounds", help="total-variation distance to Poisson(mu_n)")
    add_weights(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_poisson_bounds)

    p = sub.add_parser("disaster", help="growth-collapse chain analysis")
    add_weights(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--task", choices=("classify", "invariant", "tail", "expected-overcrossing"), required=True)
    p.add_argument("--n-max", type=int, default=50)
    p.add_argument("--n0", type=int, default=0)
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--l-max", type=int, default=20)
    add_out(p)
    p.set_defaults(func=_cmd_disaster)

    p = sub.add_parser("species", help="species-sampling joint and marginal laws")
    add_weights(p)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--parts", default=None, help="comma-separated counts in order of appearance")
    p.add_argument("--n0", type=int, default=0)
    p.add_argument("--reservoir-table", type=int, default=None, metavar="N")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_species)

    p = sub.add_parser("simulate", help="seeded Monte Carlo dumps")
    p.add_argument("what", choices=("trials", "first-success", "power", "disaster", "species"))
    add_weights(p)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--exponent", type=float, default=1.0, help="power-model exponent")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--n-start", type=int, default=0)
    p.add_argument("--cap", type=int, default=10**9)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_simulate)

    return parser


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except NonconvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except HarmonicTrialsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
