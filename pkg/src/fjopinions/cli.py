"""Command-line interface.

One subcommand per pipeline stage: equilibria, strategic solves, metrics,
detection, recovery, parameter sweeps, batch experiments, blockmodel
generation, and recoverability certificates. Everything prints CSV (to
stdout or ``--out``).

Exit codes: 0 success, 2 input error (bad files/flags), 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import experiments, fileio
from .detection import detect_manipulation
from .engine import fj_equilibrium, metrics, response_matrix
from .errors import InputError, NumericalError
from .graph import generate_blockmodel
from .nash import build_system, solve_nash, truthful_outcome
from .recovery import (
    blockmodel_constants,
    recover_deviators,
    ssc_sss_bruteforce,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip() != ""]
    except ValueError as exc:
        raise InputError(f"bad float list {text!r}: {exc}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip() != ""]
    except ValueError as exc:
        raise InputError(f"bad int list {text!r}: {exc}") from exc


def _emit(args, header, rows, comments=()):
    text = fileio.write_csv(None, header, rows, comments)
    if getattr(args, "out", None):
        from pathlib import Path
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_graph_alpha(args):
    g = fileio.load_graph(args.graph)
    profile = fileio.parse_alpha(args.alpha, g.n)
    return g, profile


def _strategic_set(args, g):
    if getattr(args, "set", None):
        return fileio.load_strategic_set(args.set, g.n)
    if getattr(args, "top_frac", None) is not None:
        return experiments.select_top_centrality(g, args.top_frac)
    raise InputError("provide --set FILE or --top-frac P")


# --- subcommands ---------------------------------------------------------

def cmd_equilibrium(args):
    g, profile = _load_graph_alpha(args)
    s = fileio.load_vector(args.opinions, g.n)
    z = fj_equilibrium(g, profile, s)
    _emit(args, ["node", "z"], list(enumerate(z.values)))


def cmd_strategic(args):
    g, profile = _load_graph_alpha(args)
    s = fileio.load_vector(args.opinions, g.n)
    S = _strategic_set(args, g)
    rm = response_matrix(g, profile)
    if len(S) == 0:
        outcome = truthful_outcome(g, profile, s, response=rm)
    else:
        system = build_system(g, profile, s, S, response=rm)
        outcome = solve_nash(system, g, profile, s, S, response=rm)
    rows = [(i, i in S, outcome.s_prime.values[i], outcome.z_prime.values[i])
            for i in range(g.n)]
    comments = [
        f"residual={fileio.format_cell(outcome.residual)}",
        f"max_gradient={fileio.format_cell(outcome.max_gradient)}",
        f"uniqueness={outcome.uniqueness.value}",
    ]
    _emit(args, ["node", "strategic", "s_prime", "z_prime"], rows, comments)


def cmd_metrics(args):
    g, profile = _load_graph_alpha(args)
    s = fileio.load_vector(args.opinions, g.n)
    z = fj_equilibrium(g, profile, s)
    rep = metrics(z, s, g, profile)
    _emit(args, ["polarization", "disagreement", "total_cost", "mean_opinion"],
          [(rep.polarization, rep.disagreement, rep.total_cost, rep.mean_opinion)])


def cmd_detect(args):
    g, profile = _load_graph_alpha(args)
    z_prime = fileio.load_vector(args.zprime, g.n)
    outcome = detect_manipulation(g, profile, z_prime, mu0=args.mu0,
                                  significance=args.significance)
    if args.csv:
        _emit(args, ["verdict", "t", "p_value", "dof", "significance"],
              [(outcome.verdict.value, outcome.t_statistic, outcome.p_value,
                outcome.dof, outcome.significance)])
    else:
        out = (f"verdict: {outcome.verdict.value}\n"
               f"t: {fileio.format_cell(outcome.t_statistic)}\n"
               f"p: {fileio.format_cell(outcome.p_value)}\n"
               f"dof: {outcome.dof}\n")
        if args.out:
            from pathlib import Path
            Path(args.out).write_text(out)
        else:
            sys.stdout.write(out)


def cmd_recover(args):
    g, profile = _load_graph_alpha(args)
    z_prime = fileio.load_vector(args.zprime, g.n)
    emb = fileio.load_embeddings(args.embeddings)
    variant = {"fc": "fc", "gd": "gd"}[args.variant]
    result = recover_deviators(emb, g, profile, z_prime, args.k, variant=variant)
    rows = [(i, result.diffs[i], i in result.S_hat) for i in range(g.n)]
    comments = [f"iterations={result.iterations}"]
    if args.opinions:
        s_true = fileio.load_vector(args.opinions, g.n)
        err, excluded = experiments.recovery_error(result.s_hat.values, s_true)
        comments.append(f"recovery_error={fileio.format_cell(err)}")
        comments.append(f"excluded_near_zero={excluded}")
    _emit(args, ["node", "diff", "in_S_hat"], rows, comments)


def _scenario_from_args(args, g, profile, opinions, strategic):
    return experiments.Scenario(graph=g, alpha=profile, opinions=opinions,
                                strategic=strategic, seed=args.seed)


def cmd_sweep_alpha(args):
    g = fileio.load_graph(args.graph)
    s = fileio.load_vector(args.opinions, g.n)
    profile = fileio.parse_alpha(args.alpha or "0.5", g.n)
    scenario = _scenario_from_args(
        args, g, profile, experiments.FixedOpinions(tuple(s)),
        experiments.FixedSet(tuple(fileio.load_strategic_set(args.set, g.n).members))
        if args.set else experiments.TopCentralityFraction(args.top_frac))
    rows = experiments.sweep_alpha(scenario, _floats(args.alphas))
    header, out = experiments.sweep_rows_to_csv(rows, "alpha")
    _emit(args, header, out)


def cmd_sweep_frac(args):
    g, profile = _load_graph_alpha(args)
    s = fileio.load_vector(args.opinions, g.n)
    scenario = _scenario_from_args(
        args, g, profile, experiments.FixedOpinions(tuple(s)),
        experiments.TopCentralityFraction(1.0))
    rows = experiments.sweep_strategic_fraction(scenario, _floats(args.fractions))
    header, out = experiments.sweep_rows_to_csv(rows, "frac")
    _emit(args, header, out)


def cmd_detect_exp(args):
    g, profile = _load_graph_alpha(args)
    strategic = (experiments.RandomFraction(args.strategic_frac)
                 if args.strategic_frac > 0 else experiments.EmptySet())
    scenario = _scenario_from_args(
        args, g, profile, experiments.GaussianOpinions(args.mu0, args.sigma), strategic)
    rows, summary = experiments.detection_experiment(
        scenario, args.trials, args.shift, args.significance)
    comments = [f"type_i_rate={fileio.format_cell(summary['type_i_rate'])}",
                f"type_ii_rate={fileio.format_cell(summary['type_ii_rate'])}"]
    _emit(args, ["trial", "set_size", "p_value", "verdict"], rows, comments)


def cmd_recover_exp(args):
    g, profile = _load_graph_alpha(args)
    emb = fileio.load_embeddings(args.embeddings)
    v = np.array(_floats(args.v))
    if len(v) != emb.d:
        raise InputError(f"--v has {len(v)} entries, embeddings have {emb.d} columns")
    scenario = _scenario_from_args(
        args, g, profile, experiments.EmbeddingOpinions(emb.X, v),
        experiments.EmptySet())
    rows = experiments.recovery_experiment(scenario, _floats(args.fractions), args.trials)
    _emit(args, ["frac", "trial", "recovery_error", "balanced_accuracy"], rows)


def cmd_gen_blockmodel(args):
    sizes = _ints(args.sizes)
    g, emb = generate_blockmodel(sizes, args.p_in, args.p_out, args.seed)
    fileio.save_graph(g, args.out)
    if args.embedding_out:
        fileio.save_embeddings(emb.X, args.embedding_out)
    sys.stdout.write(f"wrote {g.n} nodes, {g.m} edges to {args.out}\n")


def cmd_ssc_cert(args):
    if (args.embeddings is None) == (args.sizes is None):
        raise InputError("provide exactly one of --embeddings or --sizes")
    if args.embeddings:
        cert = ssc_sss_bruteforce(fileio.load_embeddings(args.embeddings), args.gamma)
    else:
        cert = blockmodel_constants(_ints(args.sizes), args.gamma)
    _emit(args, ["gamma", "xi", "Xi", "condition_value", "certified", "method"],
          [(cert.gamma, cert.xi, cert.Xi, cert.condition_value, cert.certified,
            cert.method.value)])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fjopinions",
        description="Opinion equilibria under strategic misreporting: solve, "
                    "measure, detect, recover.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        return p

    def common_io(p, opinions=False, zprime=False, strategic=False):
        p.add_argument("--graph", required=True, help="edge-list file")
        p.add_argument("--alpha", required=True,
                       help="susceptibility: scalar or file")
        if opinions:
            p.add_argument("--opinions", required=True, help="intrinsic opinions file")
        if zprime:
            p.add_argument("--zprime", required=True, help="observed equilibrium file")
        if strategic:
            p.add_argument("--set", help="strategic-set file (one node per line)")
            p.add_argument("--top-frac", type=float, dest="top_frac",
                           help="strategic set = top centrality fraction")
        p.add_argument("--out", help="output file (default: stdout)")

    p = add("equilibrium", cmd_equilibrium, help="truthful expressed equilibrium z = Bs")
    common_io(p, opinions=True)

    p = add("strategic", cmd_strategic, help="solve the misreporting game")
    common_io(p, opinions=True, strategic=True)

    p = add("metrics", cmd_metrics, help="polarization/disagreement/cost at z = Bs")
    common_io(p, opinions=True)

    p = add("detect", cmd_detect, help="manipulation hypothesis test")
    common_io(p, zprime=True)
    p.add_argument("--mu0", type=float, required=True, help="null population mean")
    p.add_argument("--significance", type=float, default=0.05)
    p.add_argument("--csv", action="store_true", help="machine-readable output")

    p = add("recover", cmd_recover, help="robust-regression deviator recovery")
    common_io(p, zprime=True)
    p.add_argument("--embeddings", required=True, help="node feature CSV")
    p.add_argument("--k", type=int, required=True, help="deviator count |S|")
    p.add_argument("--variant", choices=["fc", "gd"], default="fc")
    p.add_argument("--opinions", help="true opinions (adds recovery error summary)")

    p = add("sweep-alpha", cmd_sweep_alpha, help="ratio sweep over shared alpha")
    p.add_argument("--graph", required=True)
    p.add_argument("--alpha", help="unused baseline profile (sweep overrides)")
    p.add_argument("--opinions", required=True)
    p.add_argument("--set")
    p.add_argument("--top-frac", type=float, dest="top_frac", default=0.5)
    p.add_argument("--alphas", required=True, help="comma list, e.g. 0.1,0.3,0.5")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = add("sweep-frac", cmd_sweep_frac, help="ratio sweep over |S| fraction")
    common_io(p, opinions=True)
    p.add_argument("--fractions", required=True, help="comma list, e.g. 0.01,0.05,0.1")
    p.add_argument("--seed", type=int, default=0)

    p = add("detect-exp", cmd_detect_exp, help="detection calibration/power trials")
    common_io(p)
    p.add_argument("--mu0", type=float, required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--strategic-frac", type=float, dest="strategic_frac", default=0.0)
    p.add_argument("--shift", type=float, default=0.0,
                   help="report shift in sigma units for strategic nodes")
    p.add_argument("--significance", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)

    p = add("recover-exp", cmd_recover_exp, help="recovery accuracy trials")
    common_io(p)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--v", required=True, help="feature weights, e.g. 1,-1")
    p.add_argument("--fractions", required=True)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)

    p = add("gen-blockmodel", cmd_gen_blockmodel, help="planted-partition generator")
    p.add_argument("--sizes", required=True, help="community sizes, e.g. 50,50")
    p.add_argument("--p-in", type=float, dest="p_in", required=True)
    p.add_argument("--p-out", type=float, dest="p_out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="edge-list output file")
    p.add_argument("--embedding-out", dest="embedding_out",
                   help="also write one-hot community features")

    p = add("ssc-cert", cmd_ssc_cert, help="recoverability certificate")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--embeddings", help="feature CSV (exact, n <= 20)")
    p.add_argument("--sizes", help="one-hot community sizes (closed form)")
    p.add_argument("--out")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.fn(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
