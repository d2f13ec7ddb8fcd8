"""Command-line interface.

Exit codes: 0 success or sufficient, 1 usage or parse error, 2 insufficiency
verdict or failed verification, 3 enumeration/brute-force guard refusal.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .mdpfile import MdpDocument, MdpFileError, export_mdp, load_mdp_file
from .mdp import uniform_policy, uniform_start
from .representation import (EnumerationRefused, PartitionError, bell_number, parse_partition)
from .scenarios import SCENARIOS, get_scenario
from .sufficiency import (MAX_TRAJECTORIES, check_return_identity, check_sufficiency,
                          trajectory_count)
from .sweep import OBJECTIVE_COLUMNS, rows_to_csv, sweep
from .verify import verify_forward, verify_inverse, verify_state

EXIT_OK, EXIT_USAGE, EXIT_INSUFFICIENT, EXIT_GUARD = 0, 1, 2, 3


class UsageError(click.UsageError):
    exit_code = EXIT_USAGE


class ExitCodeGroup(click.Group):
    """Routes click's own usage errors (exit 2 by default) to exit 1."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            return super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.ClickException as exc:
            exc.show()
            sys.exit(EXIT_USAGE)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_USAGE)


def _load(mdp_file: str | None, scenario: str | None, gamma: float | None) -> MdpDocument:
    if (mdp_file is None) == (scenario is None):
        raise UsageError("give exactly one of MDP_FILE or --scenario")
    if scenario is not None:
        mdp = get_scenario(scenario).mdp
        doc = MdpDocument(mdp, uniform_policy(mdp), uniform_start(mdp))
    else:
        try:
            doc = load_mdp_file(mdp_file)
        except MdpFileError as exc:
            click.echo(f"error: {mdp_file}: {exc}", err=True)
            sys.exit(EXIT_USAGE)
        except OSError as exc:
            raise UsageError(str(exc))
    if gamma is not None:
        if not 0.0 <= gamma < 1.0:
            raise UsageError(f"--gamma {gamma} must satisfy 0 <= gamma < 1")
        doc = MdpDocument(doc.mdp.with_discount(gamma), doc.policy, doc.start,
                          doc.explicit_policy, doc.explicit_start)
    return doc


def _partition(doc: MdpDocument, literal: str):
    try:
        return parse_partition(literal, doc.mdp.state_names)
    except PartitionError as exc:
        raise UsageError(str(exc))


def _check_policy_support(doc: MdpDocument):
    if doc.policy.min() <= 0:
        raise UsageError("the data-collection policy must give every action nonzero probability")


mdp_source = [
    click.argument("mdp_file", required=False, type=click.Path(dir_okay=False)),
    click.option("--scenario", type=click.Choice(sorted(SCENARIOS)),
                 help="Use a built-in scenario instead of a file."),
]


def with_source(f):
    for deco in reversed(mdp_source):
        f = deco(f)
    return f


@click.group(cls=ExitCodeGroup, context_settings={"help_option_names": ["-h", "--help"]})
def main():
    """Exact sufficiency analysis of mutual-information state representations."""


@main.command("sweep")
@with_source
@click.option("--objective", type=click.Choice(["all", *OBJECTIVE_COLUMNS]), default="all",
              show_default=True, help="Which maximizer-flag columns to emit.")
@click.option("--k", "k", type=click.IntRange(min=1), default=1, show_default=True,
              help="Step offset for J_state and J_inv.")
@click.option("--gamma", type=float, default=None, help="Override the file's discount.")
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default="-",
              show_default=True, help="CSV destination ('-' for stdout).")
def sweep_cmd(mdp_file, scenario, objective, k, gamma, out):
    """Evaluate every block partition and write one CSV row per partition."""
    doc = _load(mdp_file, scenario, gamma)
    _check_policy_support(doc)
    try:
        rows = sweep(doc.mdp, doc.policy, doc.start, k)
    except EnumerationRefused as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_GUARD)
    text = rows_to_csv(rows, objective)
    if out == "-":
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
        click.echo(f"wrote {len(rows)} rows to {out}", err=True)


@main.command("check")
@with_source
@click.option("--partition", "literal", required=True, help="Partition literal, e.g. {s0,s3|s1|s2}.")
@click.option("--tol", type=float, default=1e-9, show_default=True,
              help="Q-value equality and tie tolerance.")
@click.option("--gamma", type=float, default=None, help="Override the file's discount.")
def check_cmd(mdp_file, scenario, literal, tol, gamma):
    """Report pi*- and Q*-sufficiency of a partition; exit 2 if not Q*-sufficient."""
    doc = _load(mdp_file, scenario, gamma)
    p = _partition(doc, literal)
    verdict = check_sufficiency(doc.mdp, p, tol, tol)
    names = doc.mdp.state_names
    click.echo(f"partition {p.literal(names)}")
    click.echo(f"pi*-sufficient: {'yes' if verdict.pi_sufficient else 'no'}")
    click.echo(f"Q*-sufficient:  {'yes' if verdict.q_sufficient else 'no'}")
    for w in verdict.witnesses:
        act = "" if w.action is None else f" action {doc.mdp.action_names[w.action]}"
        click.echo(f"  witness ({names[w.s1]}, {names[w.s2]}){act}: {w.detail}")
    sys.exit(EXIT_OK if verdict.q_sufficient else EXIT_INSUFFICIENT)


@main.command("verify")
@click.option("--prop", type=click.Choice(["1", "2", "3"]), required=True)
@click.option("--seeds", type=click.IntRange(min=1), default=100, show_default=True,
              help="Number of random MDPs (prop 1).")
@click.option("--size", type=click.IntRange(1, 8), default=None,
              help="States per random MDP (prop 1); default cycles 2..6.")
@click.option("--actions", type=click.IntRange(1, 3), default=None,
              help="Actions per random MDP (prop 1); default cycles 2..3.")
@click.option("--seed", type=int, default=0, show_default=True, help="First random seed.")
@click.option("--noise", is_flag=True, help="Append an irrelevant coin to each random MDP (prop 1).")
def verify_cmd(prop, seeds, size, actions, seed, noise):
    """Check one of the three sufficiency propositions."""
    if prop == "1":
        report = verify_forward(seeds, size, actions, seed, noise=noise)
    elif prop == "2":
        report = verify_state()
    else:
        report = verify_inverse()
    click.echo(report.summary())
    sys.exit(EXIT_OK if report.passed else EXIT_INSUFFICIENT)


@main.command("identity")
@with_source
@click.option("--partition", "literal", required=True, help="Partition literal.")
@click.option("--horizon", type=click.IntRange(min=1), default=4, show_default=True)
@click.option("--tol", type=float, default=1e-9, show_default=True,
              help="Total-variation pass threshold.")
def identity_cmd(mdp_file, scenario, literal, horizon, tol):
    """Check that the partition preserves the law of the discounted return."""
    doc = _load(mdp_file, scenario, None)
    _check_policy_support(doc)
    p = _partition(doc, literal)
    count = trajectory_count(doc.mdp, horizon)
    if count > MAX_TRAJECTORIES:
        click.echo(f"error: horizon {horizon} needs {count} trajectories per (state, action); "
                   f"limit is {MAX_TRAJECTORIES}", err=True)
        sys.exit(EXIT_GUARD)
    result = check_return_identity(doc.mdp, p, doc.policy, horizon, tol)
    mdp = doc.mdp
    for s in range(mdp.n_states):
        for a in range(mdp.n_actions):
            click.echo(f"{mdp.state_names[s]} {mdp.action_names[a]} "
                       f"tv={result.deviations[s, a]:.3e}")
    word = "PASS" if result.passed else "FAIL"
    click.echo(f"{word}: max total variation {result.max_deviation:.3e} at horizon {horizon} "
               f"(threshold {tol:g})")
    sys.exit(EXIT_OK if result.passed else EXIT_INSUFFICIENT)


@main.command("export")
@click.option("--scenario", type=click.Choice(sorted(SCENARIOS)), required=True)
@click.option("--gamma", type=float, default=0.9, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default="-",
              show_default=True)
def export_cmd(scenario, gamma, out):
    """Write a built-in scenario in the MDP file format."""
    sc = get_scenario(scenario, gamma)
    text = export_mdp(sc.mdp, comment=f"scenario {sc.name}: {sc.description}\n"
                      f"designated partition {sc.designated.literal(sc.mdp.state_names)}")
    if out == "-":
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


@main.command("bell")
@click.argument("n", type=click.IntRange(min=0))
def bell_cmd(n):
    """Print the number of block partitions of N states."""
    click.echo(bell_number(n))


if __name__ == "__main__":
    main()
