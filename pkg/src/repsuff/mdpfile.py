"""Text format for tabular MDPs.

A file is a YAML mapping with exactly these keys::

    states: [s0, s1, s2]            # unique names
    actions: [a0, a1]               # unique names
    gamma: 0.9                      # 0 <= gamma < 1
    rewards: {s0: 0, s1: 0, s2: 1}  # one real per state, no others
    transitions:                    # one record per (state, action)
      - {state: s0, action: a0, next: [[s1, 1.0]]}
      - {state: s0, action: a1, next: [[s1, 0.5], [s2, 0.5]]}
      ...
    policy:                         # optional, default uniform
      s0: {a0: 0.5, a1: 0.5}
    start: {s0: 1.0}                # optional, default uniform

Omitted next states and omitted policy/start entries have probability 0.
Rewards are per state only; ``action_rewards`` and nested reward maps are
rejected. Every diagnostic carries the line and column of the offending node.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
import yaml
from yaml.nodes import MappingNode, Node, ScalarNode, SequenceNode

from .mdp import (ROW_TOL, TabularMDP, uniform_policy, uniform_start, validate_mdp)

REQUIRED = ("states", "actions", "gamma", "rewards", "transitions")
OPTIONAL = ("policy", "start")
STATE_REWARD_ONLY = ("rewards must be a function of the state only; "
                     "state-action rewards r(s,a) are not supported")


class MdpFileError(ValueError):
    def __init__(self, message: str, node: Node | None = None):
        self.line = self.column = None
        if node is not None:
            self.line = node.start_mark.line + 1
            self.column = node.start_mark.column + 1
            message = f"line {self.line}, column {self.column}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class MdpDocument:
    mdp: TabularMDP
    policy: np.ndarray
    start: np.ndarray
    explicit_policy: bool = False
    explicit_start: bool = False


def _mapping(node: Node, what: str) -> list[tuple[str, ScalarNode, Node]]:
    if not isinstance(node, MappingNode):
        raise MdpFileError(f"{what} must be a mapping", node)
    out, seen = [], set()
    for k, v in node.value:
        if not isinstance(k, ScalarNode):
            raise MdpFileError(f"{what} keys must be plain names", k)
        if k.value in seen:
            raise MdpFileError(f"duplicate key {k.value!r} in {what}", k)
        seen.add(k.value)
        out.append((k.value, k, v))
    return out


def _sequence(node: Node, what: str) -> list[Node]:
    if not isinstance(node, SequenceNode):
        raise MdpFileError(f"{what} must be a list", node)
    return node.value


def _number(node: Node, what: str) -> float:
    if isinstance(node, ScalarNode) and node.style is None:
        try:
            value = float(node.value)
        except ValueError:
            pass
        else:
            if np.isfinite(value):
                return value
    raise MdpFileError(f"{what} must be a finite number", node)


def _probability(node: Node, what: str) -> float:
    p = _number(node, what)
    if not 0.0 <= p <= 1.0:
        raise MdpFileError(f"{what} = {p} is not a probability", node)
    return p


def _names(node: Node, what: str) -> tuple[str, ...]:
    items = _sequence(node, what)
    if not items:
        raise MdpFileError(f"{what} must not be empty", node)
    names = []
    for item in items:
        if not isinstance(item, ScalarNode) or not item.value:
            raise MdpFileError(f"{what} entries must be names", item)
        if item.value in names:
            raise MdpFileError(f"duplicate name {item.value!r} in {what}", item)
        names.append(item.value)
    return tuple(names)


def _lookup(index: dict[str, int], node: Node, what: str) -> int:
    if not isinstance(node, ScalarNode) or node.value not in index:
        raise MdpFileError(f"unknown {what} {getattr(node, 'value', node)!r}", node)
    return index[node.value]


def _row_sum(total: float, what: str, node: Node):
    if abs(total - 1.0) > ROW_TOL:
        raise MdpFileError(f"{what} sums to {total:.15g}, not 1", node)


def parse_mdp_file(text: str) -> MdpDocument:
    """Strictly parse an MDP document; see the module docstring for the grammar."""
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}: " if mark else ""
        raise MdpFileError(f"{where}syntax error: {exc.problem or exc}") from None
    if root is None:
        raise MdpFileError("empty MDP file")
    sections = {}
    for key, knode, vnode in _mapping(root, "MDP file"):
        if key == "action_rewards":
            raise MdpFileError(STATE_REWARD_ONLY, knode)
        if key not in REQUIRED + OPTIONAL:
            raise MdpFileError(
                f"unknown key {key!r}; allowed keys are {', '.join(REQUIRED + OPTIONAL)}", knode)
        sections[key] = vnode
    for key in REQUIRED:
        if key not in sections:
            raise MdpFileError(f"missing required key {key!r}", root)

    states = _names(sections["states"], "states")
    actions = _names(sections["actions"], "actions")
    s_index = {s: i for i, s in enumerate(states)}
    a_index = {a: i for i, a in enumerate(actions)}
    n, m = len(states), len(actions)

    gamma_node = sections["gamma"]
    gamma = _number(gamma_node, "gamma")
    if not 0.0 <= gamma < 1.0:
        raise MdpFileError(f"gamma = {gamma} must satisfy 0 <= gamma < 1", gamma_node)

    rewards = np.full(n, np.nan)
    for name, knode, vnode in _mapping(sections["rewards"], "rewards"):
        s = _lookup(s_index, knode, "state")
        if not isinstance(vnode, ScalarNode):
            raise MdpFileError(STATE_REWARD_ONLY, vnode)
        rewards[s] = _number(vnode, f"reward of {name}")
    missing = [states[i] for i in np.flatnonzero(np.isnan(rewards))]
    if missing:
        raise MdpFileError(f"rewards missing for states {missing}", sections["rewards"])

    transitions = np.zeros((n, m, n))
    records: dict[tuple[int, int], Node] = {}
    for rec in _sequence(sections["transitions"], "transitions"):
        fields = {k: (kn, v) for k, kn, v in _mapping(rec, "transition record")}
        for k, (kn, _) in fields.items():
            if k == "reward":
                raise MdpFileError(STATE_REWARD_ONLY, kn)
            if k not in ("state", "action", "next"):
                raise MdpFileError(
                    f"unknown key {k!r} in transition record; allowed: state, action, next", kn)
        for k in ("state", "action", "next"):
            if k not in fields:
                raise MdpFileError(f"transition record lacks {k!r}", rec)
        s = _lookup(s_index, fields["state"][1], "state")
        a = _lookup(a_index, fields["action"][1], "action")
        if (s, a) in records:
            raise MdpFileError(
                f"second transition record for ({states[s]}, {actions[a]})", rec)
        records[(s, a)] = rec
        targets = set()
        for pair in _sequence(fields["next"][1], "next"):
            items = _sequence(pair, "next entry")
            if len(items) != 2:
                raise MdpFileError("next entries must be [state, probability] pairs", pair)
            t = _lookup(s_index, items[0], "next state")
            if t in targets:
                raise MdpFileError(f"next state {states[t]!r} listed twice", items[0])
            targets.add(t)
            transitions[s, a, t] = _probability(items[1], "transition probability")
        _row_sum(transitions[s, a].sum(), f"transition row ({states[s]}, {actions[a]})", rec)
    absent = [(states[s], actions[a]) for s in range(n) for a in range(m) if (s, a) not in records]
    if absent:
        raise MdpFileError(f"no transition record for {absent}", sections["transitions"])

    mdp = TabularMDP(states, actions, transitions, rewards, gamma)
    result = validate_mdp(mdp)
    if not result.ok:
        v = result.violations[0]
        node = records.get(v.index) if v.kind == "row" else sections.get(v.kind)
        raise MdpFileError(v.message, node or root)

    policy = uniform_policy(mdp)
    if "policy" in sections:
        policy = np.zeros((n, m))
        rows = _mapping(sections["policy"], "policy")
        covered = set()
        for name, knode, vnode in rows:
            s = _lookup(s_index, knode, "state")
            covered.add(s)
            for aname, akn, pnode in _mapping(vnode, f"policy of {name}"):
                policy[s, _lookup(a_index, akn, "action")] = _probability(pnode, "policy probability")
            _row_sum(policy[s].sum(), f"policy row of {name}", vnode)
        if len(covered) != n:
            raise MdpFileError(
                f"policy missing states {[states[i] for i in range(n) if i not in covered]}",
                sections["policy"])

    start = uniform_start(mdp)
    if "start" in sections:
        start = np.zeros(n)
        for name, knode, pnode in _mapping(sections["start"], "start"):
            start[_lookup(s_index, knode, "state")] = _probability(pnode, "start probability")
        _row_sum(start.sum(), "start distribution", sections["start"])

    return MdpDocument(mdp, policy, start, "policy" in sections, "start" in sections)


def load_mdp_file(path) -> MdpDocument:
    with open(path, encoding="utf-8") as fh:
        return parse_mdp_file(fh.read())


_PLAIN = re.compile(r"^[A-Za-z_][A-Za-z0-9_.+\-]*$")
_RESERVED = {"true", "false", "yes", "no", "on", "off", "null", "y", "n"}


def _name(s: str) -> str:
    if _PLAIN.match(s) and s.lower() not in _RESERVED:
        return s
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _num(x: float) -> str:
    return repr(float(x))


def export_mdp(mdp: TabularMDP, policy: np.ndarray | None = None,
               start: np.ndarray | None = None, comment: str | None = None) -> str:
    """Serialize ``mdp`` so that :func:`parse_mdp_file` reproduces it exactly."""
    s, a = mdp.state_names, mdp.action_names
    lines = []
    if comment:
        lines += [f"# {line}" for line in comment.splitlines()]
    lines.append("states: [" + ", ".join(_name(x) for x in s) + "]")
    lines.append("actions: [" + ", ".join(_name(x) for x in a) + "]")
    lines.append(f"gamma: {_num(mdp.discount)}")
    lines.append("rewards: {" + ", ".join(
        f"{_name(x)}: {_num(r)}" for x, r in zip(s, mdp.rewards)) + "}")
    lines.append("transitions:")
    for i in range(mdp.n_states):
        for j in range(mdp.n_actions):
            nxt = ", ".join(f"[{_name(s[t])}, {_num(p)}]"
                            for t, p in enumerate(mdp.transitions[i, j]) if p > 0)
            lines.append(f"  - {{state: {_name(s[i])}, action: {_name(a[j])}, next: [{nxt}]}}")
    if policy is not None:
        lines.append("policy:")
        for i in range(mdp.n_states):
            row = ", ".join(f"{_name(a[j])}: {_num(p)}" for j, p in enumerate(policy[i]) if p > 0)
            lines.append(f"  {_name(s[i])}: {{{row}}}")
    if start is not None:
        lines.append("start: {" + ", ".join(
            f"{_name(s[i])}: {_num(p)}" for i, p in enumerate(start) if p > 0) + "}")
    return "\n".join(lines) + "\n"
