"""
Model files: the native JSON format and explicit transition/label files

Native files carry the schema tag ``rmdpq-1``; every rational is written as a
``"p/q"`` string and keys are sorted, so saving the same model twice gives
identical bytes.
"""

import json
import math
import re
from collections import defaultdict
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from .arith import EXACT, FeasibilityBackend, format_rational, parse_rational
from .logger import SolverLogger
from .rmdp import ModelError, Pair, Rmdp, StateId, validate
from .uncertainty import (FiniteMenu, LBall, Polytope, PolytopeRow, Relation, TransitionTemplate,
                          UncertaintyEntry)

log = SolverLogger(__name__)

SCHEMA = "rmdpq-1"
PRIORITY_LABEL = re.compile(r'^priority=(\d+)$')
LABEL_DECLARATION = re.compile(r'(\d+)="([^"]*)"')


class SchemaError(ValueError):
    """Native model file does not follow the schema"""


class IngestError(ValueError):
    """Malformed explicit model file"""

    def __init__(self, message: str, path: Optional[Path] = None, line: Optional[int] = None):
        where = f"{path}:{line}: " if path is not None and line is not None else ""
        super().__init__(f"{where}{message}")
        self.path = path
        self.line = line


# Native JSON format

def _family_to_dict(family) -> Dict[str, Any]:
    if isinstance(family, LBall):
        norm = "inf" if family.is_max_norm else family.exponent
        return {"type": LBall.tag, "norm": norm, "radius": format_rational(family.radius)}
    if isinstance(family, Polytope):
        return {"type": Polytope.tag, "rows": [
            {
                "coefficients": [format_rational(a) for a in row.coefficients],
                "relation": row.relation.value,
                "rhs": format_rational(row.rhs),
            }
            for row in family.rows
        ]}
    return {"type": FiniteMenu.tag,
            "members": [[format_rational(p) for p in member] for member in family.members]}


def model_to_dict(model: Rmdp) -> Dict[str, Any]:
    """Serializable form of ``model`` (only live states carry transitions)"""
    name = model.state_names.__getitem__
    transitions = []
    for s, a in model.pairs():
        entry = model.entry(s, a)
        transitions.append({
            "state": name(s),
            "action": model.action_names[a],
            "successors": [name(t) for t in entry.successors],
            "center": [format_rational(p) for p in entry.center],
            "family": _family_to_dict(entry.family),
            "support_restricted": entry.support_restricted,
            "face": model.names(model.face(s, a)),
        })
    document: Dict[str, Any] = {
        "schema": SCHEMA,
        "states": list(model.state_names),
        "actions": list(model.action_names),
        "live": model.names(model.live),
        "transitions": transitions,
        "labels": {label: model.names(states) for label, states in sorted(model.labels.items())},
    }
    if model.priorities is not None:
        document["priorities"] = {name(s): p for s, p in sorted(model.priorities.values.items())}
    return document


def save_model(model: Rmdp, path: Union[str, Path]):
    """Write ``model`` as deterministic JSON"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as f:
        f.write(dump_model(model))


def dump_model(model: Rmdp) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True, indent=2) + "\n"


def _require(obj: Dict[str, Any], key: str, where: str) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"{where}: missing '{key}'")
    return obj[key]


def _rational(value: Any, where: str) -> Fraction:
    try:
        return parse_rational(value)
    except (ValueError, TypeError, AttributeError):
        raise SchemaError(f"{where}: not a rational: {value!r}")


def _family_from_dict(data: Dict[str, Any], where: str):
    tag = _require(data, "type", where)
    if tag == LBall.tag:
        norm = _require(data, "norm", where)
        exponent = math.inf if norm in ("inf", "Infinity") else norm
        if exponent is not math.inf and not isinstance(exponent, int):
            raise SchemaError(f"{where}: invalid norm {norm!r}")
        return LBall(exponent, _rational(_require(data, "radius", where), where))
    if tag == Polytope.tag:
        rows = []
        for i, row in enumerate(_require(data, "rows", where)):
            at = f"{where}, row {i}"
            try:
                relation = Relation(_require(row, "relation", at))
            except ValueError:
                raise SchemaError(f"{at}: unknown relation {row['relation']!r}")
            rows.append(PolytopeRow(
                tuple(_rational(a, at) for a in _require(row, "coefficients", at)),
                relation,
                _rational(_require(row, "rhs", at), at),
            ))
        return Polytope(tuple(rows))
    if tag == FiniteMenu.tag:
        return FiniteMenu(tuple(
            tuple(_rational(p, where) for p in member) for member in _require(data, "members", where)
        ))
    raise SchemaError(f"{where}: unknown family tag {tag!r}")


def model_from_dict(document: Dict[str, Any]) -> Rmdp:
    """
    Rebuild a model from its serialized form

    Raises:
        SchemaError: on a schema mismatch, a missing field or an unknown name
        ModelError: if the rebuilt model breaks a type invariant
    """
    schema = _require(document, "schema", "model")
    if schema != SCHEMA:
        raise SchemaError(f"Unsupported schema {schema!r}, expected {SCHEMA!r}")
    states = list(_require(document, "states", "model"))
    actions = list(_require(document, "actions", "model"))
    state_index = {name: i for i, name in enumerate(states)}
    action_index = {name: i for i, name in enumerate(actions)}

    def state(name: str, where: str) -> StateId:
        if name not in state_index:
            raise SchemaError(f"{where}: unknown state {name!r}")
        return state_index[name]

    entries: Dict[Pair, UncertaintyEntry] = {}
    faces = {}
    for i, item in enumerate(_require(document, "transitions", "model")):
        where = f"transition {i}"
        s = state(_require(item, "state", where), where)
        action = _require(item, "action", where)
        if action not in action_index:
            raise SchemaError(f"{where}: unknown action {action!r}")
        pair = (s, action_index[action])
        where = f"transition {states[s]}/{action}"
        if pair in entries:
            raise SchemaError(f"{where}: duplicate transition")
        template = TransitionTemplate(
            tuple(state(t, where) for t in _require(item, "successors", where)),
            tuple(_rational(p, where) for p in _require(item, "center", where)),
        )
        family = _family_from_dict(_require(item, "family", where), where)
        entries[pair] = UncertaintyEntry(template, family, bool(item.get("support_restricted", False)))
        if "face" in item:
            faces[pair] = frozenset(state(t, where) for t in item["face"])

    labels = {label: [state(n, f"label {label}") for n in members]
              for label, members in document.get("labels", {}).items()}
    priorities = None
    if "priorities" in document:
        priorities = {state(n, "priorities"): int(p) for n, p in document["priorities"].items()}

    model = Rmdp.build(states, actions, entries, labels=labels, priorities=priorities)
    live = frozenset(state(n, "live") for n in document.get("live", states))
    menus = {s: model.menu(s) for s in live}
    all_faces = dict(model.faces)
    all_faces.update(faces)
    model = Rmdp(
        state_names=model.state_names,
        action_names=model.action_names,
        live=live,
        menus=menus,
        entries=model.entries,
        faces=all_faces,
        labels=model.labels,
        priorities=model.priorities,
    )
    violations = validate(model)
    if violations:
        raise ModelError(f"Invalid model: {'; '.join(violations)}")
    return model


def load_model(path: Union[str, Path]) -> Rmdp:
    """
    Read a native model file

    Raises:
        SchemaError: on malformed JSON or a schema mismatch
        ModelError: if the model breaks a type invariant
    """
    path = Path(path)
    try:
        with open(path, 'r') as f:
            document = json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: invalid JSON ({e})")
    model = model_from_dict(document)
    log.model_loaded(str(path), len(model.live), model.n_pairs)
    return model


# Explicit transition and label files

def family_from_name(name: str, radius: Fraction) -> LBall:
    """``l1``, ``l2``, ``l<d>`` or ``linf`` ball of the given radius"""
    key = name.lower()
    if key == "linf":
        return LBall(math.inf, radius)
    match = re.fullmatch(r'l(\d+)', key)
    if not match or int(match.group(1)) < 1:
        raise ValueError(f"Unknown uncertainty family '{name}', expected l1, l2, l<d> or linf")
    return LBall(int(match.group(1)), radius)


def _read_lines(path: Path):
    with open(path, 'r') as f:
        for number, raw in enumerate(f, start=1):
            line = raw.split('#', 1)[0].strip()
            if line:
                yield number, line


def _parse_tra(path: Path, backend: FeasibilityBackend):
    transitions: Dict[Tuple[int, str], Dict[int, Fraction]] = defaultdict(dict)
    first_line: Dict[Tuple[int, str], int] = {}
    states = set()
    for number, line in _read_lines(path):
        tokens = line.split()
        if len(tokens) == 3 and not transitions and all(t.isdigit() for t in tokens):
            continue  # "states choices transitions" header
        if len(tokens) not in (4, 5):
            raise IngestError(f"expected 'src action dst prob', got {line!r}", path, number)
        src, action, dst, prob = tokens[:4]
        if len(tokens) == 5:
            action = tokens[4]
        try:
            src_id, dst_id = int(src), int(dst)
            mass = parse_rational(prob)
        except ValueError:
            raise IngestError(f"malformed state id or probability in {line!r}", path, number)
        if src_id < 0 or dst_id < 0 or mass < 0:
            raise IngestError(f"negative value in {line!r}", path, number)
        key = (src_id, action)
        if dst_id in transitions[key]:
            raise IngestError(f"duplicate transition {src} {action} {dst}", path, number)
        transitions[key][dst_id] = mass
        first_line.setdefault(key, number)
        states.update((src_id, dst_id))

    for (src_id, action), row in transitions.items():
        total = sum(row.values())
        if not backend.is_zero(backend.num(total) - 1):
            raise IngestError(
                f"probabilities of state {src_id}, action {action} sum to {total}, not 1",
                path, first_line[(src_id, action)],
            )
        if total != 1:
            for dst_id in row:
                row[dst_id] = row[dst_id] / total
    return transitions, states


def _parse_lab(path: Path, n_states: int) -> Tuple[Dict[str, List[int]], Dict[int, int]]:
    declared: Dict[int, str] = {}
    labels: Dict[str, List[int]] = defaultdict(list)
    priorities: Dict[int, int] = {}
    for number, line in _read_lines(path):
        declarations = LABEL_DECLARATION.findall(line)
        if declarations and ':' not in line:
            declared.update((int(i), name) for i, name in declarations)
            continue
        head, sep, tail = line.partition(':')
        if not sep or not head.strip().isdigit():
            raise IngestError(f"expected 'state: label ...', got {line!r}", path, number)
        state = int(head)
        if state >= n_states:
            raise IngestError(f"unknown state {state}", path, number)
        for token in tail.split():
            name = declared.get(int(token), token) if token.isdigit() else token
            match = PRIORITY_LABEL.match(name)
            if match:
                priorities[state] = int(match.group(1))
            else:
                labels[name].append(state)
    return dict(labels), priorities


def ingest_explicit(tra: Union[str, Path], lab: Optional[Union[str, Path]], family: str,
                    radius: Union[str, Fraction], support_restricted: bool = True,
                    backend: FeasibilityBackend = EXACT) -> Rmdp:
    """
    Wrap an explicit MDP in uniform-radius uncertainty sets

    Args:
        tra: Transition file, one ``src action dst prob`` line per transition
        lab: Label file (``id="name"`` declarations, then ``state: labels``);
            labels named ``priority=<k>`` set state priorities
        family: Ball family name (``l1``, ``l2``, ``linf``)
        radius: Radius shared by every (state, action) pair
        support_restricted: Forbid mass outside the nominal support
        backend: Exact mode demands rows summing to exactly 1; float mode
            accepts the tolerance and renormalizes

    Raises:
        IngestError: on malformed lines or unnormalized rows
    """
    tra = Path(tra)
    ball = family_from_name(family, parse_rational(radius))
    transitions, states = _parse_tra(tra, backend)
    n_states = max(states) + 1 if states else 0

    labels: Dict[str, List[int]] = {}
    priorities: Dict[int, int] = {}
    if lab is not None:
        labels, priorities = _parse_lab(Path(lab), n_states)

    actions = sorted({action for _, action in transitions}, key=lambda a: (len(a), a))
    action_index = {a: i for i, a in enumerate(actions)}
    entries: Dict[Pair, UncertaintyEntry] = {}
    for (src_id, action), row in sorted(transitions.items(), key=lambda kv: (kv[0][0], action_index[kv[0][1]])):
        successors = tuple(sorted(row))
        template = TransitionTemplate(successors, tuple(row[t] for t in successors))
        entries[(src_id, action_index[action])] = UncertaintyEntry(template, ball, support_restricted)

    model = Rmdp.build([str(s) for s in range(n_states)], actions, entries, labels=labels,
                       priorities=priorities or None)
    violations = validate(model)
    if violations:
        raise IngestError(f"ingested model is invalid: {violations[0]}", tra)
    log.model_loaded(str(tra), len(model.live), model.n_pairs)
    return model


__all__ = [
    'SCHEMA', 'SchemaError', 'IngestError', 'dump_model', 'family_from_name',
    'ingest_explicit', 'load_model', 'model_from_dict', 'model_to_dict', 'save_model',
]
