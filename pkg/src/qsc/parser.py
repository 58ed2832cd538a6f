"""Line-oriented circuit description front end.

One directive per line, ``#`` starts a comment, keywords are
case-sensitive and lower-case.  The first directive must be ``format=1``.

    transistor <id> kind=<wire|schain|choi:<gate>|magict> [length=<N>]
    ebit <id> a=<ref> b=<id>.in[idx]
    loop <id>.out -> <id>.in
    input <id>.in[idx] state=<0|1|+|-|file:PATH> [mode=measure|teleport]
    gate <name>[(param)] targets=<ref,...> cycle=<c>
    signal <id> cycle=<c>
    refresh <id> cycle=<c>
    readout <ref> basis=<Z|X> cycle=<c>

A reference is either a transistor mode ``<id>.<in|out>[idx]`` (index
defaults to 0) or a bare combinational-qubit name.  Combinational qubits
start in |0> at first use; an ``ebit`` whose ``a`` side is a bare qubit
feeds that qubit into a transistor input.  Gates and readouts may touch
output modes only at or after the owner's signal cycle, and a read-out
wire is terminal.
"""
from __future__ import annotations

import json
import re

from .core.errors import ValidationError
from .core.state import StateVector, from_amplitudes
from .transistor import ChoiStored, GateKind, MagicT, SChain, Wire
from .core.gates import named_gate
from .seqexec import (
    CircuitIR,
    CombinationalGate,
    EbitLink,
    InputPrep,
    Loop,
    ModeRef,
    QubitRef,
    Readout,
    RefreshNode,
    Signal,
    TransistorDecl,
    validate,
)

FORMAT_LINE = "format=1"

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_MODE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\.(in|out)(?:\[(\d+)\])?$")
_GATE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\(([-+0-9.eE]+)\))?$")


def _err(msg: str, line_no: int, code: str) -> ValidationError:
    return ValidationError(msg, line=line_no, code=code)


def _split_fields(parts: list[str], line_no: int) -> dict[str, str]:
    fields = {}
    for part in parts:
        if "=" not in part:
            raise _err(f"expected key=value, got '{part}'", line_no, "E_SYNTAX")
        key, value = part.split("=", 1)
        if key in fields:
            raise _err(f"duplicate field '{key}'", line_no, "E_SYNTAX")
        fields[key] = value
    return fields


def _parse_mode(text: str, line_no: int, want_side: str | None = None) -> ModeRef:
    match = _MODE.match(text)
    if not match:
        raise _err(f"'{text}' is not a transistor mode reference", line_no, "E_REF")
    name, side, idx = match.group(1), match.group(2), match.group(3)
    if want_side and side != want_side:
        raise _err(f"'{text}' must be an {want_side}-mode", line_no, "E_SIDE")
    return ModeRef(name, side, int(idx) if idx else 0)


def _parse_ref(text: str, line_no: int):
    if "." in text:
        return _parse_mode(text, line_no)
    if not _IDENT.match(text):
        raise _err(f"'{text}' is not a valid reference", line_no, "E_REF")
    return QubitRef(text)


def _parse_cycle(fields: dict, line_no: int) -> int:
    if "cycle" not in fields:
        raise _err("missing cycle=", line_no, "E_SYNTAX")
    try:
        return int(fields["cycle"])
    except ValueError:
        raise _err(f"bad cycle '{fields['cycle']}'", line_no, "E_SYNTAX") from None


def _parse_kind(fields: dict, line_no: int) -> GateKind:
    kind = fields.get("kind")
    if kind is None:
        raise _err("missing kind=", line_no, "E_SYNTAX")
    if kind == "wire":
        try:
            length = int(fields.get("length", "1"))
        except ValueError:
            raise _err("bad length", line_no, "E_SYNTAX") from None
        if length < 1:
            raise _err("wire length must be >= 1", line_no, "E_RANGE")
        return Wire(length)
    if kind == "schain":
        return SChain()
    if kind == "magict":
        return MagicT()
    if kind.startswith("choi:"):
        gate_name = kind[5:]
        try:
            u = named_gate(gate_name)
        except Exception:
            raise _err(f"unknown stored gate '{gate_name}'", line_no, "E_GATE") from None
        if u.arity > 2:
            raise _err("stored gates support up to two qubits", line_no, "E_RANGE")
        return ChoiStored(u)
    raise _err(f"unknown transistor kind '{kind}'", line_no, "E_KIND")


def _load_state_file(path: str, line_no: int) -> StateVector:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        pairs = payload["amplitudes"]
        return from_amplitudes([complex(re_, im_) for re_, im_ in pairs])
    except ValidationError:
        raise
    except Exception as exc:
        raise _err(f"cannot load state file '{path}': {exc}", line_no, "E_FILE") from None


def parse(text: str) -> CircuitIR:
    """Parse a circuit description; raises ValidationError with a line number."""
    nodes = []
    saw_format = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not saw_format:
            if line != FORMAT_LINE:
                raise _err(f"first directive must be '{FORMAT_LINE}'", line_no, "E_FORMAT")
            saw_format = True
            continue
        parts = line.split()
        head = parts[0]
        if head == "transistor":
            if len(parts) < 2 or not _IDENT.match(parts[1]):
                raise _err("transistor needs an identifier", line_no, "E_SYNTAX")
            fields = _split_fields(parts[2:], line_no)
            _reject_unknown(fields, {"kind", "length"}, line_no)
            nodes.append(TransistorDecl(parts[1], _parse_kind(fields, line_no)))
        elif head == "ebit":
            if len(parts) < 2 or not _IDENT.match(parts[1]):
                raise _err("ebit needs an identifier", line_no, "E_SYNTAX")
            fields = _split_fields(parts[2:], line_no)
            _reject_unknown(fields, {"a", "b"}, line_no)
            if "a" not in fields or "b" not in fields:
                raise _err("ebit needs a= and b=", line_no, "E_SYNTAX")
            source = _parse_ref(fields["a"], line_no)
            if isinstance(source, ModeRef) and source.side != "out":
                raise _err("ebit a= must be an out-mode or a qubit", line_no, "E_SIDE")
            dest = _parse_mode(fields["b"], line_no, want_side="in")
            if isinstance(source, ModeRef) and source.transistor == dest.transistor:
                raise _err("loop endpoints must share a transistor; "
                           "use the loop directive for self-links and distinct "
                           "transistors for ebit links", line_no, "E_LOOP")
            nodes.append(EbitLink(parts[1], source, dest))
        elif head == "loop":
            if len(parts) != 4 or parts[2] != "->":
                raise _err("expected: loop <id>.out -> <id>.in", line_no, "E_SYNTAX")
            src = _parse_mode(parts[1], line_no, want_side="out")
            dst = _parse_mode(parts[3], line_no, want_side="in")
            if src.transistor != dst.transistor:
                raise _err("loop endpoints must share a transistor", line_no, "E_LOOP")
            nodes.append(Loop(src.transistor))
        elif head == "input":
            if len(parts) < 2:
                raise _err("input needs a destination mode", line_no, "E_SYNTAX")
            dest = _parse_mode(parts[1], line_no, want_side="in")
            fields = _split_fields(parts[2:], line_no)
            _reject_unknown(fields, {"state", "mode"}, line_no)
            state = fields.get("state")
            if state is None:
                raise _err("input needs state=", line_no, "E_SYNTAX")
            mode = fields.get("mode", "measure")
            if mode not in ("measure", "teleport"):
                raise _err(f"unknown input mode '{mode}'", line_no, "E_MODE")
            if state.startswith("file:"):
                if mode != "teleport":
                    raise _err("file states require mode=teleport", line_no, "E_PREP")
                block = _load_state_file(state[5:], line_no)
                nodes.append(InputPrep(dest, block, mode))
            else:
                if state not in ("0", "1", "+", "-"):
                    raise _err(f"unknown input state '{state}'", line_no, "E_PREP")
                nodes.append(InputPrep(dest, state, mode))
        elif head == "gate":
            if len(parts) < 2:
                raise _err("gate needs a name", line_no, "E_SYNTAX")
            match = _GATE.match(parts[1])
            if not match:
                raise _err(f"bad gate name '{parts[1]}'", line_no, "E_GATE")
            name, param = match.group(1), match.group(2)
            param_val = float(param) if param is not None else None
            try:
                named_gate(name, param_val)
            except Exception:
                raise _err(f"unknown gate '{parts[1]}'", line_no, "E_GATE") from None
            fields = _split_fields(parts[2:], line_no)
            _reject_unknown(fields, {"targets", "cycle"}, line_no)
            if "targets" not in fields:
                raise _err("gate needs targets=", line_no, "E_SYNTAX")
            targets = tuple(_parse_ref(t, line_no)
                            for t in fields["targets"].split(",") if t)
            if not targets:
                raise _err("gate needs at least one target", line_no, "E_SYNTAX")
            nodes.append(CombinationalGate(name, param_val, targets,
                                           _parse_cycle(fields, line_no)))
        elif head == "signal":
            if len(parts) < 2 or not _IDENT.match(parts[1]):
                raise _err("signal needs a transistor id", line_no, "E_SYNTAX")
            fields = _split_fields(parts[2:], line_no)
            _reject_unknown(fields, {"cycle"}, line_no)
            nodes.append(Signal(parts[1], _parse_cycle(fields, line_no)))
        elif head == "refresh":
            if len(parts) < 2 or not _IDENT.match(parts[1]):
                raise _err("refresh needs a transistor id", line_no, "E_SYNTAX")
            fields = _split_fields(parts[2:], line_no)
            _reject_unknown(fields, {"cycle"}, line_no)
            nodes.append(RefreshNode(parts[1], _parse_cycle(fields, line_no)))
        elif head == "readout":
            if len(parts) < 2:
                raise _err("readout needs a reference", line_no, "E_SYNTAX")
            ref = _parse_ref(parts[1], line_no)
            if isinstance(ref, ModeRef) and ref.side != "out":
                raise _err("readout must target an out-mode or qubit", line_no, "E_SIDE")
            fields = _split_fields(parts[2:], line_no)
            _reject_unknown(fields, {"basis", "cycle"}, line_no)
            basis = fields.get("basis", "Z")
            if basis not in ("Z", "X"):
                raise _err(f"unknown readout basis '{basis}'", line_no, "E_BASIS")
            nodes.append(Readout(ref, basis, _parse_cycle(fields, line_no),
                                 name=f"r{len(nodes)}_{_fmt_ref(ref)}"))
        else:
            raise _err(f"unknown directive '{head}'", line_no, "E_DIR")
    if not saw_format:
        raise _err(f"empty program: first directive must be '{FORMAT_LINE}'",
                   1, "E_FORMAT")
    ir = CircuitIR(nodes)
    validate(ir)
    return ir


def _reject_unknown(fields: dict, allowed: set, line_no: int):
    extra = set(fields) - allowed
    if extra:
        raise _err(f"unknown field(s) {sorted(extra)}", line_no, "E_SYNTAX")


def _fmt_ref(ref) -> str:
    if isinstance(ref, QubitRef):
        return ref.name
    return f"{ref.transistor}.{ref.side}[{ref.index}]"


def serialize(ir: CircuitIR) -> str:
    """Render an IR back to directive text (parse . serialize = identity)."""
    lines = [FORMAT_LINE]
    for node in ir.nodes:
        if isinstance(node, TransistorDecl):
            kind = node.kind
            if isinstance(kind, Wire):
                lines.append(f"transistor {node.name} kind=wire length={kind.length}")
            elif isinstance(kind, SChain):
                lines.append(f"transistor {node.name} kind=schain")
            elif isinstance(kind, MagicT):
                lines.append(f"transistor {node.name} kind=magict")
            else:
                name = _stored_gate_name(kind)
                lines.append(f"transistor {node.name} kind=choi:{name}")
        elif isinstance(node, EbitLink):
            lines.append(f"ebit {node.name} a={_fmt_ref(node.source)} "
                         f"b={_fmt_ref(node.dest)}")
        elif isinstance(node, Loop):
            lines.append(f"loop {node.transistor}.out -> {node.transistor}.in")
        elif isinstance(node, InputPrep):
            if isinstance(node.state, StateVector):
                raise ValidationError("cannot serialize inline state blocks",
                                      code="E_SERIALIZE")
            lines.append(f"input {_fmt_ref(node.dest)} state={node.state} "
                         f"mode={node.mode}")
        elif isinstance(node, CombinationalGate):
            gate = node.gate if node.param is None else f"{node.gate}({node.param})"
            targets = ",".join(_fmt_ref(r) for r in node.targets)
            lines.append(f"gate {gate} targets={targets} cycle={node.cycle}")
        elif isinstance(node, Signal):
            lines.append(f"signal {node.transistor} cycle={node.cycle}")
        elif isinstance(node, RefreshNode):
            lines.append(f"refresh {node.transistor} cycle={node.cycle}")
        elif isinstance(node, Readout):
            lines.append(f"readout {_fmt_ref(node.ref)} basis={node.basis} "
                         f"cycle={node.cycle}")
    return "\n".join(lines) + "\n"


_STORED_NAMES = ("i", "x", "y", "z", "h", "s", "sdg", "t", "tdg",
                 "cz", "cnot", "swap")


def _stored_gate_name(kind: ChoiStored) -> str:
    import numpy as np

    for name in _STORED_NAMES:
        ref = named_gate(name)
        if ref.arity == kind.u.arity and np.allclose(ref.matrix, kind.u.matrix,
                                                     atol=1e-12):
            return name
    raise ValidationError("stored gate has no registered name", code="E_SERIALIZE")
