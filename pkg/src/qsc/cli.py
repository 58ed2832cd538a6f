"""Command line front end: qsc run | verify | demo.

Exit codes: 0 success, 2 validation error, 3 runtime error, 4 verification
deficit.  Reports are JSON with floats printed at 17 significant digits so
identical seeds produce byte-identical output; the default seed comes from
QSC_SEED.  Setting QSC_CORRUPT_FRAMES=1 disables byproduct corrections in
the executor (a negative control for ``verify``).
"""
from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__
from .core.errors import QscError, SimulationError, ValidationError
from .core.gates import UnitarySpec, named_gate
from .core.measure import RngPolicy
from .core.state import StateVector, from_amplitudes, single_qubit, fidelity
from .core import channels
from .parser import parse
from .oracle import compare
from .seqexec import execute
from . import algos
from .qconv import ConvCodeSpec, apply_unrolled, encode_stream

VERIFY_STATE_TOL = 1e-10
VERIFY_TVD_TOL = 1e-9


# -- deterministic JSON ---

def _json(value, indent: int = 0) -> str:
    pad = " " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f'{pad}  "{k}": {_json(v, indent + 2).lstrip()}'
                 for k, v in value.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [f"{pad}  {_json(v, indent + 2).lstrip()}" for v in value]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, complex):
        return _json([value.real, value.imag], indent)
    return '"' + str(value).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _amplitude_pairs(state: StateVector) -> list[list[float]]:
    return [[float(a.real), float(a.imag)] for a in state.amplitudes]


def _emit(report: dict, path: str | None):
    text = _json(report) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _default_seed(args_seed) -> int:
    if args_seed is not None:
        return int(args_seed)
    return int(os.environ.get("QSC_SEED", "0"))


def _policy(args) -> RngPolicy:
    if getattr(args, "force_outcomes", None):
        bits = [int(b) for b in args.force_outcomes.split(",") if b != ""]
        if any(b not in (0, 1) for b in bits):
            raise ValidationError("forced outcomes must be bits", code="E_FORCE")
        return RngPolicy.forced(bits)
    return RngPolicy.seeded(_default_seed(getattr(args, "seed", None)))


# -- run ---

def cmd_run(args) -> int:
    with open(args.file, "r", encoding="utf-8") as fh:
        text = fh.read()
    ir = parse(text)
    policy = _policy(args)
    corrupt = os.environ.get("QSC_CORRUPT_FRAMES", "") == "1"
    result = execute(ir, policy, corrupt_frames=corrupt)
    report = {
        "report": "qsc-run",
        "version": 1,
        "tool_version": __version__,
        "file": args.file,
        "seed": policy.seed if policy.mode == "seeded" else None,
        "forced_outcomes": None if policy.mode == "seeded" else args.force_outcomes,
        "actions": result.action_log,
        "measurements": [
            {"qubits": list(r.qubits), "basis": r.basis,
             "outcomes": list(r.outcomes), "probability": r.probability}
            for r in result.records
        ],
        "frames": result.frame_log,
        "readouts": [
            {"qubits": list(r.qubits), "basis": r.basis,
             "outcomes": list(r.outcomes), "probability": r.probability}
            for r in result.readouts
        ],
        "readout_distribution": result.capture.distribution if result.capture else {},
        "readout_marginals": result.capture.marginals if result.capture else {},
        "final_qubits": result.final_state.qubit_count,
    }
    _emit(report, args.json)
    return 0


# -- verify ---

def cmd_verify(args) -> int:
    with open(args.file, "r", encoding="utf-8") as fh:
        text = fh.read()
    ir = parse(text)
    base = _default_seed(args.seed)
    corrupt = os.environ.get("QSC_CORRUPT_FRAMES", "") == "1"
    residuals = compare(ir, [base, base + 1, base + 2], corrupt_frames=corrupt)
    passed = (residuals["state_deficit"] <= VERIFY_STATE_TOL
              and residuals["tvd"] <= VERIFY_TVD_TOL)
    report = {
        "report": "qsc-verify",
        "version": 1,
        "file": args.file,
        "seeds": [base, base + 1, base + 2],
        "state_deficit": residuals["state_deficit"],
        "tvd": residuals["tvd"],
        "tolerances": {"state_deficit": VERIFY_STATE_TOL, "tvd": VERIFY_TVD_TOL},
        "pass": passed,
    }
    _emit(report, args.json)
    return 0 if passed else 4


# -- demos ---

def _parse_params(pairs: list[str]) -> dict[str, str]:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ValidationError(f"expected key=value, got '{pair}'", code="E_PARAM")
        key, value = pair.split("=", 1)
        out[key] = value
    return out


def _demo_qaa(params, seed) -> dict:
    p = float(params.get("p", "0.25"))
    n = int(params.get("n", "1"))
    if not 0.0 < p < 1.0 or n < 0 or n > 16:
        raise ValidationError("qaa demo needs 0<p<1 and 0<=n<=16", code="E_PARAM")
    angle = math.acos(math.sqrt(p))
    rot = np.array([[math.cos(angle), -math.sin(angle)],
                    [math.sin(angle), math.cos(angle)]])
    prep = UnitarySpec(2, np.kron(np.eye(2), rot))
    spec = algos.QaaSpec(prep, single_qubit("0"))
    _, prob = algos.qaa(spec, n, RngPolicy.seeded(seed))
    closed = math.sin((2 * n + 1) * math.asin(math.sqrt(p))) ** 2
    return {"demo": "qaa", "p": p, "n": n,
            "success_probability": prob, "closed_form": closed,
            "residual": abs(prob - closed)}


def _demo_qpe(params, seed) -> dict:
    gate = params.get("u", "s").lower()
    t_bits = int(params.get("t", "2"))
    u = named_gate(gate)
    if u.arity != 1:
        raise ValidationError("qpe demo uses one-qubit gates", code="E_PARAM")
    eigen = single_qubit("1")
    rec = algos.qpe(u, eigen, t_bits, RngPolicy.seeded(seed))
    true_phase = float(np.angle(u.matrix[1, 1]) / (2 * math.pi)) % 1.0
    return {"demo": "qpe", "u": gate, "t": t_bits,
            "bits": list(rec.bits), "estimate": rec.phase,
            "true_phase": true_phase,
            "probability": rec.probability,
            "distribution": rec.distribution,
            "residual": abs(rec.phase - true_phase) if abs(
                true_phase * (1 << t_bits) - round(true_phase * (1 << t_bits))) < 1e-12 else None}


def _demo_lcu(params, seed) -> dict:
    raw = params.get("terms", "x:0.70710678,z:0.70710678")
    names, coeffs, gates = [], [], []
    for item in raw.split(","):
        name, _, c = item.partition(":")
        names.append(name)
        coeffs.append(float(c) if c else 1.0)
        gates.append(named_gate(name))
    psi = single_qubit(params.get("psi", "+"))
    out, prob = algos.lcu(coeffs, gates, psi, RngPolicy.seeded(seed))
    target = sum(c * u.matrix for c, u in zip(coeffs, gates)) @ psi.amplitudes
    want = from_amplitudes(target)
    return {"demo": "lcu", "terms": raw, "psi": params.get("psi", "+"),
            "success_probability": prob,
            "output_amplitudes": _amplitude_pairs(out),
            "fidelity_vs_dense": fidelity(out, want),
            "residual": 1.0 - fidelity(out, want)}


def _demo_qmux(params, seed) -> dict:
    names = params.get("us", "i,x").split(",")
    gates = tuple(named_gate(n) for n in names)
    d_c = len(gates)
    coeffs = tuple(1.0 / math.sqrt(d_c) for _ in range(d_c))
    psi = single_qubit(params.get("psi", "0"))
    spec = algos.QmuxSpec(coeffs, gates)
    out = qmux_out = algos.qmux(spec, psi, RngPolicy.seeded(seed))
    k, m = spec.control_qubits, spec.data_qubits
    ctrl = np.asarray(coeffs, dtype=complex)
    want = np.zeros(1 << (k + m), dtype=complex)
    for i, u in enumerate(gates):
        vec = u.matrix @ psi.amplitudes
        for d in range(1 << m):
            want[i + (d << k)] += ctrl[i] * vec[d]
    want_sv = from_amplitudes(want)
    return {"demo": "qmux", "us": params.get("us", "i,x"),
            "output_amplitudes": _amplitude_pairs(out),
            "fidelity_vs_block_diagonal": fidelity(out, want_sv),
            "residual": 1.0 - fidelity(out, want_sv)}


def _demo_history(params, seed) -> dict:
    depth = int(params.get("T", "1"))
    gate_names = [params.get(f"u{i}", "x") for i in range(1, depth + 1)]
    gates = tuple(named_gate(g) for g in gate_names)
    psi0 = single_qubit(params.get("psi", "0"))
    spec = algos.HistorySpec(depth, gates, psi0)
    state = algos.history_state(spec)
    branch = []
    acc = psi0.amplitudes.copy()
    worst = 0.0
    for t in range(depth + 1):
        clock_idx = sum(1 << el for el in range(t, depth))
        amp = state.amplitudes[[clock_idx * 2 + d for d in range(2)]]
        weight = float(np.sum(np.abs(amp) ** 2))
        branch.append({"t": t, "weight": weight})
        worst = max(worst, abs(weight - 1.0 / (depth + 1)))
        if t < depth:
            acc = gates[t].matrix @ acc
    return {"demo": "history", "T": depth, "gates": gate_names,
            "branch_weights": branch, "max_weight_deviation": worst,
            "amplitudes": _amplitude_pairs(state)}


def _demo_qconv(params, seed) -> dict:
    cycles = int(params.get("cycles", "3"))
    bits = params.get("input", "101")
    if len(bits) != cycles or any(b not in "01" for b in bits):
        raise ValidationError("input must be one bit per cycle", code="E_PARAM")
    gates = [("cnot", (0, 2), None), ("cnot", (1, 2), None), ("swap", (0, 2), None)]
    spec = ConvCodeSpec.from_gates(2, 1, 1, gates)
    amps = np.zeros(1 << cycles, dtype=complex)
    amps[sum(int(b) << i for i, b in enumerate(bits))] = 1.0
    psi = StateVector(cycles, amps)
    out, trace = encode_stream(spec, psi, cycles, RngPolicy.seeded(seed))
    want = apply_unrolled(spec, psi, cycles)
    return {"demo": "qconv", "code": "(2,1,1)", "cycles": cycles, "input": bits,
            "fidelity_vs_unrolled": fidelity(out, want),
            "residual": 1.0 - fidelity(out, want),
            "emitted_per_cycle": [list(block) for block in trace.emitted]}


def _demo_trotter(params, seed) -> dict:
    layers = int(params.get("layers", "2"))
    rng = np.random.default_rng(seed)

    def random_u():
        mat = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        return UnitarySpec(2, np.linalg.qr(mat)[0])

    even = [(random_u(), (0, 1)), (random_u(), (2, 3))]
    odd = [(random_u(), (1, 2))]
    vec = rng.normal(size=16) + 1j * rng.normal(size=16)
    psi = from_amplitudes(vec)
    out = algos.trotter_brickwork(even, odd, layers, psi, RngPolicy.seeded(seed + 1))
    from .core.gates import embed
    layer = np.eye(16, dtype=complex)
    for u, pair in even:
        layer = embed(u, list(pair), 4) @ layer
    for u, pair in odd:
        layer = embed(u, list(pair), 4) @ layer
    want = StateVector(4, np.linalg.matrix_power(layer, layers) @ psi.amplitudes)
    return {"demo": "trotter", "layers": layers, "qubits": 4,
            "fidelity_vs_dense": fidelity(out, want),
            "residual": 1.0 - fidelity(out, want)}


def _demo_superchannel(params, seed) -> dict:
    trials = int(params.get("trials", "5"))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        mat = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        pre = UnitarySpec(2, np.linalg.qr(mat)[0])
        mat = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        post = UnitarySpec(2, np.linalg.qr(mat)[0])
        iso = np.linalg.qr(rng.normal(size=(8, 4)) + 1j * rng.normal(size=(8, 4)))[0]
        phi = channels.ChannelSpec(2, 2, (iso[:4, :], iso[4:, :]))
        vec = rng.normal(size=2) + 1j * rng.normal(size=2)
        rho = channels.density_of(from_amplitudes(vec))
        got = channels.apply_superchannel(pre, post, phi, rho)
        anc = np.zeros((2, 2), dtype=complex)
        anc[0, 0] = 1.0
        joint = np.kron(anc, rho)
        joint = pre.matrix @ joint @ pre.matrix.conj().T
        joint = sum(k @ joint @ k.conj().T for k in phi.kraus_ops)
        joint = post.matrix @ joint @ post.matrix.conj().T
        want = channels.partial_trace(joint, 2, [1])
        worst = max(worst, channels.trace_distance(got, want))
    return {"demo": "superchannel", "trials": trials, "max_trace_distance": worst,
            "residual": worst}


_DEMOS = {
    "qaa": _demo_qaa,
    "qpe": _demo_qpe,
    "lcu": _demo_lcu,
    "qmux": _demo_qmux,
    "history": _demo_history,
    "qconv": _demo_qconv,
    "trotter": _demo_trotter,
    "superchannel": _demo_superchannel,
}


def cmd_demo(args) -> int:
    if args.name not in _DEMOS:
        raise ValidationError(
            f"unknown demo '{args.name}'; pick from {sorted(_DEMOS)}", code="E_DEMO")
    params = _parse_params(args.params or [])
    seed = _default_seed(args.seed)
    report = _DEMOS[args.name](params, seed)
    report["seed"] = seed
    _emit(report, args.json)
    return 0


def build_arg_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="qsc",
                                  description="quantum sequential circuit toolkit")
    top.add_argument("--version", action="version", version=f"qsc {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="execute a circuit file")
    runp.add_argument("file")
    runp.add_argument("--seed", type=int, default=None)
    runp.add_argument("--force-outcomes", default=None,
                      help="comma list of forced measurement bits")
    runp.add_argument("--json", default=None, help="write the report to a file")
    runp.set_defaults(func=cmd_run)

    verp = sub.add_parser("verify", help="compare against the dense oracle")
    verp.add_argument("file")
    verp.add_argument("--seed", type=int, default=None)
    verp.add_argument("--json", default=None)
    verp.set_defaults(func=cmd_verify)

    demop = sub.add_parser("demo", help="run a named algorithm demo")
    demop.add_argument("name")
    demop.add_argument("params", nargs="*", help="key=value parameters")
    demop.add_argument("--seed", type=int, default=None)
    demop.add_argument("--json", default=None)
    demop.set_defaults(func=cmd_demo)
    return top


def main(argv: list[str] | None = None) -> int:
    args = build_arg_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SimulationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except QscError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
