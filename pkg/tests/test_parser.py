import glob
import os

import numpy as np
import pytest

from qsc.core import ValidationError
from qsc.parser import parse, serialize
from qsc.seqexec import Readout, Signal, TransistorDecl
from qsc.transistor import ChoiStored, MagicT, SChain, Wire

FIXTURES = sorted(glob.glob(os.path.join(os.path.dirname(__file__),
                                         "fixtures", "*.qsc")))

MINIMAL = """format=1
transistor t1 kind=wire length=1
input t1.in state=0
signal t1 cycle=1
readout t1.out basis=Z cycle=2
"""


class TestGrammar:
    def test_minimal_program(self):
        ir = parse(MINIMAL)
        assert ir.qubit_budget() == 3
        kinds = [type(n) for n in ir.nodes]
        assert TransistorDecl in kinds and Signal in kinds and Readout in kinds

    def test_all_transistor_kinds(self):
        text = """format=1
transistor a kind=wire length=3
transistor b kind=schain
transistor c kind=choi:cz
transistor d kind=magict
"""
        ir = parse(text)
        decls = ir.transistors()
        assert isinstance(decls["a"].kind, Wire) and decls["a"].kind.length == 3
        assert isinstance(decls["b"].kind, SChain)
        assert isinstance(decls["c"].kind, ChoiStored)
        assert isinstance(decls["d"].kind, MagicT)

    def test_comments_and_blanks(self):
        text = "# leading comment\n\nformat=1\n# another\ntransistor t kind=wire\n"
        assert len(parse(text).nodes) == 1

    def test_missing_format_header(self):
        with pytest.raises(ValidationError) as err:
            parse("transistor t kind=wire\n")
        assert err.value.code == "E_FORMAT"
        assert err.value.line == 1

    def test_loop_endpoint_rule(self):
        text = """format=1
transistor a kind=wire
transistor b kind=wire
loop a.out -> b.in
"""
        with pytest.raises(ValidationError) as err:
            parse(text)
        assert err.value.code == "E_LOOP"
        assert err.value.line == 4
        assert "share a transistor" in str(err.value)

    def test_unknown_directive_has_line(self):
        with pytest.raises(ValidationError) as err:
            parse("format=1\nfrobnicate x\n")
        assert err.value.line == 2
        assert err.value.code == "E_DIR"

    def test_bad_reference(self):
        with pytest.raises(ValidationError) as err:
            parse("format=1\nsignal ghost cycle=1\n")
        assert err.value.code == "E_REF"

    def test_mode_index_bounds(self):
        text = "format=1\ntransistor c kind=choi:cz\ninput c.in[5] state=0\n"
        with pytest.raises(ValidationError) as err:
            parse(text)
        assert err.value.code == "E_IDX"

    def test_signal_reuse_without_refresh(self):
        text = """format=1
transistor t kind=wire
input t.in state=0
signal t cycle=1
signal t cycle=2
"""
        with pytest.raises(ValidationError) as err:
            parse(text)
        assert err.value.code == "E_REUSE"

    def test_gate_before_signal_rejected(self):
        text = """format=1
transistor t kind=wire
input t.in state=0
gate s targets=t.out cycle=1
signal t cycle=2
"""
        with pytest.raises(ValidationError) as err:
            parse(text)
        assert err.value.code == "E_ORDER"


class TestRoundTrip:
    @pytest.mark.parametrize("path", FIXTURES, ids=os.path.basename)
    def test_fixture_round_trip(self, path):
        with open(path, "r", encoding="utf-8") as fh:
            ir = parse(fh.read())
        again = parse(serialize(ir))
        assert again.nodes == ir.nodes
        assert serialize(again) == serialize(ir)

    def test_corpus_size(self):
        assert len(FIXTURES) >= 15


class TestFuzz:
    def test_random_bytes_yield_diagnostics(self):
        rng = np.random.default_rng(99)
        crashes = 0
        for _ in range(2000):
            length = int(rng.integers(0, 120))
            blob = bytes(rng.integers(0, 256, size=length, dtype=np.uint8))
            text = blob.decode("utf-8", errors="replace")
            try:
                parse(text)
            except ValidationError:
                pass
            except Exception:
                crashes += 1
        assert crashes == 0

    def test_mutated_fixture_lines(self):
        rng = np.random.default_rng(7)
        base = MINIMAL.splitlines()
        for _ in range(500):
            lines = list(base)
            idx = int(rng.integers(0, len(lines)))
            line = list(lines[idx])
            if line:
                pos = int(rng.integers(0, len(line)))
                line[pos] = chr(int(rng.integers(32, 127)))
            lines[idx] = "".join(line)
            try:
                parse("\n".join(lines))
            except ValidationError:
                pass
