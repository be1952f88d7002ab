"""
Property tests over randomly generated programs.

Each test walks a fixed range of seeds so failures are reproducible: the
assertion message names the seed, and ProgramGenerator(seed).case() rebuilds
the program.
"""

import pytest

from src.desugar import IfThenElse, Plain, desugar, flatten_choose
from src.engine import Engine, ExecConfig, run
from src.models import TRUE, Choose, OutcomeKind, Program, RunReport, Seq, TraceKind, Rule
from src.persist import JsonlTraceWriter, report_to_json
from tests.generators import ProgramGenerator, cases
from tests.reference import run_conditional, run_reference

PROGRAMS = 10_000
SMALL = 1_000

pytestmark = pytest.mark.slow


class ChooseEntryChecker:
    """
    Trace sink that checks every choose alternative starts from the state the
    choose itself started from.
    """

    def __init__(self):
        self.engine = None
        self.open_chooses = []
        self.violations = 0

    def __call__(self, event):
        if event.kind is TraceKind.ENTER:
            if self.open_chooses and self.open_chooses[-1][0] == event.depth - 1:
                if self.engine.state.bindings() != self.open_chooses[-1][1]:
                    self.violations += 1
            if event.rule is Rule.CHOOSE:
                self.open_chooses.append((event.depth, self.engine.state.bindings()))
        elif event.rule is Rule.CHOOSE:
            self.open_chooses.pop()


def assert_same(seed, result, reference, compare_state=True):
    assert result.outcome.succeeded == reference.succeeded, f"seed {seed}: outcome"
    if not result.outcome.succeeded:
        assert result.outcome.code_list == reference.codes, f"seed {seed}: codes"
    if compare_state:
        assert result.state == reference.state, f"seed {seed}: state"


class TestRollback:
    """Failed alternatives are invisible to the alternatives after them."""

    def test_alternatives_start_from_choose_entry_state(self):
        """Test every alternative sees the choose-entry state."""
        checked = 0
        for seed, program, goal in cases(PROGRAMS):
            checker = ChooseEntryChecker()
            working = Program(program.defs, program.state.copy())
            engine = Engine(working, ExecConfig(max_depth=100, trace_sink=checker))
            checker.engine = engine
            engine.exec(goal)
            assert checker.violations == 0, f"seed {seed}"
            assert working.state.open_transactions == 0, f"seed {seed}"
            checked += engine.stats.alternatives_tried
        assert checked > 0


class TestReferenceEquivalence:
    """The undo-log engine agrees with the deep-copy reference evaluator."""

    def test_outcome_codes_and_state(self):
        """Test outcome, error codes and final state on random programs."""
        for seed, program, goal in cases(PROGRAMS):
            result = run(program, goal)
            reference = run_reference(program, goal)
            assert_same(seed, result, reference)


class TestIfThenElse:
    """The choose form of if-then-else behaves like a native conditional."""

    def test_matches_conditional(self):
        """Test desugared conditionals against a direct conditional."""
        for seed in range(SMALL):
            gen = ProgramGenerator(seed, procedures=0)
            program = Program([], gen.initial_state(all_ints=True))
            cond = gen.bool_expr(3, safe=True)
            then, otherwise = gen.side_effects(3), gen.side_effects(3)
            choose_form = desugar(IfThenElse(cond, Plain(then), Plain(otherwise)))
            result = run(program, choose_form)
            reference = run_conditional(program, cond, then, otherwise)
            assert result.outcome.succeeded == reference.succeeded, f"seed {seed}"
            assert result.state == reference.state, f"seed {seed}"


class TestChooseLaws:
    """Algebraic laws of choose."""

    def test_flattening(self):
        """Test choose(G1, choose(G2, G3)) behaves like choose(G1, G2, G3)."""
        for seed in range(SMALL):
            gen = ProgramGenerator(seed)
            program = gen.program()
            g1, g2, g3 = gen.stmt(4), gen.stmt(4), gen.stmt(4)
            nested = run(program, Choose((g1, Choose((g2, g3)))))
            flat = run(program, Choose((g1, g2, g3)))
            assert nested.outcome.kind is flat.outcome.kind, f"seed {seed}"
            if not flat.outcome.succeeded:
                assert nested.outcome.code_list == flat.outcome.code_list, f"seed {seed}"
            assert nested.state == flat.state, f"seed {seed}"
            assert run(program, flatten_choose(Choose((g1, Choose((g2, g3)))))).state == flat.state

    def test_singleton(self):
        """Test choose(G) behaves like G, up to the rollback of a failed G."""
        for seed in range(SMALL):
            gen = ProgramGenerator(seed)
            program, goal = gen.case()
            single = run(program, Choose((goal,)))
            plain = run(program, goal)
            assert single.outcome.kind is plain.outcome.kind, f"seed {seed}"
            if plain.outcome.succeeded:
                assert single.state == plain.state, f"seed {seed}"
            else:
                assert single.outcome.code_list == plain.outcome.code_list, f"seed {seed}"
                assert single.state == program.state, f"seed {seed}"

    def test_sequence_unit(self):
        """Test t is a unit of sequencing."""
        for seed in range(SMALL):
            program, goal = ProgramGenerator(seed).case()
            plain = run(program, goal)
            for variant in (Seq(TRUE, goal), Seq(goal, TRUE)):
                result = run(program, variant)
                assert result.outcome.kind is plain.outcome.kind, f"seed {seed}"
                assert result.state == plain.state, f"seed {seed}"


class TestDeterminism:
    """Repeated runs produce identical reports and traces."""

    def test_reports_and_traces_repeat(self, tmp_path):
        """Test two runs of the same case are byte-identical."""
        for seed, program, goal in cases(200):
            outputs = []
            for attempt in range(2):
                path = tmp_path / f"trace-{attempt}.jsonl"
                with JsonlTraceWriter(path) as writer:
                    result = run(program, goal, ExecConfig(trace_sink=writer))
                outputs.append((report_to_json(RunReport.from_run(*result)), path.read_bytes()))
            assert outputs[0] == outputs[1], f"seed {seed}"

    def test_failure_reports_list_codes(self):
        """Test failed runs always report at least one code."""
        for seed, program, goal in cases(SMALL):
            report = RunReport.from_run(*run(program, goal))
            assert (report.outcome is OutcomeKind.FAILURE) == bool(report.error_codes)
