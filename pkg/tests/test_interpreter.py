from __future__ import annotations

import pytest

from opendataqa.errors import InvalidIdentifier, NameCollision
from opendataqa.interpreter import (
    ParseError,
    ResourceLimits,
    Session,
    UnsupportedConstruct,
    execute,
    parse,
)
from opendataqa.interpreter.parser import Assign


def ok(session, source):
    result = execute(session, source)
    assert result.status == "ok", result.error_message
    return result


class TestParse:
    def test_simple_assignment(self):
        program = parse("x = 1 + 2")
        assert len(program.body) == 1
        assert isinstance(program.body[0], Assign)

    def test_syntax_error_position(self):
        with pytest.raises(ParseError) as exc:
            parse("def f(:")
        assert exc.value.line == 1

    def test_unsupported_class(self):
        with pytest.raises(UnsupportedConstruct) as exc:
            parse("class A: pass")
        assert exc.value.construct == "class"
        assert exc.value.line == 1

    @pytest.mark.parametrize(
        "source,construct",
        [
            ("with open('f') as f:\n    pass", "with"),
            ("try:\n    pass\nexcept:\n    pass", "try"),
            ("f = lambda x: x", "lambda"),
            ("@dec\ndef f():\n    pass", "decorator"),
            ("[x for x in a for y in b]", "comprehension with multiple for-clauses"),
            ("{k: v for k in a}", "dict comprehension"),
            ("x = *a,", "starred argument"),
            ("del x", "del"),
            ("assert x", "assert"),
            ("global x", "global"),
            ("yield 1", "yield"),
            ("raise ValueError", "raise"),
        ],
    )
    def test_unsupported_constructs(self, source, construct):
        with pytest.raises(UnsupportedConstruct) as exc:
            parse(source)
        assert exc.value.construct == construct

    def test_deterministic_ast(self):
        source = "x = [i * 2 for i in range(3)]\nprint(x)"
        assert parse(source) == parse(source)

    def test_empty_source_rejected(self):
        with pytest.raises(ParseError):
            parse("   \n  \n")

    def test_unterminated_string(self):
        with pytest.raises(ParseError):
            parse('x = "abc')

    def test_bad_indent(self):
        with pytest.raises(ParseError):
            parse("if True:\n    x = 1\n  y = 2")

    def test_line_numbers_on_later_lines(self):
        with pytest.raises(ParseError) as exc:
            parse("x = 1\ny = (")
        assert exc.value.line == 2


class TestExecuteBasics:
    def test_persistence_across_executions(self):
        s = Session()
        ok(s, "x = 2")
        result = ok(s, "print(x * 3)")
        assert result.log == "6\n"

    def test_final_expression_value(self):
        s = Session()
        result = ok(s, "41 + 1")
        assert result.value == "42"

    def test_no_value_for_assignment(self):
        s = Session()
        assert ok(s, "x = 5").value is None

    def test_runtime_error_keeps_prior_bindings(self):
        s = Session()
        result = execute(s, "a = 10\nb = a / 0\nc = 99")
        assert result.status == "runtime_error"
        assert "DivisionByZero" in result.error_message
        assert ok(s, "a").value == "10"
        follow = execute(s, "c")
        assert follow.status == "runtime_error"
        assert "NameUndefined" in follow.error_message

    def test_error_messages_carry_line(self):
        s = Session()
        result = execute(s, "x = 1\ny = unknown_name")
        assert "line 2" in result.error_message

    def test_session_isolation(self):
        a, b = Session(), Session()
        ok(a, "secret = 123")
        result = execute(b, "secret")
        assert result.status == "runtime_error"

    def test_division_by_zero_session_usable_after(self):
        s = Session()
        assert execute(s, "1/0").status == "runtime_error"
        assert ok(s, "2 + 2").value == "4"

    def test_syntax_error_status(self):
        s = Session()
        result = execute(s, "def f(:")
        assert result.status == "syntax_error"
        assert result.error_message.startswith("SyntaxError")


class TestControlFlow:
    def test_if_elif_else(self):
        s = Session()
        result = ok(s, "x = 7\nif x > 10:\n    r = 'big'\nelif x > 5:\n    r = 'mid'\nelse:\n    r = 'small'\nr")
        assert result.value == "'mid'"

    def test_while_with_break_continue(self):
        s = Session()
        result = ok(
            s,
            "total = 0\ni = 0\nwhile True:\n    i = i + 1\n    if i % 2 == 0:\n        continue\n    if i > 9:\n        break\n    total = total + i\ntotal",
        )
        assert result.value == "25"  # 1+3+5+7+9

    def test_for_over_dict_iterates_keys(self):
        s = Session()
        result = ok(s, "d = {'a': 1, 'b': 2}\nout = []\nfor k in d:\n    out.append(k)\nout")
        assert result.value == "['a', 'b']"

    def test_nested_functions_and_closures(self):
        s = Session()
        result = ok(
            s,
            "def make_adder(n):\n    def add(x):\n        return x + n\n    return add\nadd5 = make_adder(5)\nadd5(10)",
        )
        assert result.value == "15"

    def test_function_defaults_and_kwargs(self):
        s = Session()
        result = ok(s, "def greet(name, suffix='!'):\n    return name + suffix\ngreet('hi', suffix='?')")
        assert result.value == "'hi?'"

    def test_recursion_depth_limited(self):
        s = Session()
        result = execute(s, "def f(n):\n    return f(n + 1)\nf(0)")
        assert result.status == "runtime_error"
        assert "RecursionTooDeep" in result.error_message

    def test_tuple_unpacking_in_for(self):
        s = Session()
        result = ok(s, "pairs = [(1, 'a'), (2, 'b')]\nout = ''\nfor n, c in pairs:\n    out = out + c * n\nout")
        assert result.value == "'abb'"

    def test_ternary(self):
        s = Session()
        assert ok(s, "x = 3\n'odd' if x % 2 else 'even'").value == "'odd'"


class TestExpressions:
    @pytest.mark.parametrize(
        "source,expected",
        [
            ("2 ** 10", "1024"),
            ("7 // 2", "3"),
            ("7 % 3", "1"),
            ("-2 ** 2", "-4"),
            ("2 ** -1", "0.5"),
            ("1 < 2 < 3", "True"),
            ("1 < 2 > 3", "False"),
            ("'a' in 'cat'", "True"),
            ("3 in [1, 2, 3]", "True"),
            ("4 not in (1, 2)", "True"),
            ("not []", "True"),
            ("None is None", "True"),
            ("[1, 2] + [3]", "[1, 2, 3]"),
            ("'ab' * 3", "'ababab'"),
            ("len('hello')", "5"),
            ("sorted([3, 1, 2])", "[1, 2, 3]"),
            ("sum(range(5))", "10"),
            ("min(4, 2, 9)", "2"),
            ("max([1, 5, 3])", "5"),
            ("round(2.675, 2)", "2.67"),
            ("abs(-3.5)", "3.5"),
            ("int('42')", "42"),
            ("float('2.5')", "2.5"),
            ("str(12)", "'12'"),
            ("[x * x for x in range(4)]", "[0, 1, 4, 9]"),
            ("[x for x in range(10) if x % 3 == 0]", "[0, 3, 6, 9]"),
            ("sum(x * 2 for x in range(3))", "6"),
            ("list5 = [10, 20, 30, 40, 50]\nlist5[1:3]", "[20, 30]"),
            ("'hello'[-1]", "'o'"),
            ("(1, 2)[0]", "1"),
            ("{'a': 1}['a']", "1"),
            ("f'{21 * 2} is the answer'", "'42 is the answer'"),
            ("f'{3.14159:.2f}'", "'3.14'"),
            ("x, y = 1, 2\nx + y", "3"),
        ],
    )
    def test_expression_values(self, source, expected):
        assert ok(Session(), source).value == expected

    @pytest.mark.parametrize(
        "source,kind",
        [
            ("'a' + 1", "TypeMismatch"),
            ("{} < 3", "TypeMismatch"),
            ("[1, 2][5]", "IndexOutOfRange"),
            ("{'a': 1}['b']", "IndexOutOfRange"),
            ("missing_name", "NameUndefined"),
            ("1 / 0", "DivisionByZero"),
            ("10 % 0", "DivisionByZero"),
            ("'abc'.upper().nope()", "TypeMismatch"),
            ("int('abc')", "TypeMismatch"),
            ("(1)(2)", "TypeMismatch"),
        ],
    )
    def test_runtime_error_kinds(self, source, kind):
        result = execute(Session(), source)
        assert result.status == "runtime_error"
        assert result.error_message.startswith(kind)

    def test_dunder_access_blocked(self):
        result = execute(Session(), "'x'.__class__")
        assert result.status == "runtime_error"
        assert "not allowed" in result.error_message

    def test_string_methods(self):
        s = Session()
        assert ok(s, "' Hi There '.strip().lower()").value == "'hi there'"
        assert ok(s, "'a-b-c'.split('-')").value == "['a', 'b', 'c']"
        assert ok(s, "'{} and {}'.format(1, 2)").value == "'1 and 2'"

    def test_dict_methods(self):
        s = Session()
        assert ok(s, "d = {'a': 1}\nd.get('b', 0)").value == "0"
        assert ok(s, "sorted({'b': 1, 'a': 2}.items())").value == "[('a', 2), ('b', 1)]"


class TestResourceLimits:
    def test_default_limits(self):
        limits = ResourceLimits()
        assert limits.max_ops == 10_000_000
        assert limits.max_collection_len == 1_000_000
        assert limits.max_output_chars == 20_000
        with pytest.raises(ValueError):
            ResourceLimits(max_ops=0)

    def test_infinite_loop_halts_at_cap(self):
        limits = ResourceLimits(max_ops=5000)
        result = execute(Session(), "x = 0\nwhile True:\n    x = x + 1", limits)
        assert result.status == "resource_exhausted"
        assert result.ops_used >= limits.max_ops
        # halts within one node evaluation of the cap
        assert result.ops_used <= limits.max_ops + 1

    def test_ops_grow_linearly_with_iterations(self):
        costs = []
        for n in (100, 200, 400):
            s = Session()
            result = ok(s, f"t = 0\nfor i in range({n}):\n    t = t + i")
            costs.append(result.ops_used)
        d1 = costs[1] - costs[0]
        d2 = costs[2] - costs[1]
        assert d2 == pytest.approx(2 * d1, rel=0.01)

    def test_collection_cap_on_multiplication(self):
        limits = ResourceLimits(max_collection_len=1000)
        result = execute(Session(), "x = 'a' * 5000", limits)
        assert result.status == "runtime_error"
        assert "CollectionTooLarge" in result.error_message

    def test_doubling_attack_halts(self):
        limits = ResourceLimits(max_collection_len=100_000)
        result = execute(
            Session(), "s = 'x'\nwhile True:\n    s = s + s", limits
        )
        assert result.status == "runtime_error"
        assert "CollectionTooLarge" in result.error_message

    def test_huge_integer_power_blocked(self):
        result = execute(Session(), "10 ** (10 ** 10)")
        assert result.status in ("runtime_error", "resource_exhausted")

    def test_output_truncated_flag(self):
        limits = ResourceLimits(max_output_chars=50)
        result = execute(Session(), "for i in range(100):\n    print('0123456789')", limits)
        assert result.status == "ok"
        assert result.output_truncated
        assert len(result.log) <= 50

    def test_ops_accumulate_on_session_total(self):
        s = Session()
        ok(s, "x = 1")
        first = s.ops_used_total
        ok(s, "y = x + 1")
        assert s.ops_used_total > first

    def test_sum_over_huge_range_halts(self):
        limits = ResourceLimits(max_ops=10_000)
        result = execute(Session(), "sum(range(10 ** 12))", limits)
        assert result.status == "resource_exhausted"


class TestDatasetRegistration:
    def payload(self):
        from opendataqa.catalog import DatasetPayload, FieldDescriptor

        return DatasetPayload(
            columns=[FieldDescriptor("name", "text"), FieldDescriptor("n", "integer")],
            rows=[(f"row{i}", i) for i in range(100)],
        )

    def test_register_and_len(self):
        s = Session()
        s.register_dataset("parkplaetze", self.payload())
        assert ok(s, "len(parkplaetze)").value == "100"

    def test_name_collision(self):
        s = Session()
        s.register_dataset("data", self.payload())
        with pytest.raises(NameCollision):
            s.register_dataset("data", self.payload())

    def test_invalid_identifier(self):
        s = Session()
        with pytest.raises(InvalidIdentifier):
            s.register_dataset("2x", self.payload())
        with pytest.raises(InvalidIdentifier):
            s.register_dataset("while", self.payload())

    def test_collision_with_builtin(self):
        s = Session()
        with pytest.raises(NameCollision):
            s.register_dataset("print", self.payload())


class TestArithmeticAgainstPython:
    """Property: closed integer arithmetic matches the host language."""

    from hypothesis import given, settings
    from hypothesis import strategies as st

    @staticmethod
    def exprs():
        from hypothesis import strategies as st

        atoms = st.integers(min_value=-50, max_value=50).map(str)

        def combine(children):
            ops = st.sampled_from(["+", "-", "*"])
            return st.tuples(children, ops, children).map(
                lambda t: f"({t[0]} {t[1]} {t[2]})"
            )

        return st.recursive(atoms, combine, max_leaves=12)

    @given(exprs.__func__())
    @settings(max_examples=150)
    def test_matches_python_eval(self, source):
        result = execute(Session(), source)
        assert result.status == "ok", result.error_message
        assert result.value == repr(eval(source))  # same integer semantics


class TestDeterminism:
    def test_same_history_same_result(self):
        def transcript():
            s = Session()
            outs = []
            for src in ("x = [3, 1, 2]", "x.sort()", "print(x)", "sum(x) * 2"):
                r = execute(s, src)
                outs.append((r.status, r.log, r.value, r.ops_used))
            return outs

        assert transcript() == transcript()
