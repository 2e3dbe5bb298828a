"""Tree-walking evaluator for the analysis language.

Security model: code can only reach values bound in its session
environment; there is no file, network, clock, environment, or process
primitive anywhere in the reachable surface.  Imports are allowlisted,
attribute access goes through per-type tables, names starting with an
underscore are never resolvable, and every node evaluation charges an
elementary-operation counter that hard-stops runaway code.
"""
from __future__ import annotations

from datetime import date

from .. import geometry
from ..catalog import DatasetPayload
from ..errors import InvalidIdentifier, NameCollision
from . import stdlib
from .artifacts import Artifact
from .parser import (
    Assign,
    Attribute,
    AugAssign,
    BinOp,
    BoolOp,
    Break,
    Call,
    Compare,
    Comprehension,
    Continue,
    DictExpr,
    ExprStmt,
    For,
    FromImport,
    FString,
    FuncDef,
    If,
    Import,
    ListExpr,
    Literal,
    Name,
    ParseError,
    Pass,
    Program,
    Return,
    SliceExpr,
    Subscript,
    Ternary,
    TupleExpr,
    UnaryOp,
    UnsupportedConstruct,
    While,
    parse,
)
from .runtime import (
    BreakSignal,
    ContinueSignal,
    ExecutionResult,
    FinalAnswerSignal,
    OpsExceeded,
    ResourceLimits,
    ReturnSignal,
    SandboxError,
)
from .tokens import KEYWORDS, RESERVED_UNSUPPORTED
from .values import (
    BoundMethod,
    Builtin,
    Frame,
    GeocodeMiss,
    Grouped,
    Module,
    Row,
    UserFunction,
    render_plain,
    render_repr,
    type_name,
)

_MAX_CALL_DEPTH = 64


class Env:
    __slots__ = ("bindings", "parent")

    def __init__(self, parent: "Env | None" = None):
        self.bindings: dict = {}
        self.parent = parent

    def lookup(self, name: str):
        env: Env | None = self
        while env is not None:
            if name in env.bindings:
                return env.bindings[name]
            env = env.parent
        raise SandboxError("NameUndefined", f"name {name!r} is not defined")

    def assign(self, name: str, value) -> None:
        self.bindings[name] = value

    def names(self) -> set:
        out: set = set()
        env: Env | None = self
        while env is not None:
            out |= set(env.bindings)
            env = env.parent
        return out


def frame_from_payload(payload: DatasetPayload) -> Frame:
    """Convert a catalog payload into a sandbox frame (dates become ISO
    strings so the sandbox value domain stays closed)."""
    rows = []
    for row in payload.rows:
        rows.append(tuple(v.isoformat() if isinstance(v, date) else v for v in row))
    return Frame(payload.column_names(), rows, payload.crs)


class Session:
    """Persistent per-conversation environment.

    Bindings survive across execute() calls; registered modules are fixed
    at construction.  One session must only be used from one thread at a
    time; distinct sessions are fully isolated.
    """

    def __init__(
        self,
        limits: ResourceLimits | None = None,
        gazetteer: dict | None = None,
        gazetteer_crs: str | None = None,
    ):
        self.limits = limits or ResourceLimits()
        self.globals = Env()
        self.modules: dict[str, Module] = {}
        self.datasets: dict[str, Frame] = {}
        self.ops_used_total = 0
        if gazetteer is None:
            places, crs = stdlib.load_default_gazetteer()
        else:
            places = {str(k).strip().casefold(): tuple(v) for k, v in gazetteer.items()}
            crs = gazetteer_crs or geometry.DEFAULT_CRS
        self.gazetteer = places
        self.gazetteer_crs = crs
        stdlib.install(self)

    def register_dataset(self, name: str, payload: DatasetPayload | Frame) -> None:
        if not isinstance(name, str) or not name.isidentifier():
            raise InvalidIdentifier(name)
        if name in KEYWORDS or name in RESERVED_UNSUPPORTED:
            raise InvalidIdentifier(name)
        if name in self.datasets or name in self.globals.bindings:
            raise NameCollision(name)
        frame = payload if isinstance(payload, Frame) else frame_from_payload(payload)
        self.datasets[name] = frame
        self.globals.assign(name, frame)

    def reachable_names(self) -> set:
        """Every dotted name reachable from a fresh session, for the
        capability-soundness check."""
        names = set(self.globals.bindings)
        for mod in self.modules.values():
            names |= {f"{mod.name}.{member}" for member in mod.members}
        return names


class Interpreter:
    """State for one execute() call; the session outlives it."""

    def __init__(self, session: Session, limits: ResourceLimits):
        self.session = session
        self.limits = limits
        self.ops_used = 0
        self._log_chunks: list[str] = []
        self._log_len = 0
        self.output_truncated = False
        self.artifacts: list[Artifact] = []
        self.call_depth = 0
        self.current_line = 0

    # -- resources -----------------------------------------------------------

    def charge(self, n: int = 1) -> None:
        self.ops_used += n
        if self.ops_used >= self.limits.max_ops:
            raise OpsExceeded()

    def check_collection(self, length: int) -> None:
        if length > self.limits.max_collection_len:
            raise SandboxError(
                "CollectionTooLarge",
                f"collection of {length} elements exceeds the limit of "
                f"{self.limits.max_collection_len}",
            )

    def write_log(self, text: str) -> None:
        budget = self.limits.max_output_chars - self._log_len
        if budget <= 0:
            self.output_truncated = True
            return
        if len(text) > budget:
            text = text[:budget]
            self.output_truncated = True
        self._log_chunks.append(text)
        self._log_len += len(text)

    def log(self) -> str:
        return "".join(self._log_chunks)

    def emit_artifact(self, artifact: Artifact) -> None:
        self.artifacts.append(artifact)

    # -- shared helpers --------------------------------------------------------

    def truthy(self, value) -> bool:
        if isinstance(value, (Frame, Grouped)):
            return len(value) > 0
        if isinstance(value, GeocodeMiss):
            return False
        if value is None or isinstance(value, (bool, int, float, str, list, tuple, dict, range, Row)):
            return bool(value)
        return True

    def iterate(self, value, what: str = "value"):
        if isinstance(value, (list, tuple, str, range)):
            return self._charged_iter(value)
        if isinstance(value, dict):
            return self._charged_iter(list(value.keys()))
        if isinstance(value, Frame):
            return self._charged_iter([value.row(i) for i in range(len(value))])
        if isinstance(value, Grouped):
            return self._charged_iter(list(value.groups.keys()))
        raise SandboxError("TypeMismatch", f"{what}: {type_name(value)} is not iterable")

    def _charged_iter(self, seq):
        for item in seq:
            self.charge(1)
            yield item

    def call_function(self, fn, args: list, kwargs: dict):
        self.charge(1)
        if isinstance(fn, Builtin):
            return fn.fn(self, args, kwargs)
        if isinstance(fn, BoundMethod):
            return fn.fn(self, fn.self_value, args, kwargs)
        if isinstance(fn, UserFunction):
            return self._call_user_function(fn, args, kwargs)
        raise SandboxError("TypeMismatch", f"{type_name(fn)} is not callable")

    def _call_user_function(self, fn: UserFunction, args: list, kwargs: dict):
        if self.call_depth >= _MAX_CALL_DEPTH:
            raise SandboxError(
                "RecursionTooDeep", f"call depth exceeds {_MAX_CALL_DEPTH} frames"
            )
        env = Env(parent=fn.closure)
        param_names = [p[0] for p in fn.params]
        if len(args) > len(param_names):
            raise SandboxError(
                "TypeMismatch",
                f"{fn.name}() takes {len(param_names)} arguments, got {len(args)}",
            )
        bound = dict(zip(param_names, args))
        for key, value in kwargs.items():
            if key not in param_names:
                raise SandboxError(
                    "TypeMismatch", f"{fn.name}() got an unexpected keyword argument {key!r}"
                )
            if key in bound:
                raise SandboxError(
                    "TypeMismatch", f"{fn.name}() got multiple values for {key!r}"
                )
            bound[key] = value
        for pname, has_default, default in fn.params:
            if pname not in bound:
                if not has_default:
                    raise SandboxError(
                        "TypeMismatch", f"{fn.name}() missing required argument {pname!r}"
                    )
                bound[pname] = default
        for pname, value in bound.items():
            env.assign(pname, value)
        self.call_depth += 1
        try:
            self.exec_block(fn.body, env)
        except ReturnSignal as sig:
            return sig.value
        finally:
            self.call_depth -= 1
        return None

    # -- statements ------------------------------------------------------------

    def run(self, program: Program):
        """Execute top-level statements; returns the value of a trailing
        expression statement (notebook semantics) or None."""
        body = program.body
        last_value = None
        for i, stmt in enumerate(body):
            value = self.exec_stmt(stmt, self.session.globals)
            if i == len(body) - 1 and isinstance(stmt, ExprStmt):
                last_value = value
        return last_value

    def exec_block(self, body: tuple, env: Env) -> None:
        for stmt in body:
            self.exec_stmt(stmt, env)

    def exec_stmt(self, stmt, env: Env):
        self.current_line = stmt.line
        self.charge(1)
        method = self._STMT_DISPATCH[type(stmt)]
        return method(self, stmt, env)

    def _exec_expr_stmt(self, stmt: ExprStmt, env: Env):
        return self.eval(stmt.expr, env)

    def _exec_assign(self, stmt: Assign, env: Env):
        value = self.eval(stmt.value, env)
        self.assign_target(stmt.target, value, env)

    def _exec_aug_assign(self, stmt: AugAssign, env: Env):
        current = self.eval(stmt.target, env)
        delta = self.eval(stmt.value, env)
        value = self.binary_op(stmt.op, current, delta)
        self.assign_target(stmt.target, value, env)

    def assign_target(self, target, value, env: Env) -> None:
        if isinstance(target, Name):
            env.assign(target.id, value)
            return
        if isinstance(target, Subscript):
            obj = self.eval(target.obj, env)
            key = self.eval(target.index, env)
            self.charge(1)
            if isinstance(obj, list):
                if isinstance(key, bool) or not isinstance(key, int):
                    raise SandboxError("TypeMismatch", "list index must be an integer")
                try:
                    obj[key] = value
                except IndexError:
                    raise SandboxError(
                        "IndexOutOfRange",
                        f"list index {key} out of range (length {len(obj)})",
                    ) from None
                return
            if isinstance(obj, dict):
                try:
                    hash(key)
                except TypeError:
                    raise SandboxError("TypeMismatch", "dict key is not hashable") from None
                obj[key] = value
                self.check_collection(len(obj))
                return
            raise SandboxError(
                "TypeMismatch", f"cannot assign into a {type_name(obj)}"
            )
        if isinstance(target, TupleExpr):
            items = self._unpack(value, len(target.items))
            for sub, item in zip(target.items, items):
                self.assign_target(sub, item, env)
            return
        raise SandboxError("TypeMismatch", "invalid assignment target")

    def _unpack(self, value, expected: int) -> list:
        if isinstance(value, (list, tuple)):
            items = list(value)
        elif isinstance(value, Row):
            items = list(value.values)
        else:
            raise SandboxError(
                "TypeMismatch", f"cannot unpack {type_name(value)} into {expected} names"
            )
        if len(items) != expected:
            raise SandboxError(
                "TypeMismatch", f"expected {expected} values to unpack, got {len(items)}"
            )
        return items

    def _exec_if(self, stmt: If, env: Env):
        for condition, body in stmt.branches:
            if condition is None or self.truthy(self.eval(condition, env)):
                self.exec_block(body, env)
                return

    def _exec_while(self, stmt: While, env: Env):
        while True:
            self.charge(1)
            if not self.truthy(self.eval(stmt.condition, env)):
                return
            try:
                self.exec_block(stmt.body, env)
            except BreakSignal:
                return
            except ContinueSignal:
                continue

    def _exec_for(self, stmt: For, env: Env):
        iterable = self.eval(stmt.iterable, env)
        for item in self.iterate(iterable, "for loop"):
            self.assign_target(stmt.target, item, env)
            try:
                self.exec_block(stmt.body, env)
            except BreakSignal:
                return
            except ContinueSignal:
                continue

    def _exec_func_def(self, stmt: FuncDef, env: Env):
        params = []
        for pname, default_expr in stmt.params:
            if default_expr is None:
                params.append((pname, False, None))
            else:
                params.append((pname, True, self.eval(default_expr, env)))
        env.assign(stmt.name, UserFunction(stmt.name, tuple(params), stmt.body, env))

    def _exec_return(self, stmt: Return, env: Env):
        value = self.eval(stmt.value, env) if stmt.value is not None else None
        raise ReturnSignal(value)

    def _exec_break(self, stmt: Break, env: Env):
        raise BreakSignal()

    def _exec_continue(self, stmt: Continue, env: Env):
        raise ContinueSignal()

    def _exec_pass(self, stmt: Pass, env: Env):
        return None

    def _exec_import(self, stmt: Import, env: Env):
        module = stmt.module
        if module in self.session.modules:
            env.assign(stmt.alias or module, self.session.modules[module])
            return
        root = module.split(".", 1)[0]
        if root in self.session.modules:
            raise SandboxError(
                "SubmoduleAccessDenied",
                f"submodule access to {module!r} is barred; the registered module is {root!r}",
            )
        raise SandboxError(
            "ImportDenied",
            f"import of {module!r} is denied; registered modules: "
            + ", ".join(sorted(self.session.modules)),
        )

    def _exec_from_import(self, stmt: FromImport, env: Env):
        module = stmt.module
        if module not in self.session.modules:
            root = module.split(".", 1)[0]
            if root in self.session.modules:
                raise SandboxError(
                    "SubmoduleAccessDenied",
                    f"submodule access to {module!r} is barred; the registered module is {root!r}",
                )
            raise SandboxError(
                "ImportDenied",
                f"import from {module!r} is denied; registered modules: "
                + ", ".join(sorted(self.session.modules)),
            )
        mod = self.session.modules[module]
        for name, alias in stmt.names:
            if name not in mod.members:
                raise SandboxError(
                    "SubmoduleAccessDenied", f"{module}.{name} is not an accessible member"
                )
            env.assign(alias or name, mod.members[name])

    # -- expressions -------------------------------------------------------------

    def eval(self, node, env: Env):
        self.charge(1)
        method = self._EXPR_DISPATCH[type(node)]
        return method(self, node, env)

    def _eval_literal(self, node: Literal, env: Env):
        return node.value

    def _eval_fstring(self, node: FString, env: Env):
        chunks = []
        for part in node.parts:
            if isinstance(part, str):
                chunks.append(part)
                continue
            expr, spec = part
            value = self.eval(expr, env)
            if spec:
                if not isinstance(value, (int, float, str)) or isinstance(value, bool):
                    if not isinstance(value, bool):
                        raise SandboxError(
                            "TypeMismatch",
                            f"format spec {spec!r} unsupported for {type_name(value)}",
                        )
                try:
                    chunks.append(format(value, spec))
                except (ValueError, TypeError) as exc:
                    raise SandboxError("TypeMismatch", f"bad format spec {spec!r}: {exc}") from None
            else:
                chunks.append(render_plain(value))
        out = "".join(chunks)
        self.check_collection(len(out))
        return out

    def _eval_name(self, node: Name, env: Env):
        return env.lookup(node.id)

    def _eval_list(self, node: ListExpr, env: Env):
        self.check_collection(len(node.items))
        return [self.eval(item, env) for item in node.items]

    def _eval_tuple(self, node: TupleExpr, env: Env):
        return tuple(self.eval(item, env) for item in node.items)

    def _eval_dict(self, node: DictExpr, env: Env):
        out = {}
        for key_node, value_node in node.pairs:
            key = self.eval(key_node, env)
            try:
                hash(key)
            except TypeError:
                raise SandboxError("TypeMismatch", "dict key is not hashable") from None
            out[key] = self.eval(value_node, env)
        return out

    def _eval_comprehension(self, node: Comprehension, env: Env):
        iterable = self.eval(node.iterable, env)
        scope = Env(parent=env)
        out = []
        for item in self.iterate(iterable, "comprehension"):
            self.assign_target(node.target, item, scope)
            if node.condition is not None and not self.truthy(self.eval(node.condition, scope)):
                continue
            out.append(self.eval(node.expr, scope))
            self.check_collection(len(out))
        return out

    def _eval_ternary(self, node: Ternary, env: Env):
        if self.truthy(self.eval(node.condition, env)):
            return self.eval(node.then, env)
        return self.eval(node.orelse, env)

    def _eval_bool_op(self, node: BoolOp, env: Env):
        if node.op == "and":
            value = True
            for sub in node.values:
                value = self.eval(sub, env)
                if not self.truthy(value):
                    return value
            return value
        value = False
        for sub in node.values:
            value = self.eval(sub, env)
            if self.truthy(value):
                return value
        return value

    def _eval_unary(self, node: UnaryOp, env: Env):
        value = self.eval(node.operand, env)
        if node.op == "not":
            return not self.truthy(value)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SandboxError(
                "TypeMismatch", f"unary {node.op!r} needs a number, got {type_name(value)}"
            )
        return -value if node.op == "-" else +value

    def _eval_binop(self, node: BinOp, env: Env):
        left = self.eval(node.left, env)
        right = self.eval(node.right, env)
        return self.binary_op(node.op, left, right)

    @staticmethod
    def _is_number(value) -> bool:
        return isinstance(value, (int, float)) and not isinstance(value, bool)

    def binary_op(self, op: str, a, b):
        num_a, num_b = self._is_number(a), self._is_number(b)
        if op == "+":
            if num_a and num_b:
                return a + b
            if isinstance(a, str) and isinstance(b, str):
                self.check_collection(len(a) + len(b))
                self.charge(max(1, (len(a) + len(b)) // 64))
                return a + b
            if isinstance(a, list) and isinstance(b, list):
                self.check_collection(len(a) + len(b))
                self.charge(max(1, (len(a) + len(b)) // 16))
                return a + b
            if isinstance(a, tuple) and isinstance(b, tuple):
                self.check_collection(len(a) + len(b))
                return a + b
            raise SandboxError(
                "TypeMismatch", f"cannot add {type_name(a)} and {type_name(b)}"
            )
        if op == "-":
            if num_a and num_b:
                return a - b
            raise SandboxError(
                "TypeMismatch", f"cannot subtract {type_name(b)} from {type_name(a)}"
            )
        if op == "*":
            if num_a and num_b:
                return a * b
            seq, count = (a, b) if isinstance(b, int) and not isinstance(b, bool) else (b, a)
            if isinstance(seq, (str, list, tuple)) and isinstance(count, int) and not isinstance(count, bool):
                total = len(seq) * max(0, count)
                self.check_collection(total)
                self.charge(max(1, total // 64))
                return seq * count
            raise SandboxError(
                "TypeMismatch", f"cannot multiply {type_name(a)} and {type_name(b)}"
            )
        if op in ("/", "//", "%"):
            if not (num_a and num_b):
                raise SandboxError(
                    "TypeMismatch", f"cannot apply {op!r} to {type_name(a)} and {type_name(b)}"
                )
            try:
                if op == "/":
                    return a / b
                if op == "//":
                    return a // b
                return a % b
            except ZeroDivisionError:
                raise SandboxError("DivisionByZero", "division by zero") from None
        if op == "**":
            if not (num_a and num_b):
                raise SandboxError(
                    "TypeMismatch", f"cannot raise {type_name(a)} to {type_name(b)}"
                )
            if isinstance(a, int) and isinstance(b, int) and b > 0:
                bits = b * max(1, abs(a).bit_length())
                if bits > 4_000_000:
                    raise SandboxError(
                        "CollectionTooLarge", "integer power result would be too large"
                    )
                self.charge(max(1, bits // 4096))
            try:
                return a**b
            except OverflowError:
                raise SandboxError("TypeMismatch", "numeric result too large") from None
            except ZeroDivisionError:
                raise SandboxError("DivisionByZero", "zero to a negative power") from None
        raise SandboxError("TypeMismatch", f"unknown operator {op!r}")

    def _compare_once(self, op: str, a, b) -> bool:
        if op == "==":
            return a == b
        if op == "!=":
            return a != b
        if op == "is":
            return a is b
        if op == "is not":
            return a is not b
        if op in ("in", "not in"):
            result = self._membership(a, b)
            return result if op == "in" else not result
        try:
            if op == "<":
                return a < b
            if op == "<=":
                return a <= b
            if op == ">":
                return a > b
            if op == ">=":
                return a >= b
        except TypeError:
            raise SandboxError(
                "TypeMismatch",
                f"cannot compare {type_name(a)} and {type_name(b)} with {op!r}",
            ) from None
        raise SandboxError("TypeMismatch", f"unknown comparison {op!r}")

    def _membership(self, item, container) -> bool:
        if isinstance(container, str):
            if not isinstance(item, str):
                raise SandboxError("TypeMismatch", "'in' on a string needs a string")
            self.charge(max(1, len(container) // 64))
            return item in container
        if isinstance(container, (list, tuple, range)):
            self.charge(max(1, len(container) // 16))
            try:
                return item in container
            except TypeError:
                return False
        if isinstance(container, dict):
            try:
                return item in container
            except TypeError:
                raise SandboxError("TypeMismatch", "dict key is not hashable") from None
        if isinstance(container, Grouped):
            return item in container.groups
        raise SandboxError(
            "TypeMismatch", f"'in' unsupported for {type_name(container)}"
        )

    def _eval_compare(self, node: Compare, env: Env):
        left = self.eval(node.first, env)
        for op, right_node in node.rest:
            right = self.eval(right_node, env)
            if not self._compare_once(op, left, right):
                return False
            left = right
        return True

    def _eval_subscript(self, node: Subscript, env: Env):
        obj = self.eval(node.obj, env)
        key = self.eval(node.index, env)
        return self.subscript(obj, key)

    def subscript(self, obj, key):
        self.charge(1)
        if isinstance(obj, (list, tuple, str, range)):
            if isinstance(key, bool) or not isinstance(key, int):
                raise SandboxError(
                    "TypeMismatch", f"{type_name(obj)} index must be an integer"
                )
            try:
                return obj[key]
            except IndexError:
                raise SandboxError(
                    "IndexOutOfRange",
                    f"{type_name(obj)} index {key} out of range (length {len(obj)})",
                ) from None
        if isinstance(obj, dict):
            try:
                return obj[key]
            except KeyError:
                raise SandboxError(
                    "IndexOutOfRange", f"key {render_repr(key)} not found"
                ) from None
            except TypeError:
                raise SandboxError("TypeMismatch", "dict key is not hashable") from None
        if isinstance(obj, Frame):
            if isinstance(key, str):
                try:
                    column = obj.column(key)
                except KeyError:
                    raise SandboxError(
                        "IndexOutOfRange",
                        f"column {key!r} not found; available: {', '.join(obj.columns)}",
                    ) from None
                self.charge(len(column))
                return column
            if isinstance(key, int) and not isinstance(key, bool):
                try:
                    return obj.row(key)
                except IndexError:
                    raise SandboxError(
                        "IndexOutOfRange",
                        f"frame row {key} out of range (length {len(obj)})",
                    ) from None
            raise SandboxError(
                "TypeMismatch", "frame subscript must be a column name or row index"
            )
        if isinstance(obj, Row):
            if isinstance(key, str):
                try:
                    return obj.get(key)
                except KeyError:
                    raise SandboxError(
                        "IndexOutOfRange",
                        f"column {key!r} not found; available: {', '.join(obj.columns)}",
                    ) from None
            if isinstance(key, int) and not isinstance(key, bool):
                try:
                    return obj.values[key]
                except IndexError:
                    raise SandboxError("IndexOutOfRange", f"row index {key} out of range") from None
            raise SandboxError("TypeMismatch", "row subscript must be a column name or index")
        if isinstance(obj, Grouped):
            try:
                return obj.groups[key]
            except KeyError:
                raise SandboxError(
                    "IndexOutOfRange", f"group {render_repr(key)} not found"
                ) from None
            except TypeError:
                raise SandboxError("TypeMismatch", "group key is not hashable") from None
        raise SandboxError("TypeMismatch", f"{type_name(obj)} is not subscriptable")

    def _eval_slice(self, node: SliceExpr, env: Env):
        obj = self.eval(node.obj, env)
        parts = []
        for sub in (node.lower, node.upper, node.step):
            if sub is None:
                parts.append(None)
            else:
                value = self.eval(sub, env)
                if isinstance(value, bool) or not isinstance(value, (int, type(None))):
                    raise SandboxError("TypeMismatch", "slice bounds must be integers")
                parts.append(value)
        if parts[2] == 0:
            raise SandboxError("TypeMismatch", "slice step must not be zero")
        sl = slice(*parts)
        if isinstance(obj, (list, tuple, str, range)):
            out = obj[sl]
            self.charge(max(1, len(out) // 16))
            return list(out) if isinstance(obj, range) else out
        if isinstance(obj, Frame):
            rows = obj.rows[sl]
            self.charge(max(1, len(rows)))
            return Frame(obj.columns, rows, obj.crs)
        raise SandboxError("TypeMismatch", f"{type_name(obj)} does not support slicing")

    def _eval_attribute(self, node: Attribute, env: Env):
        obj = self.eval(node.obj, env)
        name = node.name
        if name.startswith("_"):
            raise SandboxError(
                "TypeMismatch", "attribute access to names starting with '_' is not allowed"
            )
        if isinstance(obj, Module):
            if name in obj.members:
                return obj.members[name]
            raise SandboxError(
                "SubmoduleAccessDenied",
                f"{obj.name}.{name} is not an accessible member; available: "
                + ", ".join(sorted(obj.members)),
            )
        attrs = stdlib.value_attributes(obj)
        if name in attrs:
            return attrs[name]
        table = stdlib.METHOD_TABLES.get(type(obj))
        if table and name in table:
            return BoundMethod(name, table[name], obj)
        raise SandboxError(
            "TypeMismatch", f"{type_name(obj)} has no attribute {name!r}"
        )

    def _eval_call(self, node: Call, env: Env):
        fn = self.eval(node.func, env)
        args = [self.eval(arg, env) for arg in node.args]
        kwargs = {name: self.eval(value, env) for name, value in node.kwargs}
        try:
            return self.call_function(fn, args, kwargs)
        except SandboxError as exc:
            if exc.line is None:
                exc.line = node.line
            raise

    _STMT_DISPATCH = {
        ExprStmt: _exec_expr_stmt,
        Assign: _exec_assign,
        AugAssign: _exec_aug_assign,
        If: _exec_if,
        While: _exec_while,
        For: _exec_for,
        FuncDef: _exec_func_def,
        Return: _exec_return,
        Break: _exec_break,
        Continue: _exec_continue,
        Pass: _exec_pass,
        Import: _exec_import,
        FromImport: _exec_from_import,
    }

    _EXPR_DISPATCH = {
        Literal: _eval_literal,
        FString: _eval_fstring,
        Name: _eval_name,
        ListExpr: _eval_list,
        TupleExpr: _eval_tuple,
        DictExpr: _eval_dict,
        Comprehension: _eval_comprehension,
        Ternary: _eval_ternary,
        BoolOp: _eval_bool_op,
        UnaryOp: _eval_unary,
        BinOp: _eval_binop,
        Compare: _eval_compare,
        Subscript: _eval_subscript,
        SliceExpr: _eval_slice,
        Attribute: _eval_attribute,
        Call: _eval_call,
    }


def execute(session: Session, source: str, limits: ResourceLimits | None = None) -> ExecutionResult:
    """Run one snippet in the session; never raises for in-language errors.

    Bindings made before a runtime error persist (incremental notebook
    semantics), so a model can correct itself in the next snippet.
    """
    limits = limits or session.limits
    try:
        program = parse(source)
    except UnsupportedConstruct as exc:
        return ExecutionResult(
            status="syntax_error",
            error_message=f"UnsupportedConstruct: {exc.message} (line {exc.line})",
        )
    except ParseError as exc:
        return ExecutionResult(status="syntax_error", error_message=f"SyntaxError: {exc}")

    interp = Interpreter(session, limits)
    status = "ok"
    error_message = None
    value_rendered = None
    final_answer = None
    try:
        last_value = interp.run(program)
        if last_value is not None:
            value_rendered = render_repr(last_value)
    except FinalAnswerSignal as sig:
        final_answer = sig.results
    except OpsExceeded:
        status = "resource_exhausted"
        error_message = (
            f"OperationCapExceeded: execution exceeded {limits.max_ops} elementary "
            f"operations (infinite loop?)"
        )
    except SandboxError as exc:
        status = "runtime_error"
        line = exc.line if exc.line is not None else interp.current_line
        where = f" (line {line})" if line else ""
        error_message = f"{exc.kind}: {exc.message}{where}"
    except BreakSignal:
        status = "runtime_error"
        error_message = "TypeMismatch: 'break' outside a loop"
    except ContinueSignal:
        status = "runtime_error"
        error_message = "TypeMismatch: 'continue' outside a loop"
    except ReturnSignal:
        status = "runtime_error"
        error_message = "TypeMismatch: 'return' outside a function"
    except RecursionError:
        status = "runtime_error"
        error_message = "RecursionTooDeep: evaluation nested too deeply"

    session.ops_used_total += interp.ops_used
    return ExecutionResult(
        status=status,
        log=interp.log(),
        value=value_rendered,
        error_message=error_message,
        ops_used=interp.ops_used,
        artifacts=interp.artifacts,
        final_answer=final_answer,
        output_truncated=interp.output_truncated,
    )
