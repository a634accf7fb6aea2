"""Reader for the PDDL subset (grammar in docs/pddl_grammar.md).

Durative actions are normalized into plain actions on the way in: every
timed condition becomes a precondition, every timed effect an effect, and the
duration becomes the action cost unless the action increases ``total-cost``
itself.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import (
    ActionSchema,
    Atom,
    BinOp,
    Comparison,
    Domain,
    Expr,
    FluentTerm,
    Literal,
    Num,
    NumericEffect,
    Parameter,
    PredicateDecl,
    Problem,
    is_variable,
)

KNOWN_REQUIREMENTS = frozenset({
    ":strips", ":typing", ":negative-preconditions", ":numeric-fluents", ":fluents",
    ":action-costs", ":durative-actions",
})
COMPARISON_OPS = (">=", "<=", ">", "<", "=")
ARITHMETIC_OPS = ("+", "-", "*", "/")
TOTAL_COST = "total-cost"
DURATION_VAR = "?duration"


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0, source: str = "<input>"):
        self.message = message
        self.line = line
        self.col = col
        self.source = source
        super().__init__(f"{source}:{line}:{col}: error: {message}")


@dataclass
class Token:
    text: str
    line: int
    col: int


class SList(list):
    """A parenthesized list that remembers where it opened."""

    def __init__(self, items, line: int, col: int):
        super().__init__(items)
        self.line = line
        self.col = col


def tokenize(text: str, source: str = "<input>") -> list[Token]:
    tokens = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch.isspace():
            col += 1
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            tokens.append(Token(ch, line, col))
            i += 1
            col += 1
        else:
            start, start_col = i, col
            while i < n and not text[i].isspace() and text[i] not in "();":
                i += 1
                col += 1
            tokens.append(Token(text[start:i], line, start_col))
    return tokens


def read_sexpr(text: str, source: str = "<input>"):
    tokens = tokenize(text, source)
    if not tokens:
        raise ParseError("empty input", 1, 1, source)
    stack: list[SList] = []
    result = None
    for tok in tokens:
        if tok.text == "(":
            stack.append(SList([], tok.line, tok.col))
        elif tok.text == ")":
            if not stack:
                raise ParseError("unbalanced ')'", tok.line, tok.col, source)
            done = stack.pop()
            if stack:
                stack[-1].append(done)
            elif result is None:
                result = done
            else:
                raise ParseError("unexpected content after end of definition", done.line, done.col, source)
        else:
            if not stack:
                raise ParseError(f"unexpected token {tok.text!r} outside parentheses", tok.line, tok.col, source)
            stack[-1].append(tok)
    if stack:
        raise ParseError("unclosed '('", stack[-1].line, stack[-1].col, source)
    return result


class _Reader:
    def __init__(self, source: str):
        self.source = source

    def error(self, message: str, node) -> ParseError:
        return ParseError(message, getattr(node, "line", 0), getattr(node, "col", 0), self.source)

    def word(self, node, what: str = "name") -> str:
        if not isinstance(node, Token):
            raise self.error(f"expected {what}", node)
        return node.text

    def keyword(self, node) -> str:
        return self.word(node, "keyword").lower()

    def expect_list(self, node, what: str) -> SList:
        if not isinstance(node, SList):
            raise self.error(f"expected {what}", node)
        return node

    def typed_list(self, items, allow_vars: bool) -> list[Parameter]:
        names: list[Token] = []
        out: list[Parameter] = []
        i = 0
        while i < len(items):
            tok = items[i]
            text = self.word(tok)
            if text == "-":
                if i + 1 >= len(items):
                    raise self.error("missing type after '-'", tok)
                type_tok = items[i + 1]
                if isinstance(type_tok, SList):
                    raise self.error("'either' types are not supported", type_tok)
                if not names:
                    raise self.error("type given without names", tok)
                out.extend(Parameter(t.text, type_tok.text) for t in names)
                names = []
                i += 2
                continue
            if allow_vars != is_variable(text):
                raise self.error(("expected a variable, got " if allow_vars else "unexpected variable ") + repr(text), tok)
            names.append(tok)
            i += 1
        out.extend(Parameter(t.text, "object") for t in names)
        return out


# -- domain ----------------------------------------------------------------

class _DomainReader(_Reader):
    def __init__(self, source: str):
        super().__init__(source)
        self.predicates: dict[str, PredicateDecl] = {}
        self.functions: dict[str, PredicateDecl] = {}
        self.types: dict[str, str] = {}
        self.constants: dict[str, str] = {}

    def read(self, tree) -> Domain:
        if not isinstance(tree, SList) or len(tree) < 2 or self.keyword(tree[0]) != "define":
            raise self.error("expected (define (domain NAME) ...)", tree)
        head = self.expect_list(tree[1], "(domain NAME)")
        if len(head) != 2 or self.keyword(head[0]) != "domain":
            raise self.error("expected (domain NAME)", head)
        name = self.word(head[1])
        requirements: list[str] = []
        actions: list[ActionSchema] = []
        constants: list[Parameter] = []
        types: list[tuple[str, str]] = []
        for section in tree[2:]:
            section = self.expect_list(section, "a domain section")
            if not section:
                raise self.error("empty section", section)
            key = self.keyword(section[0])
            if key == ":requirements":
                for tok in section[1:]:
                    flag = self.keyword(tok)
                    if flag not in KNOWN_REQUIREMENTS:
                        raise self.error(f"unknown requirement flag {flag}", tok)
                    requirements.append(flag)
            elif key == ":types":
                for p in self.typed_list(section[1:], allow_vars=False):
                    if p.name in self.types:
                        raise self.error(f"duplicate type {p.name}", section)
                    self.types[p.name] = p.type
                    types.append((p.name, p.type))
                for parent in list(self.types.values()):
                    if parent != "object" and parent not in self.types:
                        raise self.error(f"undeclared parent type {parent}", section)
            elif key == ":constants":
                for p in self.typed_list(section[1:], allow_vars=False):
                    self.check_type(p.type, section)
                    if p.name in self.constants:
                        raise self.error(f"duplicate constant {p.name}", section)
                    self.constants[p.name] = p.type
                    constants.append(p)
            elif key == ":predicates":
                for decl in section[1:]:
                    d = self.declaration(decl)
                    if d.name in self.predicates:
                        raise self.error(f"duplicate predicate {d.name}", decl)
                    self.predicates[d.name] = d
            elif key == ":functions":
                items = list(section[1:])
                i = 0
                while i < len(items):
                    d = self.declaration(items[i])
                    if d.name in self.functions:
                        raise self.error(f"duplicate function {d.name}", items[i])
                    self.functions[d.name] = d
                    i += 1
                    if i < len(items) and isinstance(items[i], Token) and items[i].text == "-":
                        if i + 1 >= len(items) or self.word(items[i + 1]).lower() != "number":
                            raise self.error("only numeric functions are supported", items[i])
                        i += 2
            elif key == ":action":
                actions.append(self.action(section))
            elif key == ":durative-action":
                actions.append(self.durative_action(section))
            else:
                raise self.error(f"unsupported domain section {key}", section)
        seen = set()
        for a in actions:
            if a.name in seen:
                raise ParseError(f"duplicate action {a.name}", a.line, a.col, self.source)
            seen.add(a.name)
        if TOTAL_COST not in self.functions and any(a.cost is not None for a in actions):
            # durations turned into costs need the cost fluent even if it was never declared
            self.functions[TOTAL_COST] = PredicateDecl(TOTAL_COST, ())
        return Domain(
            name=name,
            requirements=tuple(requirements),
            types=tuple(types),
            constants=tuple(constants),
            predicates=tuple(self.predicates.values()),
            functions=tuple(self.functions.values()),
            actions=tuple(actions),
            source=self.source,
        )

    def check_type(self, t: str, node) -> None:
        if t != "object" and t not in self.types:
            raise self.error(f"undeclared type {t}", node)

    def declaration(self, node) -> PredicateDecl:
        node = self.expect_list(node, "a declaration")
        if not node:
            raise self.error("empty declaration", node)
        params = self.typed_list(node[1:], allow_vars=True)
        for p in params:
            self.check_type(p.type, node)
        return PredicateDecl(self.word(node[0]), tuple(params))

    # actions

    def action(self, node) -> ActionSchema:
        if len(node) < 2:
            raise self.error("action without a name", node)
        name = self.word(node[1])
        fields = self.fields(node, {":parameters", ":precondition", ":effect"})
        params = self.parameters(fields.get(":parameters"))
        scope = {p.name: p.type for p in params}
        precondition = self.goal(fields[":precondition"], scope, timed=False) if ":precondition" in fields else []
        adds, dels, nums, costs = [], [], [], []
        if ":effect" in fields:
            self.effect(fields[":effect"], scope, adds, dels, nums, costs, timed=False)
        return ActionSchema(name, tuple(params), tuple(precondition), tuple(adds), tuple(dels),
                            tuple(nums), _sum(costs), line=node.line, col=node.col)

    def durative_action(self, node) -> ActionSchema:
        if len(node) < 2:
            raise self.error("action without a name", node)
        name = self.word(node[1])
        fields = self.fields(node, {":parameters", ":duration", ":condition", ":effect"})
        params = self.parameters(fields.get(":parameters"))
        scope = {p.name: p.type for p in params}
        duration = None
        if ":duration" in fields:
            d = self.expect_list(fields[":duration"], "(= ?duration EXPR)")
            if len(d) != 3 or self.word(d[0]) != "=" or self.word(d[1]) != DURATION_VAR:
                raise self.error("expected (= ?duration EXPR)", d)
            duration = self.expr(d[2], scope)
        precondition = self.goal(fields[":condition"], scope, timed=True) if ":condition" in fields else []
        adds, dels, nums, costs = [], [], [], []
        if ":effect" in fields:
            scope_d = dict(scope)
            scope_d[DURATION_VAR] = "number"
            self.effect(fields[":effect"], scope_d, adds, dels, nums, costs, timed=True)
            if duration is not None:
                nums = [NumericEffect(e.op, e.fluent, _substitute(e.expr, duration)) for e in nums]
                costs = [_substitute(c, duration) for c in costs]
        cost = _sum(costs)
        if cost is None:
            cost = duration
        return ActionSchema(name, tuple(params), tuple(precondition), tuple(adds), tuple(dels),
                            tuple(nums), cost, line=node.line, col=node.col)

    def fields(self, node, allowed: set[str]) -> dict:
        out = {}
        items = node[2:]
        if len(items) % 2:
            raise self.error("action fields must come in keyword/value pairs", node)
        for key_tok, value in zip(items[::2], items[1::2]):
            key = self.keyword(key_tok)
            if key not in allowed:
                raise self.error(f"unsupported action field {key}", key_tok)
            if key in out:
                raise self.error(f"duplicate field {key}", key_tok)
            out[key] = value
        return out

    def parameters(self, node) -> list[Parameter]:
        if node is None:
            return []
        node = self.expect_list(node, "a parameter list")
        params = self.typed_list(node, allow_vars=True)
        seen = set()
        for p in params:
            self.check_type(p.type, node)
            if p.name in seen:
                raise self.error(f"duplicate parameter {p.name}", node)
            seen.add(p.name)
        return params

    def term(self, tok, scope: dict, node) -> str:
        text = self.word(tok, "a term")
        if is_variable(text):
            if text not in scope:
                raise self.error(f"unbound variable {text}", tok)
        elif text not in self.constants:
            raise self.error(f"unknown constant {text}", tok)
        return text

    def atom(self, node, scope: dict) -> Atom:
        node = self.expect_list(node, "an atom")
        if not node:
            raise self.error("empty atom", node)
        name = self.word(node[0], "a predicate")
        decl = self.predicates.get(name)
        if decl is None:
            raise self.error(f"undeclared predicate {name}", node)
        if len(node) - 1 != len(decl.parameters):
            raise self.error(f"predicate {name} expects {len(decl.parameters)} arguments", node)
        return Atom(name, tuple(self.term(t, scope, node) for t in node[1:]))

    def goal(self, node, scope: dict, timed: bool) -> list:
        node = self.expect_list(node, "a condition")
        if not node:
            return []
        head = self.word(node[0], "a condition").lower()
        if head == "and":
            out = []
            for part in node[1:]:
                out.extend(self.goal(part, scope, timed))
            return out
        if _is_timed(node):
            if not timed:
                raise self.error("timed condition outside a durative action", node)
            if len(node) != 3:
                raise self.error("malformed timed condition", node)
            when = self.word(node[1]).lower()
            if (head, when) not in (("at", "start"), ("at", "end"), ("over", "all")):
                raise self.error(f"unknown time specifier {head} {when}", node)
            return self.goal(node[2], scope, timed=False)
        if head == "not":
            if len(node) != 2:
                raise self.error("'not' takes one argument", node)
            inner = self.expect_list(node[1], "an atom")
            if inner and isinstance(inner[0], Token) and inner[0].text in COMPARISON_OPS:
                raise self.error("negated comparisons are not supported", node)
            return [Literal(self.atom(inner, scope), False)]
        if head in COMPARISON_OPS:
            if len(node) != 3:
                raise self.error(f"comparison {head} takes two arguments", node)
            return [Comparison(head, self.expr(node[1], scope), self.expr(node[2], scope))]
        if head in ("or", "imply", "exists", "forall", "when"):
            raise self.error(f"'{head}' is not supported", node)
        return [Literal(self.atom(node, scope), True)]

    def expr(self, node, scope: dict) -> Expr:
        if isinstance(node, Token):
            if node.text == DURATION_VAR and DURATION_VAR in scope:
                return FluentTerm(DURATION_VAR)
            try:
                return Num(float(node.text))
            except ValueError:
                raise self.error(f"expected a number or expression, got {node.text!r}", node) from None
        if not node:
            raise self.error("empty expression", node)
        head = self.word(node[0], "an operator or function")
        if head in ARITHMETIC_OPS:
            args = [self.expr(x, scope) for x in node[1:]]
            if head == "-" and len(args) == 1:
                return BinOp("-", Num(0.0), args[0])
            if len(args) < 2 or (len(args) > 2 and head not in "+*"):
                raise self.error(f"operator {head} needs two arguments", node)
            result = args[0]
            for a in args[1:]:
                result = BinOp(head, result, a)
            return result
        return self.fluent(node, scope)

    def fluent(self, node, scope: dict) -> FluentTerm:
        node = self.expect_list(node, "a function term")
        name = self.word(node[0], "a function")
        decl = self.functions.get(name)
        if decl is None:
            raise self.error(f"undeclared function {name}", node)
        if len(node) - 1 != len(decl.parameters):
            raise self.error(f"function {name} expects {len(decl.parameters)} arguments", node)
        return FluentTerm(name, tuple(self.term(t, scope, node) for t in node[1:]))

    def effect(self, node, scope, adds, dels, nums, costs, timed: bool) -> None:
        node = self.expect_list(node, "an effect")
        if not node:
            return
        head = self.word(node[0], "an effect").lower()
        if head == "and":
            for part in node[1:]:
                self.effect(part, scope, adds, dels, nums, costs, timed)
        elif _is_timed(node):
            if not timed:
                raise self.error("timed effect outside a durative action", node)
            if len(node) != 3 or self.word(node[1]).lower() not in ("start", "end"):
                raise self.error("malformed timed effect", node)
            self.effect(node[2], scope, adds, dels, nums, costs, timed=False)
        elif head == "not":
            if len(node) != 2:
                raise self.error("'not' takes one argument", node)
            dels.append(self.atom(node[1], scope))
        elif head in ("increase", "decrease", "assign", "scale-up", "scale-down"):
            if head.startswith("scale"):
                raise self.error(f"'{head}' is not supported", node)
            if len(node) != 3:
                raise self.error(f"{head} takes two arguments", node)
            target = self.fluent(node[1], scope)
            value = self.expr(node[2], scope)
            if target.name == TOTAL_COST:
                if head != "increase":
                    raise self.error("total-cost may only be increased", node)
                costs.append(value)
            else:
                nums.append(NumericEffect(head, target, value))
        elif head in ("forall", "when"):
            raise self.error(f"'{head}' is not supported", node)
        else:
            adds.append(self.atom(node, scope))


def _is_timed(node) -> bool:
    # a predicate may itself be called "at", so look at the shape too
    return (len(node) == 3 and isinstance(node[0], Token) and node[0].text.lower() in ("at", "over")
            and isinstance(node[1], Token) and node[1].text.lower() in ("start", "end", "all")
            and not isinstance(node[2], Token))


def _sum(exprs: list) -> Expr | None:
    if not exprs:
        return None
    result = exprs[0]
    for e in exprs[1:]:
        result = BinOp("+", result, e)
    return result


def _substitute(expr: Expr, duration: Expr) -> Expr:
    if isinstance(expr, FluentTerm) and expr.name == DURATION_VAR:
        return duration
    if isinstance(expr, BinOp):
        return BinOp(expr.op, _substitute(expr.left, duration), _substitute(expr.right, duration))
    return expr


def parse_domain(text: str, source: str = "<domain>") -> Domain:
    tree = read_sexpr(text, source)
    return _DomainReader(source).read(tree)


# -- problem ---------------------------------------------------------------

class _ProblemReader(_Reader):
    def __init__(self, source: str, domain: Domain | None):
        super().__init__(source)
        self.domain = domain
        self.objects: dict[str, str] = {}
        if domain is not None:
            self.objects.update({c.name: c.type for c in domain.constants})

    def read(self, tree) -> Problem:
        if not isinstance(tree, SList) or len(tree) < 2 or self.keyword(tree[0]) != "define":
            raise self.error("expected (define (problem NAME) ...)", tree)
        head = self.expect_list(tree[1], "(problem NAME)")
        if len(head) != 2 or self.keyword(head[0]) != "problem":
            raise self.error("expected (problem NAME)", head)
        name = self.word(head[1])
        sections = {}
        for section in tree[2:]:
            section = self.expect_list(section, "a problem section")
            if not section:
                raise self.error("empty section", section)
            key = self.keyword(section[0])
            if key not in (":domain", ":objects", ":init", ":goal", ":metric", ":requirements"):
                raise self.error(f"unsupported problem section {key}", section)
            if key in sections:
                raise self.error(f"duplicate section {key}", section)
            sections[key] = section
        if ":domain" not in sections or len(sections[":domain"]) != 2:
            raise self.error("missing (:domain NAME)", tree)
        domain_name = self.word(sections[":domain"][1])
        if self.domain is not None and domain_name != self.domain.name:
            raise self.error(f"problem is for domain {domain_name}, not {self.domain.name}", sections[":domain"])

        objects = []
        positions = {}
        if ":objects" in sections:
            for tok in sections[":objects"][1:]:
                if isinstance(tok, Token) and tok.text != "-":
                    positions.setdefault(tok.text, (tok.line, tok.col))
            for p in self.typed_list(sections[":objects"][1:], allow_vars=False):
                if self.domain is not None and p.type != "object" and p.type not in self.domain.type_parents():
                    raise self.error(f"object {p.name} has undeclared type {p.type}", sections[":objects"])
                if p.name in self.objects:
                    raise self.error(f"duplicate object {p.name}", sections[":objects"])
                self.objects[p.name] = p.type
                objects.append(p)

        init: set[Atom] = set()
        fluents: dict[FluentTerm, float] = {}
        if ":init" in sections:
            for item in sections[":init"][1:]:
                item = self.expect_list(item, "an init fact")
                if item and isinstance(item[0], Token) and item[0].text == "=":
                    if len(item) != 3:
                        raise self.error("expected (= (f ...) NUMBER)", item)
                    term = self.ground_fluent(item[1])
                    value = self.number(item[2])
                    if term in fluents:
                        raise self.error(f"fluent {term} initialized twice", item)
                    fluents[term] = value
                else:
                    init.add(self.ground_atom(item))

        goal = self.goal(sections[":goal"][1]) if ":goal" in sections and len(sections[":goal"]) > 1 else []

        metric = None
        if ":metric" in sections:
            m = sections[":metric"]
            if len(m) != 3 or self.keyword(m[1]) != "minimize":
                raise self.error("only (:metric minimize (total-cost)) is supported", m)
            target = self.expect_list(m[2], "(total-cost)")
            if len(target) != 1 or self.word(target[0]) != "total-cost":
                raise self.error("only (:metric minimize (total-cost)) is supported", m)
            metric = "total-cost"

        return Problem(name, domain_name, tuple(objects), frozenset(init), fluents, tuple(goal), metric,
                       source=self.source, positions=positions)

    def number(self, tok) -> float:
        try:
            return float(self.word(tok, "a number"))
        except ValueError:
            raise self.error(f"expected a number, got {tok.text!r}", tok) from None

    def obj(self, tok) -> str:
        text = self.word(tok, "an object")
        if is_variable(text):
            raise self.error(f"variable {text} in a ground context", tok)
        if text not in self.objects:
            raise self.error(f"undeclared object {text}", tok)
        return text

    def ground_atom(self, node) -> Atom:
        if not node:
            raise self.error("empty atom", node)
        name = self.word(node[0], "a predicate")
        if self.domain is not None:
            decl = {p.name: p for p in self.domain.predicates}.get(name)
            if decl is None:
                raise self.error(f"undeclared predicate {name}", node)
            if len(decl.parameters) != len(node) - 1:
                raise self.error(f"predicate {name} expects {len(decl.parameters)} arguments", node)
        return Atom(name, tuple(self.obj(t) for t in node[1:]))

    def ground_fluent(self, node) -> FluentTerm:
        node = self.expect_list(node, "a function term")
        if not node:
            raise self.error("empty function term", node)
        name = self.word(node[0], "a function")
        if self.domain is not None:
            decl = {f.name: f for f in self.domain.functions}.get(name)
            if decl is None:
                raise self.error(f"undeclared function {name}", node)
            if len(decl.parameters) != len(node) - 1:
                raise self.error(f"function {name} expects {len(decl.parameters)} arguments", node)
        return FluentTerm(name, tuple(self.obj(t) for t in node[1:]))

    def goal(self, node) -> list:
        node = self.expect_list(node, "a goal")
        if not node:
            return []
        head = self.word(node[0], "a goal").lower()
        if head == "and":
            out = []
            for part in node[1:]:
                out.extend(self.goal(part))
            return out
        if head == "not":
            if len(node) != 2:
                raise self.error("'not' takes one argument", node)
            return [Literal(self.ground_atom(self.expect_list(node[1], "an atom")), False)]
        if head in COMPARISON_OPS:
            if len(node) != 3:
                raise self.error(f"comparison {head} takes two arguments", node)
            return [Comparison(head, self.ground_expr(node[1]), self.ground_expr(node[2]))]
        if head in ("or", "imply", "exists", "forall"):
            raise self.error(f"'{head}' is not supported", node)
        return [Literal(self.ground_atom(node), True)]

    def ground_expr(self, node) -> Expr:
        if isinstance(node, Token):
            return Num(self.number(node))
        if node and isinstance(node[0], Token) and node[0].text in ARITHMETIC_OPS:
            args = [self.ground_expr(x) for x in node[1:]]
            if len(args) != 2:
                raise self.error(f"operator {node[0].text} needs two arguments", node)
            return BinOp(node[0].text, args[0], args[1])
        return self.ground_fluent(node)


def parse_problem(text: str, domain: Domain | None = None, source: str = "<problem>") -> Problem:
    """Parse a problem file.

    With ``domain`` given, object types, predicate and function arities are
    checked against it and domain constants count as declared objects.
    """
    tree = read_sexpr(text, source)
    return _ProblemReader(source, domain).read(tree)
