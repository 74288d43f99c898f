"""Java-subset frontend producing :mod:`changeminer.ast` trees.

The grammar covers classes, methods, the common statements and expressions.
Anything else (try/switch/lambdas/annotations/imports, ...) is skipped at
statement or member granularity and counted, so real repository files never
abort a mining run. Bare statement snippets are wrapped in a synthetic
class/method, which lets hunk-sized fixtures be parsed directly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from changeminer.ast import AstNode, finalize

SNIPPET_NAME = "<snippet>"


@dataclass(frozen=True)
class SourceFile:
    path: str
    content: bytes
    revision_tag: str = "files"

    @classmethod
    def from_text(cls, text: str, path: str = "<memory>", revision_tag: str = "files") -> "SourceFile":
        return cls(path, text.encode("utf-8"), revision_tag)


class ParseSkipped(Exception):
    """Content is not parseable text (binary or not UTF-8)."""


class SourceSyntaxError(SyntaxError):
    def __init__(self, position: int, message: str):
        super().__init__(f"{message} at byte {position}")
        self.position = position
        self.message = message


class _Unsupported(Exception):
    """Construct outside the subset; caller skips the enclosing region."""


# ---------------------------------------------------------------- lexer

@dataclass(frozen=True)
class Token:
    kind: str  # ident, keyword, int, float, string, char, op, eof
    text: str
    start: int
    end: int


KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue default do
    double else enum extends final finally float for goto if implements import instanceof int
    interface long native new package private protected public return short static strictfp
    super switch synchronized this throw throws transient try void volatile while true false
    null""".split()
)
PRIMITIVES = frozenset("boolean byte char short int long float double void".split())
MODIFIERS = frozenset(
    "public private protected static final abstract native synchronized transient volatile "
    "strictfp default sealed non-sealed".split()
)

_OPERATORS = sorted(
    """>>>= <<= >>= >>> ... -> :: ++ -- && || == != <= >= += -= *= /= %= &= |= ^= << >>
    ( ) { } [ ] ; , . @ = > < ! ~ ? : + - * / & | ^ %""".split(),
    key=len,
    reverse=True,
)
_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*.*?\*/)
  | (?P<open_comment>/\*)
  | (?P<text_block>\"\"\"[\s\S]*?\"\"\")
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<open_string>")
  | (?P<char>'(?:[^'\\\n]|\\.)+')
  | (?P<open_char>')
  | (?P<float>(?:\d[\d_]*\.[\d_]*(?:[eE][+-]?\d+)?|\.\d[\d_]*(?:[eE][+-]?\d+)?|\d[\d_]*[eE][+-]?\d+)[fFdD]?|\d[\d_]*[fFdD])
  | (?P<int>0[xX][\da-fA-F_]+[lL]?|0[bB][01_]+[lL]?|\d[\d_]*[lL]?)
  | (?P<ident>[A-Za-z_$][\w$]*)
  | (?P<op>"""
    + "|".join(re.escape(o) for o in _OPERATORS)
    + r""")
    """,
    re.VERBOSE | re.DOTALL,
)

_CLOSERS = {")": "(", "]": "[", "}": "{"}


def tokenize(text: str, byte_offsets: list[int] | None = None) -> list[Token]:
    """Lex ``text``. Offsets are byte offsets when ``byte_offsets`` maps chars to bytes."""

    def off(i: int) -> int:
        return byte_offsets[i] if byte_offsets is not None else i

    tokens = []
    pos = 1 if text.startswith("\ufeff") else 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SourceSyntaxError(off(pos), f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        if kind == "open_comment":
            raise SourceSyntaxError(off(pos), "unterminated comment")
        if kind in ("open_string", "open_char"):
            raise SourceSyntaxError(off(pos), "unterminated literal")
        if kind not in ("ws", "line_comment", "block_comment"):
            tok_text = m.group()
            if kind == "text_block":
                kind = "string"
            elif kind == "ident" and tok_text in KEYWORDS:
                kind = "keyword"
            tokens.append(Token(kind, tok_text, off(m.start()), off(m.end())))
        pos = m.end()
    _check_balance(tokens)
    tokens.append(Token("eof", "", off(n), off(n)))
    return tokens


def _check_balance(tokens: list[Token]) -> None:
    stack: list[Token] = []
    for tok in tokens:
        if tok.kind != "op":
            continue
        if tok.text in "([{":
            stack.append(tok)
        elif tok.text in _CLOSERS:
            if not stack or stack[-1].text != _CLOSERS[tok.text]:
                raise SourceSyntaxError(tok.start, f"unbalanced {tok.text!r}")
            stack.pop()
    if stack:
        raise SourceSyntaxError(stack[-1].start, f"unclosed {stack[-1].text!r}")


# ---------------------------------------------------------------- parser

_BINARY_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "|": 3,
    "^": 4,
    "&": 5,
    "==": 6,
    "!=": 6,
    "<": 7,
    ">": 7,
    "<=": 7,
    ">=": 7,
    "instanceof": 7,
    "<<": 8,
    ">>": 8,
    ">>>": 8,
    "+": 9,
    "-": 9,
    "*": 10,
    "/": 10,
    "%": 10,
}
_ASSIGN_OPS = frozenset("= += -= *= /= %= &= |= ^= <<= >>= >>>=".split())
_UNSUPPORTED_STATEMENTS = frozenset("try switch do synchronized assert catch finally case default".split())
_OPERAND_STARTS = frozenset({"ident", "int", "float", "string", "char"})


def _copy(node: AstNode) -> AstNode:
    return AstNode(node.kind, node.value, [_copy(c) for c in node.children], node.span)


def _as_write(node: AstNode) -> AstNode:
    if node.kind == "VariableRead":
        return AstNode("VariableWrite", node.value, node.children, node.span)
    if node.kind == "FieldRead":
        return AstNode("FieldWrite", node.value, node.children, node.span)
    if node.kind == "ArrayAccess":
        return node
    raise _Unsupported("assignment target")


class _Parser:
    def __init__(self, tokens: list[Token], size: int):
        self.toks = tokens
        self.i = 0
        self.size = size
        self.skipped = 0

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.toks[self.i]
        return t.text == text and t.kind in ("op", "keyword")

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            return self.advance()
        return None

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise _Unsupported(f"expected {text!r}, got {self.tok.text!r}")
        return self.advance()

    def expect_ident(self) -> Token:
        if self.tok.kind != "ident":
            raise _Unsupported(f"expected identifier, got {self.tok.text!r}")
        return self.advance()

    def prev_end(self) -> int:
        return self.toks[self.i - 1].end

    # -- skipping
    def skip_balanced(self) -> None:
        """Consume one bracketed group starting at the current token."""
        depth = 0
        while True:
            t = self.advance()
            if t.kind == "op" and t.text in "([{":
                depth += 1
            elif t.kind == "op" and t.text in ")]}":
                depth -= 1
            if depth <= 0 or t.kind == "eof":
                return

    def skip_region(self, start: int) -> None:
        """Skip from token ``start`` to the end of the enclosing statement/member."""
        self.i = start
        self.skipped += 1
        led_by_do = self.tok.text == "do"
        while True:
            t = self.tok
            if t.kind == "eof" or (t.kind == "op" and t.text in ")]}"):
                return
            if t.kind == "op" and t.text == ";":
                self.advance()
                return
            if t.kind == "op" and t.text in "([":
                self.skip_balanced()
                continue
            if t.kind == "op" and t.text == "{":
                self.skip_balanced()
                nxt = self.tok
                if nxt.text in ("catch", "finally", "else") or (led_by_do and nxt.text == "while") or (
                    nxt.kind == "op" and nxt.text in ".),;"
                ):
                    continue
                return
            self.advance()

    def skip_annotations(self) -> None:
        while self.at("@") and self.peek().text != "interface":
            self.advance()
            self.expect_ident()
            while self.accept("."):
                self.expect_ident()
            if self.at("("):
                self.skip_balanced()

    def skip_modifiers(self) -> None:
        while True:
            self.skip_annotations()
            if self.tok.text in MODIFIERS and self.tok.kind in ("keyword", "ident") and self.peek().text not in ("=", "(", ".", ";"):
                self.advance()
            else:
                return

    def skip_type_args(self) -> str:
        """Consume ``<...>`` (splitting ``>>``) and return its compact text."""
        parts = []
        depth = 0
        while True:
            t = self.tok
            if t.kind == "eof":
                raise _Unsupported("unterminated type arguments")
            if t.text == "<":
                depth += 1
            elif t.text in (">", ">>", ">>>"):
                depth -= len(t.text)
            elif t.kind == "op" and t.text not in (",", ".", "?", "[", "]", "&", "@"):
                raise _Unsupported("not type arguments")
            self.advance()
            parts.append(t.text)
            if depth <= 0:
                if depth < 0:
                    raise _Unsupported("unbalanced type arguments")
                text = "".join(parts)
                return text.replace(",", ", ")

    # -- types
    def parse_type(self) -> AstNode:
        start = self.tok.start
        self.skip_annotations()
        if self.tok.kind == "keyword" and self.tok.text in PRIMITIVES:
            text = self.advance().text
        elif self.tok.kind == "ident":
            text = self.advance().text
            if self.at("<"):
                text += self.skip_type_args()
            while self.at(".") and self.peek().kind == "ident":
                self.advance()
                text += "." + self.advance().text
                if self.at("<"):
                    text += self.skip_type_args()
        else:
            raise _Unsupported("expected type")
        while self.at("[") and self.peek().text == "]":
            self.advance()
            self.advance()
            text += "[]"
        if self.at("..."):
            self.advance()
            text += "..."
        return AstNode("TypeReference", text, (), (start, self.prev_end()))

    def looks_like_declaration(self) -> bool:
        """Speculatively check for ``Type name (=|;|,|[|:)`` at the cursor."""
        save = self.i
        try:
            while self.at("final") or self.at("@"):
                if self.at("final"):
                    self.advance()
                else:
                    self.skip_annotations()
            self.parse_type()
            if self.tok.kind != "ident":
                return False
            self.advance()
            return self.tok.text in ("=", ";", ",", "[", ":")
        except _Unsupported:
            return False
        finally:
            self.i = save

    # -- compilation unit
    def parse_compilation_unit(self) -> AstNode:
        members: list[AstNode] = []
        while self.tok.text in ("package", "import"):
            self.skip_region(self.i)
        save = self.i
        self.skip_modifiers()
        class_mode = self.tok.text in ("class", "interface", "enum") or (
            self.tok.text == "record" and self.peek().kind == "ident"
        ) or (self.at("@") and self.peek().text == "interface")
        self.i = save
        if class_mode or self.tok.kind == "eof":
            while self.tok.kind != "eof":
                start = self.i
                try:
                    self.skip_modifiers()
                    if self.accept(";"):
                        continue
                    members.append(self.parse_class())
                except _Unsupported:
                    self.skip_region(start)
                    if self.i == start:
                        self.advance()
        else:
            stmts = self.parse_statements_until_eof()
            body = AstNode("Block", "", stmts, (0, self.size))
            method = AstNode("Method", SNIPPET_NAME, [body], (0, self.size))
            members.append(AstNode("Class", SNIPPET_NAME, [method], (0, self.size)))
        return AstNode("CompilationUnit", "", members, (0, self.size))

    def parse_statements_until_eof(self) -> list[AstNode]:
        out: list[AstNode] = []
        while self.tok.kind != "eof":
            before = self.i
            out.extend(self.parse_statement_safe())
            if self.i == before:
                # stray closer at top level
                self.advance()
                self.skipped += 1
        return out

    def parse_class(self) -> AstNode:
        start = self.tok.start
        if self.at("@"):
            self.advance()
        kw = self.advance()
        if kw.text not in ("class", "interface", "enum", "record"):
            raise _Unsupported("expected type declaration")
        name = self.expect_ident().text
        while not self.at("{"):
            if self.tok.kind == "eof":
                raise _Unsupported("class without body")
            if self.at("(") or self.at("<"):
                if self.at("<"):
                    self.skip_type_args()
                else:
                    self.skip_balanced()
            else:
                self.advance()
        self.expect("{")
        members: list[AstNode] = []
        if kw.text == "enum":
            self.skip_enum_constants()
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise _Unsupported("unterminated class body")
            member_start = self.i
            try:
                members.extend(self.parse_member(name))
            except _Unsupported:
                self.skip_region(member_start)
                if self.i == member_start:
                    self.advance()
        self.expect("}")
        return AstNode("Class", name, members, (start, self.prev_end()))

    def skip_enum_constants(self) -> None:
        if self.at(";"):
            self.advance()
            return
        if self.at("}"):
            return
        self.skipped += 1
        while not (self.at(";") or self.at("}")) and self.tok.kind != "eof":
            if self.tok.kind == "op" and self.tok.text in "([{":
                self.skip_balanced()
            else:
                self.advance()
        self.accept(";")

    def parse_member(self, class_name: str) -> list[AstNode]:
        start_tok = self.tok
        self.skip_modifiers()
        if self.accept(";"):
            return []
        if self.tok.text in ("class", "interface", "enum") or (
            self.at("@") and self.peek().text == "interface"
        ) or (self.tok.text == "record" and self.peek().kind == "ident" and self.peek(2).text in ("(", "<")):
            return [self.parse_class()]
        if self.at("{"):
            raise _Unsupported("initializer block")
        if self.at("<"):
            self.skip_type_args()
        # constructor
        if self.tok.kind == "ident" and self.peek().text == "(":
            name = self.advance().text
            return [self.parse_method_rest(start_tok.start, name, None)]
        rtype = self.parse_type()
        name = self.expect_ident().text
        if self.at("("):
            return [self.parse_method_rest(start_tok.start, name, rtype)]
        return self.parse_declarators(start_tok.start, rtype, name)

    def parse_method_rest(self, start: int, name: str, rtype: AstNode | None) -> AstNode:
        children: list[AstNode] = [] if rtype is None else [rtype]
        self.expect("(")
        while not self.at(")"):
            pstart = self.tok.start
            while self.at("final") or self.at("@"):
                if self.at("final"):
                    self.advance()
                else:
                    self.skip_annotations()
            ptype = self.parse_type()
            pname = self.expect_ident().text
            while self.at("["):
                self.advance()
                self.expect("]")
            children.append(AstNode("Parameter", pname, [ptype], (pstart, self.prev_end())))
            if not self.accept(","):
                break
        self.expect(")")
        while self.at("[") and self.peek().text == "]":
            self.advance()
            self.advance()
        if self.accept("throws"):
            while not (self.at("{") or self.at(";")):
                if self.tok.kind == "eof":
                    raise _Unsupported("method without body")
                self.advance()
        if self.accept("default"):
            # annotation element default value
            raise _Unsupported("annotation default")
        if self.at("{"):
            children.append(self.parse_block())
        else:
            self.expect(";")
        return AstNode("Method", name, children, (start, self.prev_end()))

    def parse_declarators(self, start: int, vtype: AstNode, name: str) -> list[AstNode]:
        out = []
        while True:
            children = [_copy(vtype) if out else vtype]
            while self.at("["):
                self.advance()
                self.expect("]")
            if self.accept("="):
                if self.at("{"):
                    raise _Unsupported("array initializer")
                children.append(self.parse_expression())
            out.append((name, children))
            if self.accept(","):
                name = self.expect_ident().text
                continue
            self.expect(";")
            break
        end = self.prev_end()
        return [AstNode("LocalVariable", n, ch, (start, end)) for n, ch in out]

    # -- statements
    def parse_block(self) -> AstNode:
        start = self.expect("{").start
        stmts: list[AstNode] = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise _Unsupported("unterminated block")
            stmts.extend(self.parse_statement_safe())
        self.expect("}")
        return AstNode("Block", "", stmts, (start, self.prev_end()))

    def parse_statement_safe(self) -> list[AstNode]:
        start = self.i
        try:
            return self.parse_statement()
        except _Unsupported:
            self.skip_region(start)
            return []

    def parse_statement(self) -> list[AstNode]:
        t = self.tok
        if t.kind == "op":
            if t.text == "{":
                return [self.parse_block()]
            if t.text == ";":
                self.advance()
                return []
            if t.text == "@":
                raise _Unsupported("annotated statement")
        if t.kind == "keyword":
            if t.text == "if":
                return [self.parse_if()]
            if t.text == "while":
                return [self.parse_while()]
            if t.text == "for":
                return [self.parse_for()]
            if t.text == "return":
                self.advance()
                children = [] if self.at(";") else [self.parse_expression()]
                self.expect(";")
                return [AstNode("Return", "", children, (t.start, self.prev_end()))]
            if t.text == "throw":
                self.advance()
                expr = self.parse_expression()
                self.expect(";")
                return [AstNode("Throw", "", [expr], (t.start, self.prev_end()))]
            if t.text in ("break", "continue"):
                self.advance()
                label = self.advance().text if self.tok.kind == "ident" else ""
                self.expect(";")
                kind = "Break" if t.text == "break" else "Continue"
                return [AstNode(kind, label, (), (t.start, self.prev_end()))]
            if t.text in _UNSUPPORTED_STATEMENTS or t.text in ("class", "interface", "enum", "abstract", "static"):
                raise _Unsupported(t.text)
        if t.kind == "ident" and self.peek().text == ":" :
            raise _Unsupported("labeled statement")
        if t.kind == "ident" and t.text in ("yield", "record") and self.peek().kind != "op":
            raise _Unsupported(t.text)
        if self.looks_like_declaration():
            start = t.start
            while self.at("final") or self.at("@"):
                if self.at("final"):
                    self.advance()
                else:
                    self.skip_annotations()
            vtype = self.parse_type()
            name = self.expect_ident().text
            return self.parse_declarators(start, vtype, name)
        expr = self.parse_expression()
        self.expect(";")
        return [expr]

    def parse_condition(self) -> AstNode:
        start = self.expect("(").start
        expr = self.parse_expression()
        self.expect(")")
        return AstNode("Condition", "", [expr], (start, self.prev_end()))

    def parse_branch(self, kind: str, start: int) -> AstNode:
        """``Then``/``Else`` absorb the braces of a block branch."""
        if self.at("{"):
            block = self.parse_block()
            return AstNode(kind, "", block.children, (start if kind == "Else" else block.span[0], block.span[1]))
        stmt_start = self.tok.start
        stmts = self.parse_statement()
        return AstNode(kind, "", stmts, (start if kind == "Else" else stmt_start, self.prev_end()))

    def parse_if(self) -> AstNode:
        start = self.expect("if").start
        cond = self.parse_condition()
        children = [cond, self.parse_branch("Then", self.tok.start)]
        else_tok = self.accept("else")
        if else_tok is not None:
            children.append(self.parse_branch("Else", else_tok.start))
        return AstNode("If", "", children, (start, self.prev_end()))

    def parse_body(self) -> list[AstNode]:
        if self.at("{"):
            return [self.parse_block()]
        return self.parse_statement()

    def parse_while(self) -> AstNode:
        start = self.expect("while").start
        cond = self.parse_condition()
        body = self.parse_body()
        return AstNode("While", "", [cond, *body], (start, self.prev_end()))

    def parse_for(self) -> AstNode:
        start = self.expect("for").start
        self.expect("(")
        children: list[AstNode] = []
        if self.looks_like_declaration():
            save = self.i
            dstart = self.tok.start
            while self.at("final") or self.at("@"):
                if self.at("final"):
                    self.advance()
                else:
                    self.skip_annotations()
            vtype = self.parse_type()
            name_tok = self.expect_ident()
            if self.accept(":"):
                var = AstNode("LocalVariable", name_tok.text, [vtype], (dstart, name_tok.end))
                iterable = self.parse_expression()
                self.expect(")")
                body = self.parse_body()
                return AstNode("For", ":", [var, iterable, *body], (start, self.prev_end()))
            self.i = save
            vtype = self.parse_type()
            name = self.expect_ident().text
            children.extend(self.parse_declarators(dstart, vtype, name))
        else:
            while not self.at(";"):
                children.append(self.parse_expression())
                if not self.accept(","):
                    break
            self.expect(";")
        if not self.at(";"):
            cstart = self.tok.start
            expr = self.parse_expression()
            children.append(AstNode("Condition", "", [expr], (cstart, self.prev_end())))
        self.expect(";")
        while not self.at(")"):
            children.append(self.parse_expression())
            if not self.accept(","):
                break
        self.expect(")")
        children.extend(self.parse_body())
        return AstNode("For", "", children, (start, self.prev_end()))

    # -- expressions
    def parse_expression(self) -> AstNode:
        if self.tok.kind == "ident" and self.peek().text == "->":
            raise _Unsupported("lambda")
        if self.at("(") and self._is_lambda_params():
            raise _Unsupported("lambda")
        lhs = self.parse_conditional()
        t = self.tok
        if t.kind == "op" and t.text in _ASSIGN_OPS:
            self.advance()
            rhs = self.parse_expression()
            span = (lhs.span[0], rhs.span[1])
            target = _as_write(lhs)
            if t.text == "=":
                return AstNode("Assignment", "", [target, rhs], span)
            op = AstNode("BinaryOperator", t.text[:-1], [_copy(lhs), rhs], span)
            return AstNode("Assignment", "", [target, op], span)
        return lhs

    def _is_lambda_params(self) -> bool:
        depth = 0
        j = self.i
        while j < len(self.toks):
            t = self.toks[j]
            if t.text == "(":
                depth += 1
            elif t.text == ")":
                depth -= 1
                if depth == 0:
                    return self.toks[j + 1].text == "->"
            elif t.kind == "eof":
                return False
            j += 1
        return False

    def parse_conditional(self) -> AstNode:
        cond = self.parse_binary(1)
        if self.accept("?"):
            a = self.parse_expression()
            self.expect(":")
            b = self.parse_conditional()
            return AstNode("BinaryOperator", "?:", [cond, a, b], (cond.span[0], b.span[1]))
        return cond

    def parse_binary(self, min_prec: int) -> AstNode:
        lhs = self.parse_unary()
        while True:
            t = self.tok
            prec = _BINARY_PRECEDENCE.get(t.text) if t.kind in ("op", "keyword") else None
            if prec is None or prec < min_prec:
                return lhs
            self.advance()
            if t.text == "instanceof":
                self.accept("final")
                rhs = self.parse_type()
                if self.tok.kind == "ident":
                    raise _Unsupported("pattern matching instanceof")
            else:
                rhs = self.parse_binary(prec + 1)
            lhs = AstNode("BinaryOperator", t.text, [lhs, rhs], (lhs.span[0], rhs.span[1]))

    def parse_unary(self) -> AstNode:
        t = self.tok
        if t.kind == "op" and t.text in ("+", "-", "!", "~", "++", "--"):
            self.advance()
            operand = self.parse_unary()
            return AstNode("UnaryOperator", t.text, [operand], (t.start, operand.span[1]))
        if t.kind == "op" and t.text == "(" and self._is_cast():
            self.advance()
            ctype = self.parse_type()
            while self.accept("&"):
                self.parse_type()
            self.expect(")")
            operand = self.parse_unary()
            return AstNode("UnaryOperator", f"({ctype.value})", [operand], (t.start, operand.span[1]))
        return self.parse_postfix()

    def _is_cast(self) -> bool:
        nxt = self.peek()
        if nxt.kind == "keyword" and nxt.text in PRIMITIVES:
            save = self.i
            try:
                self.advance()
                self.parse_type()
                return self.at(")")
            except _Unsupported:
                return False
            finally:
                self.i = save
        if nxt.kind != "ident":
            return False
        save = self.i
        try:
            self.advance()
            self.parse_type()
            if not self.at(")"):
                return False
            after = self.peek()
            return after.kind in _OPERAND_STARTS or after.text in ("(", "!", "~", "this", "super", "new", "true", "false", "null")
        except _Unsupported:
            return False
        finally:
            self.i = save

    def parse_arguments(self) -> list[AstNode]:
        self.expect("(")
        args = []
        while not self.at(")"):
            args.append(self.parse_expression())
            if not self.accept(","):
                break
        self.expect(")")
        return args

    def parse_postfix(self) -> AstNode:
        node = self.parse_primary()
        start = node.span[0]
        while True:
            t = self.tok
            if t.kind != "op":
                return node
            if t.text == ".":
                self.advance()
                if self.at("<"):
                    self.skip_type_args()
                if self.at("new") or self.at("this") or self.at("super"):
                    raise _Unsupported("qualified new/this")
                if self.at("class"):
                    self.advance()
                    node = AstNode("FieldRead", "class", [node], (start, self.prev_end()))
                    continue
                name = self.expect_ident().text
                if self.at("("):
                    args = self.parse_arguments()
                    node = AstNode("Invocation", name, [node, *args], (start, self.prev_end()))
                else:
                    node = AstNode("FieldRead", name, [node], (start, self.prev_end()))
            elif t.text == "[":
                self.advance()
                index = self.parse_expression()
                self.expect("]")
                node = AstNode("ArrayAccess", "", [node, index], (start, self.prev_end()))
            elif t.text in ("++", "--"):
                self.advance()
                node = AstNode("UnaryOperator", "post" + t.text, [node], (start, self.prev_end()))
            elif t.text == "::":
                raise _Unsupported("method reference")
            else:
                return node

    def parse_primary(self) -> AstNode:
        t = self.tok
        if t.kind in ("int", "float", "string", "char"):
            self.advance()
            return AstNode("Literal", t.text, (), (t.start, t.end))
        if t.kind == "keyword":
            if t.text in ("true", "false", "null"):
                self.advance()
                return AstNode("Literal", t.text, (), (t.start, t.end))
            if t.text in ("this", "super"):
                self.advance()
                if self.at("("):
                    args = self.parse_arguments()
                    return AstNode("Invocation", t.text, args, (t.start, self.prev_end()))
                return AstNode("VariableRead", t.text, (), (t.start, t.end))
            if t.text == "new":
                return self.parse_new()
            if t.text in PRIMITIVES:
                # int.class and friends
                ptype = self.parse_type()
                self.expect(".")
                self.expect("class")
                return AstNode("FieldRead", "class", [AstNode("VariableRead", ptype.value, (), ptype.span)], (t.start, self.prev_end()))
            if t.text == "switch":
                raise _Unsupported("switch expression")
            raise _Unsupported(f"unexpected keyword {t.text!r}")
        if t.kind == "ident":
            self.advance()
            if self.at("("):
                args = self.parse_arguments()
                return AstNode("Invocation", t.text, args, (t.start, self.prev_end()))
            return AstNode("VariableRead", t.text, (), (t.start, t.end))
        if t.kind == "op" and t.text == "(":
            self.advance()
            inner = self.parse_expression()
            self.expect(")")
            return inner
        raise _Unsupported(f"unexpected token {t.text!r}")

    def parse_new(self) -> AstNode:
        start = self.expect("new").start
        if self.at("<"):
            self.skip_type_args()
        ctype = self.parse_type()
        if self.at("["):
            dims = []
            suffix = ""
            while self.at("["):
                self.advance()
                if self.at("]"):
                    self.advance()
                    suffix += "[]"
                    continue
                dims.append(self.parse_expression())
                self.expect("]")
                suffix += "[]"
            if self.at("{"):
                raise _Unsupported("array initializer")
            return AstNode("Invocation", f"new {ctype.value}{suffix}", dims, (start, self.prev_end()))
        if ctype.value.endswith("[]"):
            raise _Unsupported("array initializer")
        args = self.parse_arguments()
        if self.at("{"):
            raise _Unsupported("anonymous class")
        return AstNode("Invocation", f"new {ctype.value}", args, (start, self.prev_end()))


def _byte_offsets(text: str) -> list[int] | None:
    if text.isascii():
        return None
    offsets = [0] * (len(text) + 1)
    acc = 0
    for i, ch in enumerate(text):
        offsets[i] = acc
        acc += len(ch.encode("utf-8"))
    offsets[len(text)] = acc
    return offsets


def parse_with_stats(file: SourceFile) -> tuple[AstNode, int]:
    """Parse ``file``; also return how many regions were skipped as unsupported."""
    if b"\x00" in file.content:
        raise ParseSkipped(f"{file.path}: binary content")
    try:
        text = file.content.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseSkipped(f"{file.path}: not UTF-8 ({exc.reason})") from None
    tokens = tokenize(text, _byte_offsets(text))
    parser = _Parser(tokens, len(file.content))
    root = parser.parse_compilation_unit()
    return finalize(root), parser.skipped


def parse_source(file: SourceFile) -> AstNode:
    """Parse ``file`` into a tree rooted at a ``CompilationUnit``."""
    return parse_with_stats(file)[0]


def parse_text(text: str) -> AstNode:
    return parse_source(SourceFile.from_text(text))
