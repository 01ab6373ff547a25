"""Plain-text game files.

Grammar (UTF-8, line oriented, ``#`` starts a comment)::

    game <name> players <N>
    node <id> chance { <prob> -> <child-id> ... }
    node <id> player <p> infostate "<key>" { <action-label> -> <child-id> ... }
    node <id> terminal [ <payoff_1> ... <payoff_N> ]
    root <id>

Players are numbered from 0. Probabilities may be written as decimals or
fractions (``1/3``); a chance row must sum to 1 within ``1e-9``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from ..errors import GameError, GameFileError
from ..game.tree import ChanceNode, DecisionNode, GameTree, TerminalNode

_TOKEN = re.compile(r'''
    (?P<ws>[ \t\r]+) |
    (?P<nl>\n) |
    (?P<comment>\#[^\n]*) |
    (?P<string>"(?:[^"\\\n]|\\.)*") |
    (?P<arrow>->) |
    (?P<sym>[{}\[\]]) |
    (?P<word>[^\s{}\[\]"#]+)
''', re.X)

ROW_ATOL = 1e-9


class _Tok:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"{self.text!r}@{self.line}:{self.col}"


def _tokenize(text):
    line, start, pos = 1, 0, 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise GameFileError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            out.append(_Tok("nl", "\n", line, pos - start + 1))
            line += 1
            start = m.end()
        elif kind == "string":
            raw = m.group()[1:-1]
            out.append(_Tok("string", re.sub(r"\\(.)", r"\1", raw), line, pos - start + 1))
        elif kind not in ("ws", "comment"):
            out.append(_Tok(kind, m.group(), line, pos - start + 1))
        pos = m.end()
    out.append(_Tok("eof", "", line, pos - start + 1))
    return out


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def skip_newlines(self):
        while self.peek().kind == "nl":
            self.i += 1

    def expect(self, kind, text=None):
        # braces and brackets may be split across lines
        if kind != "nl":
            self.skip_newlines()
        tok = self.next()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            got = tok.text if tok.kind != "eof" else "end of file"
            raise GameFileError(f"expected {want!r}, got {got!r}", tok.line, tok.col)
        return tok

    def number(self, tok):
        try:
            return float(Fraction(tok.text)) if "/" in tok.text else float(tok.text)
        except (ValueError, ZeroDivisionError):
            raise GameFileError(f"expected a number, got {tok.text!r}", tok.line, tok.col) from None

    def integer(self, tok):
        try:
            return int(tok.text)
        except ValueError:
            raise GameFileError(f"expected an integer, got {tok.text!r}", tok.line, tok.col) from None

    def end_statement(self):
        tok = self.next()
        if tok.kind not in ("nl", "eof"):
            raise GameFileError(f"unexpected {tok.text!r} after statement", tok.line, tok.col)

    def parse(self):
        header = None
        nodes = {}
        root = None
        while True:
            self.skip_newlines()
            tok = self.next()
            if tok.kind == "eof":
                break
            if tok.kind != "word":
                raise GameFileError(f"expected a statement, got {tok.text!r}", tok.line, tok.col)
            if tok.text == "game":
                if header is not None:
                    raise GameFileError("duplicate 'game' header", tok.line, tok.col)
                name = self.expect("word").text
                self.expect("word", "players")
                ptok = self.expect("word")
                count = self.integer(ptok)
                if count < 1:
                    raise GameFileError("players must be positive", ptok.line, ptok.col)
                header = (name, count, tok)
                self.end_statement()
            elif tok.text == "root":
                if root is not None:
                    raise GameFileError("duplicate 'root' statement", tok.line, tok.col)
                root = self.expect("word")
                self.end_statement()
            elif tok.text == "node":
                ident = self.expect("word")
                if ident.text in nodes:
                    raise GameFileError(f"duplicate node id {ident.text!r}", ident.line, ident.col)
                nodes[ident.text] = self.node_body(ident)
                self.end_statement()
            else:
                raise GameFileError(f"unknown statement {tok.text!r}", tok.line, tok.col)
        if header is None:
            raise GameFileError("missing 'game <name> players <N>' header", 1, 1)
        if root is None:
            raise GameFileError("missing 'root <id>' statement")
        return header, nodes, root

    def node_body(self, ident):
        kind = self.expect("word")
        if kind.text == "chance":
            return ("chance", ident, self.edges(numeric=True))
        if kind.text == "player":
            ptok = self.expect("word")
            player = self.integer(ptok)
            self.expect("word", "infostate")
            key = self.expect("string").text
            return ("player", ident, (player, key, ptok), self.edges(numeric=False))
        if kind.text == "terminal":
            self.expect("sym", "[")
            values = []
            while True:
                self.skip_newlines()
                tok = self.next()
                if tok.kind == "sym" and tok.text == "]":
                    break
                if tok.kind != "word":
                    raise GameFileError(f"expected a payoff or ']', got {tok.text!r}", tok.line, tok.col)
                values.append(self.number(tok))
            return ("terminal", ident, values)
        raise GameFileError(f"node kind must be chance, player or terminal, got {kind.text!r}",
                            kind.line, kind.col)

    def edges(self, numeric):
        self.expect("sym", "{")
        out = []
        while True:
            self.skip_newlines()
            tok = self.next()
            if tok.kind == "sym" and tok.text == "}":
                break
            if tok.kind not in ("word", "string"):
                raise GameFileError(f"expected an edge or '}}', got {tok.text!r}", tok.line, tok.col)
            label = self.number(tok) if numeric else tok.text
            self.expect("arrow")
            child = self.expect("word")
            out.append((label, child, tok))
        if not out:
            raise GameFileError("node has no outgoing edges", tok.line, tok.col)
        return out


def parse_game_file(text: str) -> GameTree:
    """Parse and validate a game file.

    Raises:
        GameFileError: with line/column for syntax errors, bad chance rows,
            dangling or shared child references, unreachable nodes and
            perfect-recall violations.
    """
    (name, n_players, _), nodes, root_tok = _Parser(text).parse()
    if root_tok.text not in nodes:
        raise GameFileError(f"root refers to unknown node {root_tok.text!r}", root_tok.line, root_tok.col)

    parent_of = {}
    for ident, spec in nodes.items():
        if spec[0] == "terminal":
            continue
        for _, child, _ in spec[-1]:
            if child.text not in nodes:
                raise GameFileError(f"node {ident!r} refers to unknown node {child.text!r}",
                                    child.line, child.col)
            if child.text in parent_of or child.text == root_tok.text:
                raise GameFileError(f"node {child.text!r} has more than one parent", child.line, child.col)
            parent_of[child.text] = ident

    built = {}
    origin = {}

    def build(ident, on_path):
        spec = nodes[ident]
        tok = spec[1]
        if ident in on_path:
            raise GameFileError(f"cycle through node {ident!r}", tok.line, tok.col)
        on_path = on_path | {ident}
        if spec[0] == "terminal":
            values = spec[2]
            if len(values) != n_players:
                raise GameFileError(f"terminal {ident!r} has {len(values)} payoffs, expected {n_players}",
                                    tok.line, tok.col)
            node = TerminalNode(tuple(values))
        elif spec[0] == "chance":
            probs = [p for p, _, _ in spec[2]]
            if any(p < 0 for p in probs):
                raise GameFileError(f"chance node {ident!r} has a negative probability", tok.line, tok.col)
            total = sum(probs)
            if abs(total - 1.0) > ROW_ATOL:
                raise GameFileError(f"chance node {ident!r} probabilities sum to {total:.12g}, not 1",
                                    tok.line, tok.col)
            node = ChanceNode(tuple((p / total, build(c.text, on_path)) for p, c, _ in spec[2]), ident)
        else:
            player, key, ptok = spec[2]
            if not 0 <= player < n_players:
                raise GameFileError(f"player {player} outside 0..{n_players - 1}", ptok.line, ptok.col)
            labels = [a for a, _, _ in spec[3]]
            if len(set(labels)) != len(labels):
                raise GameFileError(f"node {ident!r} repeats an action label", tok.line, tok.col)
            node = DecisionNode(player, key, tuple((a, build(c.text, on_path)) for a, c, _ in spec[3]))
            origin.setdefault((player, key), []).append((tok, len(labels)))
        built[ident] = node
        return node

    root = build(root_tok.text, frozenset())
    unreachable = [i for i in nodes if i not in built]
    if unreachable:
        tok = nodes[unreachable[0]][1]
        raise GameFileError(f"node {unreachable[0]!r} is unreachable from the root", tok.line, tok.col)
    for (player, key), members in origin.items():
        sizes = {n for _, n in members}
        if len(sizes) > 1:
            tok = members[1][0] if members[1][1] != members[0][1] else members[-1][0]
            raise GameFileError(
                f"perfect recall violated: infostate {key!r} of player {player} has nodes with "
                f"different action counts {sorted(sizes)}", tok.line, tok.col)
    try:
        tree = GameTree(root, n_players, name)
    except GameError as exc:
        raise GameFileError(str(exc)) from None
    tree.category = "custom"
    return tree


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _label(text: str) -> str:
    return text if re.fullmatch(r'[^\s{}\[\]"#]+', text) and text != "->" else _quote(text)


def write_game_file(tree: GameTree) -> str:
    """Serialise ``tree`` in the game-file format (inverse of :func:`parse_game_file`)."""
    name = re.sub(r"\s+", "_", tree.name) or "game"
    lines = [f"game {_label(name)} players {tree.player_count}"]
    for idx, node in enumerate(tree.nodes):
        if isinstance(node, TerminalNode):
            lines.append(f"node n{idx} terminal [ {' '.join(repr(float(x)) for x in node.payoffs)} ]")
            continue
        children = tree.edge_child[tree.edge_parent == idx]
        if isinstance(node, ChanceNode):
            body = " ".join(f"{p!r} -> n{c}" for (p, _), c in zip(node.outcomes, children))
            lines.append(f"node n{idx} chance {{ {body} }}")
        else:
            body = " ".join(f"{_label(a)} -> n{c}" for (a, _), c in zip(node.actions, children))
            lines.append(f"node n{idx} player {node.player} infostate {_quote(node.infostate)} {{ {body} }}")
    lines.append("root n0")
    return "\n".join(lines) + "\n"
