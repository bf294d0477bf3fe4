"""Label hierarchy: parsing, validation, and ancestry queries.

The on-disk format is an indented text document, one node per line, two
spaces of indentation per level, exactly one unindented root line.  Blank
lines and lines whose first non-space character is ``#`` are ignored, so a
tree file can carry a commented header.  A JSON mirror of the form
``{"name": ..., "children": [...]}`` is accepted as alternate input.

Node identity is positional (document order), because internal nodes may
legally share a name with a leaf elsewhere in the tree.  Leaf names are
globally unique and are the only names datasets bind to.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import (
    DuplicateLeafNameError,
    DuplicateSiblingNameError,
    EmptyNameError,
    IndentJumpError,
    MultipleRootsError,
    NotALeafError,
    TreeFormatError,
    UnknownNodeError,
)

INDENT = "  "

_ASSET_NAME = "rio_do_fogo.tree"


@dataclass(frozen=True)
class TreeNode:
    id: int
    name: str
    parent: int | None
    children: tuple[int, ...]
    depth: int

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass(frozen=True)
class LabelTree:
    """Immutable rooted tree of category labels.

    Nodes are stored in document order; node 0 is the root (depth 0).
    ``leaf_name_index`` maps each unique leaf name to its node id.
    """

    nodes: tuple[TreeNode, ...]
    root_id: int
    leaf_name_index: dict[str, int] = field(repr=False)

    # -- basic accessors ----------------------------------------------------

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, node_id: int) -> TreeNode:
        if not 0 <= node_id < len(self.nodes):
            raise UnknownNodeError(f"no node with id {node_id}")
        return self.nodes[node_id]

    def name(self, node_id: int) -> str:
        return self.node(node_id).name

    def children(self, node_id: int) -> tuple[int, ...]:
        return self.node(node_id).children

    def depth(self, node_id: int) -> int:
        return self.node(node_id).depth

    def is_leaf(self, node_id: int) -> bool:
        return self.node(node_id).is_leaf

    def leaf_ids(self) -> list[int]:
        """Ids of all leaves, in document order."""
        return [n.id for n in self.nodes if n.is_leaf]

    def leaf_names(self) -> list[str]:
        """Names of all leaves, in document order."""
        return [n.name for n in self.nodes if n.is_leaf]

    def leaf_id(self, name: str) -> int:
        try:
            return self.leaf_name_index[name]
        except KeyError:
            raise UnknownNodeError(f"no leaf named {name!r}") from None

    @property
    def max_depth(self) -> int:
        return max(n.depth for n in self.nodes)

    def _resolve(self, node: int | str) -> int:
        """Accept a node id, or a leaf name (leaf names are unique)."""
        if isinstance(node, str):
            return self.leaf_id(node)
        return self.node(node).id

    # -- ancestry queries ---------------------------------------------------

    def ancestors(self, node: int | str) -> list[int]:
        """Path of node ids from the first below-root level down to ``node``.

        The root is excluded; in particular ``ancestors(root) == []``.  The
        node itself is the last element, so the list length equals the
        node's depth.
        """
        node_id = self._resolve(node)
        path: list[int] = []
        cur = self.nodes[node_id]
        while cur.parent is not None:
            path.append(cur.id)
            cur = self.nodes[cur.parent]
        path.reverse()
        return path

    def ancestor_at_level(self, leaf: int | str, level: int) -> int:
        """Ancestor of ``leaf`` at depth ``level``, or the leaf itself when
        the leaf is shallower than ``level``."""
        leaf_id = self._resolve(leaf)
        node = self.nodes[leaf_id]
        if not node.is_leaf:
            raise NotALeafError(f"node {node.name!r} (id {leaf_id}) is not a leaf")
        if level < 1:
            raise ValueError("level must be >= 1")
        path = self.ancestors(leaf_id)
        if level >= len(path):
            return leaf_id
        return path[level - 1]

    def lca_depth(self, a: int | str, b: int | str) -> int:
        """Depth of the deepest common ancestor of ``a`` and ``b``.

        Paths from the root are unique, so this is the length of the common
        prefix of the two ancestor paths; the root counts as depth 0 and
        ``lca_depth(x, x) == depth(x)``.
        """
        pa = self.ancestors(a)
        pb = self.ancestors(b)
        depth = 0
        for x, y in zip(pa, pb):
            if x != y:
                break
            depth += 1
        return depth


# ---------------------------------------------------------------------------
# construction

def _finalize(names: list[str], parents: list[int | None]) -> LabelTree:
    """Assemble and validate a LabelTree from parallel name/parent lists."""
    children: list[list[int]] = [[] for _ in names]
    depths = [0] * len(names)
    for i, (name, parent) in enumerate(zip(names, parents)):
        if not name or not name.strip():
            raise EmptyNameError(f"node {i} has an empty name")
        if parent is not None:
            for sib in children[parent]:
                if names[sib] == name:
                    raise DuplicateSiblingNameError(
                        f"{name!r} appears twice under {names[parent]!r}"
                    )
            children[parent].append(i)
            depths[i] = depths[parent] + 1

    leaf_index: dict[str, int] = {}
    for i, kids in enumerate(children):
        if kids:
            continue
        name = names[i]
        if name in leaf_index:
            raise DuplicateLeafNameError(
                f"leaf name {name!r} appears more than once; "
                "every label must map to a single leaf"
            )
        leaf_index[name] = i

    nodes = tuple(
        TreeNode(
            id=i,
            name=names[i],
            parent=parents[i],
            children=tuple(children[i]),
            depth=depths[i],
        )
        for i in range(len(names))
    )
    return LabelTree(nodes=nodes, root_id=0, leaf_name_index=leaf_index)


def parse_tree(text: str) -> LabelTree:
    """Parse the indented tree document format.

    Raises IndentJumpError, MultipleRootsError, DuplicateLeafNameError,
    DuplicateSiblingNameError, or EmptyNameError on malformed input.
    """
    names: list[str] = []
    parents: list[int | None] = []
    # stack of (depth, node index) from root to the innermost open node
    stack: list[tuple[int, int]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        stripped = line.lstrip(" ")
        indent = len(line) - len(stripped)
        if "\t" in line[:indent] or stripped[:1] == "\t":
            raise IndentJumpError(f"line {lineno}: tabs are not allowed in indentation")
        if indent % len(INDENT) != 0:
            raise IndentJumpError(
                f"line {lineno}: indentation must be a multiple of {len(INDENT)} spaces"
            )
        depth = indent // len(INDENT)
        name = stripped

        if depth == 0:
            if names:
                raise MultipleRootsError(
                    f"line {lineno}: second unindented node {name!r}"
                )
        elif not names:
            raise IndentJumpError(f"line {lineno}: first node must be unindented")
        elif depth > stack[-1][0] + 1:
            raise IndentJumpError(
                f"line {lineno}: {name!r} jumps from depth {stack[-1][0]} "
                f"to depth {depth}"
            )

        while stack and stack[-1][0] >= depth:
            stack.pop()
        parent = stack[-1][1] if stack else None
        names.append(name)
        parents.append(parent)
        stack.append((depth, len(names) - 1))

    if not names:
        raise TreeFormatError("document contains no nodes")
    return _finalize(names, parents)


def parse_tree_json(document: str | dict) -> LabelTree:
    """Parse the JSON mirror: nested ``{"name": ..., "children": [...]}``."""
    obj = json.loads(document) if isinstance(document, str) else document
    if isinstance(obj, list):
        if len(obj) != 1:
            raise MultipleRootsError("JSON document must contain a single root object")
        obj = obj[0]
    if not isinstance(obj, dict):
        raise TreeFormatError("JSON document must be an object with a 'name' field")

    names: list[str] = []
    parents: list[int | None] = []

    def walk(node: dict, parent: int | None) -> None:
        name = node.get("name")
        if not isinstance(name, str) or not name.strip():
            raise EmptyNameError("JSON node is missing a non-empty 'name'")
        names.append(name.strip())
        parents.append(parent)
        me = len(names) - 1
        kids = node.get("children", [])
        if not isinstance(kids, list):
            raise TreeFormatError("'children' must be a list")
        for kid in kids:
            if not isinstance(kid, dict):
                raise TreeFormatError("'children' entries must be objects")
            walk(kid, me)

    walk(obj, None)
    return _finalize(names, parents)


def format_tree(tree: LabelTree) -> str:
    """Serialize to the normalized indented document (no comments)."""
    lines = [INDENT * node.depth + node.name for node in tree.nodes]
    return "\n".join(lines) + "\n"


def load_tree(path: str | Path) -> LabelTree:
    """Load a tree document, auto-detecting the JSON mirror."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    head = text.lstrip()[:1]
    if path.suffix == ".json" or head in ("{", "["):
        return parse_tree_json(text)
    return parse_tree(text)


def bundled_tree_path() -> Path:
    """Filesystem path of the Rio do Fogo benthic label tree shipped with
    the package."""
    return Path(str(resources.files("benthica").joinpath("assets", _ASSET_NAME)))
