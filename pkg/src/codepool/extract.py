"""Prompt rendering and fenced-code extraction for model outputs."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Optional

__all__ = [
    "TaskKind",
    "PromptTask",
    "render_prompt",
    "fenced_blocks",
    "has_method_declaration",
    "extract_code",
]


class TaskKind(Enum):
    REPAIR = "repair"
    GENERATE = "generate"


@dataclass(frozen=True)
class PromptTask:
    """One prompt to be rendered for a model.

    Repair tasks carry the buggy function (with both region markers);
    generation tasks carry the question text and optional starter code.
    """

    kind: TaskKind
    buggy_function: Optional[str] = None
    question_content: Optional[str] = None
    starter_code: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind is TaskKind.REPAIR:
            if self.buggy_function is None:
                raise ValueError("repair task requires buggy_function")
        else:
            if self.question_content is None:
                raise ValueError("generate task requires question_content")


@lru_cache(maxsize=None)
def _asset(name: str) -> str:
    path = resources.files("codepool").joinpath("assets", "prompts", name)
    return path.read_text(encoding="utf-8")


def render_prompt(task: PromptTask) -> str:
    """Render the full prompt string for a task.

    Template text is fixed; only the task fields are substituted. Repair
    prompts require exactly one '<bug_start>' and one '<bug_end>' marker in
    the buggy function.
    """
    if task.kind is TaskKind.REPAIR:
        body = task.buggy_function
        for marker in ("<bug_start>", "<bug_end>"):
            if body.count(marker) != 1:
                raise ValueError(f"buggy_function must contain {marker!r} exactly once")
        return _asset("repair.txt").format(buggy_function=body)

    if task.starter_code is None:
        formatting = _asset("format_stdin.txt")
        starter_block = "# YOUR CODE HERE"
    else:
        formatting = _asset("format_starter.txt")
        starter_block = f"{task.starter_code}\n# YOUR CODE HERE"
    return _asset("generate.txt").format(
        question_content=task.question_content,
        formatting_message=formatting,
        starter_block=starter_block,
    )


# A fence's first line is treated as a language tag when it is a single
# bare word (e.g. "java", "python3", "c++").
_FENCE_TAG = re.compile(r"^[ \t]*[A-Za-z0-9_+#.-]*[ \t]*$")


def fenced_blocks(raw_output: str) -> list[str]:
    """Return the contents of all terminated triple-backtick blocks, in order.

    An opening fence with no closing fence contributes nothing. Language
    tags on the fence line are dropped, as is the newline that terminates
    the block.
    """
    parts = raw_output.split("```")
    blocks = []
    for i in range(1, len(parts) - 1, 2):
        blocks.append(_strip_fence_tag(parts[i]))
    return blocks


def _strip_fence_tag(block: str) -> str:
    head, nl, rest = block.partition("\n")
    if _FENCE_TAG.match(head):
        block = rest if nl else ""
    if block.endswith("\n"):
        block = block[:-1]
    return block


_RESERVED = frozenset(
    "if else while for switch case do try catch finally return new throw "
    "synchronized break continue assert instanceof".split()
)

_METHOD_HEAD = re.compile(
    r"(?:(?:public|protected|private|static|final|abstract|synchronized"
    r"|native|strictfp|default)\s+)*"
    r"(?P<rtype>[\w$]+(?:\s*<[^<>{};]*>)?(?:\s*\[\s*\])*)\s+"
    r"(?P<name>[\w$]+)\s*\("
)


def _scan_balanced(text: str, start: int, opener: str, closer: str) -> Optional[int]:
    """Index of the closer matching text[start] (an opener), or None."""
    depth = 0
    for i in range(start, len(text)):
        c = text[i]
        if c == opener:
            depth += 1
        elif c == closer:
            depth -= 1
            if depth == 0:
                return i
    return None


def has_method_declaration(code: str) -> bool:
    """True if the text contains a complete method: header, parameter list
    and a balanced body block."""
    for m in _METHOD_HEAD.finditer(code):
        if m.group("name") in _RESERVED or m.group("rtype") in _RESERVED:
            continue
        close = _scan_balanced(code, m.end() - 1, "(", ")")
        if close is None:
            continue
        after = re.match(r"\s*(?:throws\s+[\w$.\s,]+?)?\s*\{", code[close + 1 :])
        if after is None:
            continue
        brace = close + 1 + after.end() - 1
        if _scan_balanced(code, brace, "{", "}") is not None:
            return True
    return False


def extract_code(
    raw_output: str,
    language_tag: str,
    task: Optional[TaskKind] = None,
) -> Optional[str]:
    """Pull the code block out of a raw model output.

    Returns None when no terminated fenced block exists. With several
    blocks, repair outputs prefer the first block holding a complete
    method declaration (falling back to the last block); generation
    outputs take the last block. When `task` is omitted it is inferred
    from the language tag ("java" implies repair).
    """
    if task is None:
        task = TaskKind.REPAIR if language_tag == "java" else TaskKind.GENERATE
    blocks = fenced_blocks(raw_output)
    if not blocks:
        return None
    if len(blocks) == 1:
        return blocks[0]
    if task is TaskKind.REPAIR:
        for block in blocks:
            if has_method_declaration(block):
                return block
    return blocks[-1]
