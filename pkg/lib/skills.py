"""
Skill pool: typed action catalog, text parser and canonical renderer.

Grammar is a single flat call `name(arg1, ..., argk)`. Skill names are case-insensitive,
argument tokens must be lowercase identifiers. Entity existence is not checked here.
"""

import re
from enum import Enum
from typing import Annotated, ClassVar, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter

TOKEN_RE = re.compile(r"[a-z][a-z0-9_]*")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_ACTIONS_HEADER_RE = re.compile(
    r"^[ \t>*#_-]*ACTIONS[ \t*_]*:[ \t*_]*", re.IGNORECASE | re.MULTILINE
)
_SECTION_RE = re.compile(r"^[ \t>*#_-]*[A-Z][A-Z_ ]*[ \t*_]*:")
_LIST_MARKER_RE = re.compile(r"(?:[-*]|\d+[.)])\s+")


class EntityKind(str, Enum):
    ROBOT = "robot"
    OBJECT = "object"
    SPACE = "space"
    CONTAINER = "container"
    DEVICE = "device"
    NAVPOINT = "navpoint"


class _SkillCall(BaseModel):
    model_config = ConfigDict(frozen=True)

    params: ClassVar[tuple[str, ...]] = ()
    kinds: ClassVar[tuple[EntityKind, ...]] = ()

    robot: str

    @property
    def args(self) -> tuple[str, ...]:
        return tuple(getattr(self, p) for p in self.params)

    def typed_args(self) -> list[tuple[str, EntityKind]]:
        return list(zip(self.args, self.kinds))


class Open(_SkillCall):
    params = ("robot", "target")
    kinds = (EntityKind.ROBOT, EntityKind.CONTAINER)

    skill: Literal["open"] = "open"
    target: str


class Close(_SkillCall):
    params = ("robot", "target")
    kinds = (EntityKind.ROBOT, EntityKind.CONTAINER)

    skill: Literal["close"] = "close"
    target: str


class PickFrom(_SkillCall):
    params = ("robot", "object", "space")
    kinds = (EntityKind.ROBOT, EntityKind.OBJECT, EntityKind.SPACE)

    skill: Literal["pick_from"] = "pick_from"
    object: str
    space: str


class ReleaseTo(_SkillCall):
    params = ("robot", "space")
    kinds = (EntityKind.ROBOT, EntityKind.SPACE)

    skill: Literal["release_to"] = "release_to"
    space: str


class GoTo(_SkillCall):
    params = ("robot", "navpoint")
    kinds = (EntityKind.ROBOT, EntityKind.NAVPOINT)

    skill: Literal["go_to"] = "go_to"
    navpoint: str


Action = Annotated[Union[Open, Close, PickFrom, ReleaseTo, GoTo], Field(discriminator="skill")]
action_adapter: TypeAdapter[Action] = TypeAdapter(Action)


class SkillDoc(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    signature: str
    description: str


class ParseErrorKind(str, Enum):
    EMPTY_INPUT = "EmptyInput"
    UNKNOWN_SKILL = "UnknownSkill"
    BAD_ARITY = "BadArity"
    BAD_TOKEN = "BadToken"
    NO_ACTION_FOUND = "NoActionFound"


class ParseError(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: ParseErrorKind
    span: tuple[int, int]
    message: str


# catalog order is the skill pool order
_CATALOG: list[tuple[type[_SkillCall], SkillDoc]] = [
    (
        Open,
        SkillDoc(
            name="open", signature="open(robot, openable_object)", description="robot open object"
        ),
    ),
    (
        Close,
        SkillDoc(
            name="close",
            signature="close(robot, openable_object)",
            description="robot close object",
        ),
    ),
    (
        PickFrom,
        SkillDoc(
            name="pick_from",
            signature="pick_from(robot, object, space)",
            description="robot pick object from space",
        ),
    ),
    (
        ReleaseTo,
        SkillDoc(
            name="release_to",
            signature="release_to(robot, space)",
            description="robot release the object on its hand to space",
        ),
    ),
    (
        GoTo,
        SkillDoc(
            name="go_to",
            signature="go_to(robot, navi_point)",
            description="robot navigate to navigation point",
        ),
    ),
]
_SKILLS: dict[str, type[_SkillCall]] = {doc.name: cls for cls, doc in _CATALOG}


def skill_catalog() -> list[SkillDoc]:
    return [doc for _, doc in _CATALOG]


def render_catalog(catalog: list[SkillDoc] | None = None) -> str:
    """prompt block listing every skill signature with its description"""
    docs = skill_catalog() if catalog is None else catalog
    return "\n".join(f"- {doc.signature}: {doc.description}" for doc in docs)


def render_action(action: Action) -> str:
    return f"{action.skill}({', '.join(action.args)})"


def parse_action(text: str) -> Action | ParseError:
    return _parse_call(text, 0)


def _parse_call(text: str, offset: int) -> Action | ParseError:
    """parse one call; spans are reported relative to offset"""

    def error(kind: ParseErrorKind, start: int, end: int, message: str) -> ParseError:
        return ParseError(kind=kind, span=(offset + start, offset + end), message=message)

    stripped = text.strip()
    if not stripped:
        return error(ParseErrorKind.EMPTY_INPUT, 0, len(text), "empty action")

    start = len(text) - len(text.lstrip())
    end = start + len(stripped)

    name_match = _NAME_RE.match(text, start)
    if name_match is None:
        return error(ParseErrorKind.UNKNOWN_SKILL, start, end, "expected a skill name")

    name = name_match.group(0).lower()
    skill_cls = _SKILLS.get(name)
    if skill_cls is None:
        return error(
            ParseErrorKind.UNKNOWN_SKILL,
            name_match.start(),
            name_match.end(),
            f"unknown skill '{name_match.group(0)}'",
        )

    arity = len(skill_cls.params)
    pos = name_match.end()
    while pos < end and text[pos].isspace():
        pos += 1
    if pos >= end or text[pos] != "(":
        return error(
            ParseErrorKind.BAD_ARITY, start, end, f"{name} expects {arity} arguments in parentheses"
        )

    open_idx = pos
    close_idx = text.rfind(")", open_idx, end)
    if close_idx == -1:
        return error(ParseErrorKind.BAD_ARITY, open_idx, end, f"{name}: missing closing ')'")

    inner = text[open_idx + 1 : close_idx]
    raw_args = inner.split(",") if inner.strip() else []
    if len(raw_args) != arity:
        return error(
            ParseErrorKind.BAD_ARITY,
            open_idx,
            close_idx + 1,
            f"{name} expects {arity} arguments, got {len(raw_args)}",
        )

    if close_idx != end - 1:
        return error(
            ParseErrorKind.BAD_TOKEN, close_idx + 1, end, "unexpected text after closing ')'"
        )

    tokens: list[str] = []
    cursor = open_idx + 1
    for raw in raw_args:
        token = raw.strip()
        token_start = cursor + len(raw) - len(raw.lstrip())
        if not TOKEN_RE.fullmatch(token):
            span_end = token_start + len(token) if token else cursor + len(raw)
            return error(
                ParseErrorKind.BAD_TOKEN,
                token_start if token else cursor,
                span_end,
                f"invalid token '{token}'",
            )
        tokens.append(token)
        cursor += len(raw) + 1

    return action_adapter.validate_python({"skill": name, **dict(zip(skill_cls.params, tokens))})


def extract_actions(llm_text: str) -> tuple[list[Action], list[ParseError]]:
    """
    scan the last ACTIONS block of a planner response

    each line is parsed on its own; invalid lines become diagnostics and the scan goes on.
    the block ends at a blank line following content, or at the next TAG: line.
    """
    headers = list(_ACTIONS_HEADER_RE.finditer(llm_text))
    if not headers:
        return [], [
            ParseError(
                kind=ParseErrorKind.NO_ACTION_FOUND,
                span=(0, len(llm_text)),
                message="no ACTIONS block found",
            )
        ]

    actions: list[Action] = []
    errors: list[ParseError] = []
    seen_content = False

    cursor = headers[-1].end()
    first = True
    while cursor <= len(llm_text):
        newline = llm_text.find("\n", cursor)
        line_end = len(llm_text) if newline == -1 else newline
        line = llm_text[cursor:line_end]

        if not first and _SECTION_RE.match(line):
            break
        first = False

        body = line.strip()
        if not body or body.startswith("```"):
            if not body and seen_content:
                break
        else:
            seen_content = True
            lead = len(line) - len(line.lstrip())
            marker = _LIST_MARKER_RE.match(line, lead)
            start = marker.end() if marker else lead
            call = line[start:].rstrip().rstrip(";").rstrip()
            result = _parse_call(call, cursor + start)
            if isinstance(result, ParseError):
                errors.append(result)
            else:
                actions.append(result)

        if newline == -1:
            break
        cursor = newline + 1

    return actions, errors
