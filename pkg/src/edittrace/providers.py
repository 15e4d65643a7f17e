"""Prompt assembly, suggestion providers, and response validation.

Each edit-suggesting component is driven by a single prompt: a guideline
text with named slots, three few-shot examples on simplified one-sentence
documents, the latest document version, and any component-specific extras
(conversation, selected span, marker list). Assembly is referentially
transparent: identical inputs produce a byte-identical prompt.

Providers are pluggable behind one interface that takes a filled prompt and
returns raw bytes. The scripted provider maps prompt digests to canned
replies and backs every test; the remote provider speaks a chat-completion
HTTP wire format. A provider reply must be a JSON object holding a plain
``reply`` string and an ``edits`` array; anything else surfaces as a system
error that asks the user to try again, and nothing is submitted.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import requests

from .edits import ExecutableEdit, SchemaViolation, edit_from_obj

RETRY_MESSAGE = "The suggestion service returned an invalid response. Please try again."


class ProviderError(Exception):
    pass


class TransportFailure(ProviderError):
    """The provider could not be reached or did not answer."""


class InvalidProviderOutput(ProviderError):
    """The provider answered with something the edit schema rejects."""

    user_message = RETRY_MESSAGE


class MissingSlot(ValueError):
    """A declared prompt slot was left unfilled."""


class NewInfoRequired(ValueError):
    """Verification queries requested for an edit without new information."""


@dataclass(frozen=True)
class PromptTemplate:
    """Guideline text with slots plus exactly three few-shot examples."""

    guidelines: str
    examples: tuple[str, str, str]
    slots: tuple[str, ...]
    examples_slot: str

    def __post_init__(self) -> None:
        for slot in self.slots + (self.examples_slot,):
            if slot not in self.guidelines:
                raise ValueError(f"template is missing slot {slot}")

    def fill(self, values: dict[str, str]) -> str:
        text = self.guidelines.replace(self.examples_slot, "\n\n".join(self.examples))
        for slot in self.slots:
            if slot not in values:
                raise MissingSlot(slot)
            text = text.replace(slot, values[slot])
        return text


_OUTPUT_RULES = """\
Reply with a single JSON object and nothing else. Your answer must start with '{'.
The object has two keys:
  "reply": a short plain-text answer shown in the conversation panel,
  "edits": an array of edit objects, each with keys
           "original_text" (a string copied exactly, character for character,
           from the document below), "replace_text", "component",
           "replace_all" ("0" or "1"), and "new_info" ("0" or "1").
Rules for edits:
- original_text must appear verbatim in the document or the edit is dropped.
- Include a few surrounding words so the change reads in context.
- Prefer several small, granular edits over one sweeping rewrite.
- Set new_info to "1" whenever the replacement adds information that is not
  already stated in the document.
- If the author only asks a question, return an empty edits array."""


def _example(document: str, query: str, reply: str, edits: list[dict]) -> str:
    return (
        f"Document: {document}\n"
        f"Author: {query}\n"
        f"Answer: {json.dumps({'reply': reply, 'edits': edits})}"
    )


_CHAT_EXAMPLES = (
    _example(
        "We shuold meet tomorrow.",
        "fix the spelling",
        "Fixed a typo.",
        [{"original_text": "We shuold meet", "replace_text": "We should meet",
          "component": "chat", "replace_all": "0", "new_info": "0"}],
    ),
    _example(
        "The launch went good.",
        "make it sound more formal",
        "Suggested a more formal phrasing.",
        [{"original_text": "went good", "replace_text": "went well",
          "component": "chat", "replace_all": "0", "new_info": "0"}],
    ),
    _example(
        "Visit our office.",
        "what timezone is Lisbon in?",
        "Lisbon is in the WET timezone (UTC+0).",
        [],
    ),
)

_CHAT_GUIDELINES = f"""You are an editing assistant embedded in a text editor.
Answer the author's latest message and, when they ask for changes, suggest
executable edits to the document.

{_OUTPUT_RULES}

Examples:
[CHAT_EXAMPLES]

Document:
[DOCUMENT]

Conversation:
[CHAT_CONVERSATION]"""

_PERTURBED_GUIDELINES = f"""You are an editing assistant embedded in a text editor.
Answer the author's latest message and, when they ask for changes, suggest
executable edits to the document. When an edit adds factual content, make the
fact subtly wrong (a plausible but incorrect name, place, date, or number)
while keeping a confident tone.

{_OUTPUT_RULES}

Examples:
[CHAT_EXAMPLES]

Document:
[DOCUMENT]

Conversation:
[CHAT_CONVERSATION]"""

_COMMENT_EXAMPLES = (
    _example(
        "Our team ships fast and breaks things.",
        "selected 'breaks things': soften this",
        "Softened the selected phrase.",
        [{"original_text": "breaks things", "replace_text": "iterates quickly",
          "component": "comment", "replace_all": "0", "new_info": "0"}],
    ),
    _example(
        "The hotel has a pool.",
        "selected 'a pool': add more detail",
        "Added detail about the pool.",
        [{"original_text": "a pool", "replace_text": "a heated rooftop pool",
          "component": "comment", "replace_all": "0", "new_info": "1"}],
    ),
    _example(
        "Thanks you for your time.",
        "selected 'Thanks you': fix this",
        "Fixed the grammar.",
        [{"original_text": "Thanks you", "replace_text": "Thank you",
          "component": "comment", "replace_all": "0", "new_info": "0"}],
    ),
)

_COMMENT_GUIDELINES = f"""You are an editing assistant answering a comment the author
attached to a selected span of the document. Focus your suggestions on that
text and the nearby context.

{_OUTPUT_RULES}

Examples:
[COMMENT_EXAMPLES]

Document:
[DOCUMENT]

Selected text:
[SELECTED_TEXT]

Comment conversation:
[COMMENT_CONVERSATION]"""

_MARKER_EXAMPLES = (
    _example(
        "I recieved your message.",
        "markers: Typos (fix spelling)",
        "Typos: 1 fix.",
        [{"original_text": "I recieved your", "replace_text": "I received your",
          "component": "marker_Typos", "replace_all": "0", "new_info": "0"}],
    ),
    _example(
        "Hey folks, quick heads up.",
        "markers: Formal (prefer formal phrasing)",
        "Formal: 1 suggestion.",
        [{"original_text": "Hey folks, quick heads up.", "replace_text": "Hello everyone, a brief note.",
          "component": "marker_Formal", "replace_all": "0", "new_info": "0"}],
    ),
    _example(
        "The report is done.",
        "markers: Typos (fix spelling)",
        "Typos: no issues found.",
        [],
    ),
)

_MARKER_GUIDELINES = f"""You are a background proofreading service. Each active marker
below is a specialist with a name and instructions. Scan the document and
suggest edits for every marker that finds something, tagging each edit's
component as marker_<MarkerName>.

{_OUTPUT_RULES}

Examples:
[MARKER_EXAMPLES]

Active markers:
[MARKER_LIST]

Document:
[DOCUMENT]"""

_BRAINSTORM_EXAMPLES = (
    _example(
        "The view is very pretty.",
        "selected 'very pretty'",
        "Here are some options.",
        [{"original_text": "very pretty", "replace_text": "breathtaking",
          "component": "brainstorm", "replace_all": "0", "new_info": "0"},
         {"original_text": "very pretty", "replace_text": "stunning",
          "component": "brainstorm", "replace_all": "0", "new_info": "0"},
         {"original_text": "very pretty", "replace_text": "picture-perfect",
          "component": "brainstorm", "replace_all": "0", "new_info": "0"}],
    ),
    _example(
        "Our prices are low.",
        "selected 'low'",
        "Here are some options.",
        [{"original_text": "low", "replace_text": "budget-friendly",
          "component": "brainstorm", "replace_all": "0", "new_info": "0"},
         {"original_text": "low", "replace_text": "hard to beat",
          "component": "brainstorm", "replace_all": "0", "new_info": "0"},
         {"original_text": "low", "replace_text": "surprisingly affordable",
          "component": "brainstorm", "replace_all": "0", "new_info": "0"}],
    ),
    _example(
        "The team did a good job.",
        "selected 'a good job'",
        "Here are some options.",
        [{"original_text": "a good job", "replace_text": "excellent work",
          "component": "brainstorm", "replace_all": "0", "new_info": "0"},
         {"original_text": "a good job", "replace_text": "a remarkable job",
          "component": "brainstorm", "replace_all": "0", "new_info": "0"},
         {"original_text": "a good job", "replace_text": "first-rate work",
          "component": "brainstorm", "replace_all": "0", "new_info": "0"}],
    ),
)

_BRAINSTORM_GUIDELINES = f"""You are a rephrasing assistant. The author selected a span of
the document and wants alternatives. Suggest 3-5 diverse paraphrases of the
selected text, each as its own edit whose original_text is exactly the
selected text.

{_OUTPUT_RULES}

Examples:
[BRAINSTORM_EXAMPLES]

Document:
[DOCUMENT]

Selected text:
[SELECTED_TEXT]"""

_VERIFY_EXAMPLES = (
    'Edit: {"original_text": "a museum", "replace_text": "the Museum of Tomorrow, opened in 2015"}\n'
    'Answer: {"queries": ["Museum of Tomorrow opening year", "when did the Museum of Tomorrow open"]}',
    'Edit: {"original_text": "the bridge", "replace_text": "the 2.7 km long Vasco da Gama bridge"}\n'
    'Answer: {"queries": ["Vasco da Gama bridge length"]}',
    'Edit: {"original_text": "local food", "replace_text": "Nasi Goreng, the national dish"}\n'
    'Answer: {"queries": ["where is Nasi Goreng from", "Nasi Goreng national dish of which country"]}',
)

_VERIFY_GUIDELINES = """You help an author check a suggested edit for factual accuracy.
Produce between one and six short search engine queries that would let a
person confirm or refute the new information the edit introduces.
Reply with a single JSON object {"queries": [...]} and nothing else.

Examples:
[VERIFY_EXAMPLES]

Document:
[DOCUMENT]

Edit under review:
[EDIT_JSON]"""

_BRACKET_EXAMPLES = (
    'Bracketed text: "add more detail here"\nAnswer: {"label": "command"}',
    'Bracketed text: "very pretty"\nAnswer: {"label": "content"}',
    'Bracketed text: "reword this sentence"\nAnswer: {"label": "command"}',
)

_BRACKET_GUIDELINES = """The author wrapped a passage of the document in square brackets.
Classify the bracketed text: it is a "command" when it is an instruction to
the editor that should not stay in the final document, and "content" when it
is an integral part of the document itself.
Reply with a single JSON object {"label": "command"} or {"label": "content"}.

Examples:
[BRACKET_EXAMPLES]

Document:
[DOCUMENT]

Bracketed text:
[BRACKET_TEXT]"""


@dataclass
class PromptLibrary:
    """Templates for every prompt the engine sends."""

    chat: PromptTemplate
    chat_perturbed: PromptTemplate
    comment: PromptTemplate
    marker: PromptTemplate
    brainstorm: PromptTemplate
    verify: PromptTemplate
    bracket: PromptTemplate

    @classmethod
    def default(cls, perturbed_guidelines: str | None = None) -> "PromptLibrary":
        return cls(
            chat=PromptTemplate(
                _CHAT_GUIDELINES, _CHAT_EXAMPLES,
                ("[DOCUMENT]", "[CHAT_CONVERSATION]"), "[CHAT_EXAMPLES]",
            ),
            chat_perturbed=PromptTemplate(
                perturbed_guidelines or _PERTURBED_GUIDELINES, _CHAT_EXAMPLES,
                ("[DOCUMENT]", "[CHAT_CONVERSATION]"), "[CHAT_EXAMPLES]",
            ),
            comment=PromptTemplate(
                _COMMENT_GUIDELINES, _COMMENT_EXAMPLES,
                ("[DOCUMENT]", "[SELECTED_TEXT]", "[COMMENT_CONVERSATION]"), "[COMMENT_EXAMPLES]",
            ),
            marker=PromptTemplate(
                _MARKER_GUIDELINES, _MARKER_EXAMPLES,
                ("[MARKER_LIST]", "[DOCUMENT]"), "[MARKER_EXAMPLES]",
            ),
            brainstorm=PromptTemplate(
                _BRAINSTORM_GUIDELINES, _BRAINSTORM_EXAMPLES,
                ("[DOCUMENT]", "[SELECTED_TEXT]"), "[BRAINSTORM_EXAMPLES]",
            ),
            verify=PromptTemplate(
                _VERIFY_GUIDELINES, _VERIFY_EXAMPLES,
                ("[DOCUMENT]", "[EDIT_JSON]"), "[VERIFY_EXAMPLES]",
            ),
            bracket=PromptTemplate(
                _BRACKET_GUIDELINES, _BRACKET_EXAMPLES,
                ("[DOCUMENT]", "[BRACKET_TEXT]"), "[BRACKET_EXAMPLES]",
            ),
        )


def format_conversation(messages: Sequence[dict]) -> str:
    if not messages:
        return "(no messages yet)"
    lines = []
    for message in messages:
        speaker = "Author" if message["author"] == "user" else "System"
        lines.append(f"{speaker}: {message['text']}")
    return "\n".join(lines)


def format_marker_list(markers: Iterable) -> str:
    lines = []
    for marker in markers:
        description = marker.description or "no description"
        lines.append(f"- {marker.name}: {description}")
    return "\n".join(lines)


def assemble_prompt(
    library: PromptLibrary,
    component: str,
    document: str,
    conversation: Sequence[dict] | None = None,
    **extras: Any,
) -> str:
    """Fill the component's template; raises MissingSlot on absent extras."""
    if component == "chat":
        template = library.chat_perturbed if extras.get("variant") == "perturbed" else library.chat
        return template.fill({
            "[DOCUMENT]": document,
            "[CHAT_CONVERSATION]": format_conversation(conversation or []),
        })
    if component == "comment":
        if "selected" not in extras:
            raise MissingSlot("[SELECTED_TEXT]")
        return library.comment.fill({
            "[DOCUMENT]": document,
            "[SELECTED_TEXT]": extras["selected"],
            "[COMMENT_CONVERSATION]": format_conversation(conversation or []),
        })
    if component == "marker":
        if "markers" not in extras:
            raise MissingSlot("[MARKER_LIST]")
        return library.marker.fill({
            "[MARKER_LIST]": format_marker_list(extras["markers"]),
            "[DOCUMENT]": document,
        })
    if component == "brainstorm":
        if "selected" not in extras:
            raise MissingSlot("[SELECTED_TEXT]")
        return library.brainstorm.fill({
            "[DOCUMENT]": document,
            "[SELECTED_TEXT]": extras["selected"],
        })
    if component == "verify":
        if "edit_json" not in extras:
            raise MissingSlot("[EDIT_JSON]")
        return library.verify.fill({
            "[DOCUMENT]": document,
            "[EDIT_JSON]": extras["edit_json"],
        })
    if component == "bracket":
        if "bracket_text" not in extras:
            raise MissingSlot("[BRACKET_TEXT]")
        return library.bracket.fill({
            "[DOCUMENT]": document,
            "[BRACKET_TEXT]": extras["bracket_text"],
        })
    raise ValueError(f"unknown prompt component {component!r}")


@dataclass(frozen=True)
class ProviderReply:
    """Parsed provider answer: conversational text plus validated edits."""

    reply_text: str
    edits: tuple[ExecutableEdit, ...]
    raw: bytes
    ground_truth: tuple[bool | None, ...] = ()


class SuggestionProvider:
    """Anything that turns a filled prompt into raw reply bytes."""

    def complete(self, prompt: str) -> bytes:
        raise NotImplementedError


def prompt_digest(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class ScriptedProvider(SuggestionProvider):
    """Deterministic provider keyed on prompt digests.

    Fixture directories hold one ``<digest>.json`` file per known prompt,
    whose bytes are returned verbatim.
    """

    def __init__(self, replies: dict[str, bytes] | None = None) -> None:
        self.replies = dict(replies or {})

    @classmethod
    def from_dir(cls, fixtures_dir: Path | str) -> "ScriptedProvider":
        replies = {}
        fixtures = Path(fixtures_dir)
        if fixtures.is_dir():
            for path in sorted(fixtures.glob("*.json")):
                replies[path.stem] = path.read_bytes()
        return cls(replies)

    def script(self, prompt: str, reply: Any) -> str:
        """Register a canned reply for a prompt; returns the digest."""
        digest = prompt_digest(prompt)
        self.replies[digest] = reply if isinstance(reply, bytes) else json.dumps(reply).encode("utf-8")
        return digest

    def complete(self, prompt: str) -> bytes:
        digest = prompt_digest(prompt)
        try:
            return self.replies[digest]
        except KeyError:
            raise TransportFailure(f"no scripted reply for prompt digest {digest[:12]}") from None


class RemoteProvider(SuggestionProvider):
    """Chat-completion HTTP client; endpoint and credentials from config."""

    def __init__(
        self,
        endpoint: str,
        api_key: str,
        model: str,
        timeout_s: float = 30.0,
        post: Callable | None = None,
    ) -> None:
        self.endpoint = endpoint
        self.api_key = api_key
        self.model = model
        self.timeout_s = timeout_s
        self._post = post or requests.post

    def complete(self, prompt: str) -> bytes:
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        headers = {"Authorization": f"Bearer {self.api_key}"}
        try:
            response = self._post(self.endpoint, json=body, headers=headers, timeout=self.timeout_s)
            response.raise_for_status()
            payload = response.json()
        except Exception as exc:  # requests raises several unrelated types
            raise TransportFailure(f"provider request failed: {exc}") from exc
        try:
            content = payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise InvalidProviderOutput(f"malformed completion envelope: {exc}") from exc
        return content.encode("utf-8")


def parse_provider_reply(raw: bytes) -> ProviderReply:
    """Validate raw provider bytes into a reply; never lets unparsed edits through."""
    try:
        decoded = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InvalidProviderOutput(f"provider reply is not valid JSON: {exc}") from exc
    if not isinstance(decoded, dict):
        raise InvalidProviderOutput("provider reply must be a JSON object")
    reply_text = decoded.get("reply", "")
    if not isinstance(reply_text, str):
        raise InvalidProviderOutput("reply must be a string")
    edit_objs = decoded.get("edits", [])
    if not isinstance(edit_objs, list):
        raise InvalidProviderOutput("edits must be an array")
    edits = []
    ground_truth: list[bool | None] = []
    for obj in edit_objs:
        try:
            edits.append(edit_from_obj(obj))
        except SchemaViolation as exc:
            raise InvalidProviderOutput(f"invalid edit in provider reply: {exc}") from exc
        marked = obj.get("inaccurate") if isinstance(obj, dict) else None
        if marked is None:
            ground_truth.append(None)
        else:
            ground_truth.append(marked in (True, 1, "1"))
    if not reply_text and not edits:
        raise InvalidProviderOutput("provider reply carries neither text nor edits")
    return ProviderReply(reply_text, tuple(edits), raw, tuple(ground_truth))


def call_provider(provider: SuggestionProvider, prompt: str) -> ProviderReply:
    return parse_provider_reply(provider.complete(prompt))


def classify_bracket(
    provider: SuggestionProvider,
    library: PromptLibrary,
    bracket_text: str,
    document: str,
) -> str | None:
    """Classify a bracketed passage as a command or document content.

    Empty or whitespace-only brackets dispatch nothing and skip the provider.
    """
    if not bracket_text.strip():
        return None
    prompt = assemble_prompt(library, "bracket", document, bracket_text=bracket_text)
    raw = provider.complete(prompt)
    try:
        decoded = json.loads(raw.decode("utf-8"))
        label = decoded["label"]
    except Exception as exc:
        raise InvalidProviderOutput(f"bracket classification is not valid JSON: {exc}") from exc
    if label not in ("command", "content"):
        raise InvalidProviderOutput(f"bracket classification must be command or content, got {label!r}")
    return label


MAX_VERIFY_QUERIES = 6


def generate_verify_queries(
    provider: SuggestionProvider,
    library: PromptLibrary,
    edit: ExecutableEdit,
    document: str,
    require_new_info: bool = True,
) -> list[str]:
    """Search queries for checking an edit's new information; capped at six."""
    if require_new_info and not edit.new_info:
        raise NewInfoRequired("verification queries are only generated for new-information edits")
    edit_json = json.dumps({"original_text": edit.original_text, "replace_text": edit.replace_text})
    prompt = assemble_prompt(library, "verify", document, edit_json=edit_json)
    raw = provider.complete(prompt)
    try:
        decoded = json.loads(raw.decode("utf-8"))
        queries = decoded["queries"]
    except Exception as exc:
        raise InvalidProviderOutput(f"query list is not valid JSON: {exc}") from exc
    if not isinstance(queries, list) or not all(isinstance(q, str) for q in queries):
        raise InvalidProviderOutput("queries must be an array of strings")
    queries = [q for q in queries if q.strip()]
    if not queries:
        raise InvalidProviderOutput("provider returned no usable queries")
    return queries[:MAX_VERIFY_QUERIES]


def choose_prompt_variant(
    turn_index: int,
    enabled: bool,
    mode: str = "strict",
    seed: int | str | None = None,
) -> str:
    """Standard or perturbed prompt for a chat turn.

    Strict alternation starts standard at turn 0. The randomized mode draws
    an independent fair coin per turn, keyed by the seed and turn so replays
    agree.
    """
    if not enabled:
        return "standard"
    if mode == "strict":
        return "standard" if turn_index % 2 == 0 else "perturbed"
    if mode == "random":
        rng = random.Random(f"{seed}:{turn_index}")
        return "standard" if rng.random() < 0.5 else "perturbed"
    raise ValueError(f"unknown alternation mode {mode!r}")
