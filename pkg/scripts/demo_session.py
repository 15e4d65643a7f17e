"""Drive a complete scripted editing session and print the audit report.

Builds a document store under ./demo_store, runs a session touching every
component (markers, chat, comment, brainstorm, warn/verify, audit), and
prints the resulting audit export. Everything is deterministic: the
provider is scripted, keyed on prompt digests.

Usage: python scripts/demo_session.py [store_dir]
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from edittrace.config import EngineConfig
from edittrace.providers import PromptLibrary, ScriptedProvider, assemble_prompt
from edittrace.store import DocumentStore, canonical_json_bytes

TEMPLATE = (
    "Hey Riley, wanna book your next getaway? Our team has grate deals on "
    "city breaks this fall. Dont wait, spots fill fast. Cheers, Alex"
)

LIBRARY = PromptLibrary.default()


def main() -> None:
    store_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo_store")
    store = DocumentStore(store_dir, config=EngineConfig())
    provider = ScriptedProvider()
    session = store.create(TEMPLATE)
    print(f"created document {session.doc_id} in {store_dir}/")

    # a proactive marker fixes the typo
    marker = session.create_marker("Typos", "wavy", "#d32f2f", "Fix typos and spelling.")
    provider.script(
        assemble_prompt(LIBRARY, "marker", session.content, markers=[marker]),
        {
            "reply": "Typos: 2 fixes.",
            "edits": [
                {"original_text": "grate deals", "replace_text": "great deals", "component": "marker_Typos"},
                {"original_text": "Dont wait", "replace_text": "Don't wait", "component": "marker_Typos"},
            ],
        },
    )
    for record in session.run_markers(provider):
        session.accept(record.id)

    # a chat turn adds a fact that needs verification
    message = "suggest a destination detail"
    provider.script(
        assemble_prompt(
            LIBRARY,
            "chat",
            session.content,
            conversation=session.chat_messages + [{"author": "user", "text": message}],
        ),
        {
            "reply": "Added a destination detail.",
            "edits": [
                {
                    "original_text": "city breaks",
                    "replace_text": "city breaks, including Lisbon with its famous tram line 28",
                    "component": "chat",
                    "new_info": "1",
                    "inaccurate": "0",
                }
            ],
        },
    )
    result = session.chat_message(provider, message)
    fact_sid = result["suggestions"][0]["id"]
    print(f"chat suggested {fact_sid} with warning: {result['suggestions'][0]['warning']!r}")

    the_edit = session.records[fact_sid].edit
    provider.script(
        assemble_prompt(
            LIBRARY,
            "verify",
            session.content,
            edit_json=json.dumps(
                {"original_text": the_edit.original_text, "replace_text": the_edit.replace_text}
            ),
        ),
        {"queries": ["lisbon tram 28", "lisbon famous tram line"]},
    )
    verification = session.start_verification(provider, fact_sid)
    session.visit_query(verification.id, 0)
    session.label_verification(verification.id, "verified")
    session.accept(fact_sid)

    # audit pass
    session.switch_mode("audit")
    session.switch_mode("edit")

    store.flush(session)
    print("--- audit export ---")
    print(canonical_json_bytes(session.audit_export()).decode("utf-8"), end="")
    print(f"replay it with: edittrace replay {store_dir}/{session.doc_id}/events.log")


if __name__ == "__main__":
    main()
