/**
 * Accept-to-audit round trip against a live scripted-provider backend.
 *
 * The backend (test/backend/serve.py) serves the real HTTP API with canned
 * provider replies for the flow described in manifest.json. The test drives
 * it exclusively through the API client and the DOM the views render.
 */

import { beforeAll, describe, expect, inject, it } from 'vitest';
import { readFileSync } from 'node:fs';
import { fileURLToPath } from 'node:url';
import path from 'node:path';

import { ApiClient } from '../src/api.js';
import { renderAuditView } from '../src/audit.js';
import { renderEditorContent } from '../src/render.js';
import { renderVerifyPanel } from '../src/panels.js';
import type { DocumentState, SuggestionView } from '../src/types.js';

const here = path.dirname(fileURLToPath(import.meta.url));
const manifest = JSON.parse(readFileSync(path.join(here, 'backend', 'manifest.json'), 'utf-8'));

const PARIS_STEPS = [
  ['strike', 'Lets'],
  ['insert', "Let's"],
  ['plain', ' plan a trip '],
  ['strike', 'too'],
  ['insert', 'to'],
  ['plain', ' Paris.'],
];

let api: ApiClient;

beforeAll(() => {
  api = new ApiClient(inject('backendUrl'));
});

function suggestionByOriginal(doc: DocumentState, original: string): SuggestionView {
  const found = doc.suggestions.find((s) => s.original_text === original);
  if (!found) throw new Error(`no suggestion for ${original}`);
  return found;
}

describe('accept → audit round trip', () => {
  it('walks the full flow against the scripted backend', async () => {
    const created = await api.createDocument(manifest.template);
    const docId = created.id;

    // chat turn: the server returns the canonical typo fix and a warned fact
    const chatResult = await api.chat(docId, manifest.chatMessage);
    expect(chatResult.reply).toBe(manifest.chatReply);
    expect(chatResult.suggestions).toHaveLength(2);

    let doc = await api.getDocument(docId);
    const paris = suggestionByOriginal(doc, 'Lets plan a trip too Paris.');
    const fact = suggestionByOriginal(doc, 'The food scene');

    // the server's display script for the typo fix is the canonical sequence
    expect(paris.display.map((s) => [s.kind, s.text])).toEqual(PARIS_STEPS);

    // rendered editor carries the diff, the underlines, and the verbatim warning
    const accepted: string[] = [];
    const panel = renderEditorContent(doc, 'inline', {
      accept: (sid) => accepted.push(sid),
      dismiss: () => {},
      verify: () => {},
    });
    expect(panel.textContent).toContain("Let's");
    const warning = panel.querySelector('.et-warning');
    expect(warning?.textContent).toBe('Edit contains new unverified information');

    // verification: queries come from the scripted provider, open externally
    const { verification } = await api.startVerification(fact.id);
    expect(verification.queries).toEqual(manifest.verifyQueries);
    const verifyPanel = renderVerifyPanel(verification, { visit() {}, label() {} });
    const links = Array.from(verifyPanel.querySelectorAll('a.et-query-link')) as HTMLAnchorElement[];
    expect(links.map((l) => l.textContent)).toEqual(manifest.verifyQueries);
    for (const link of links) {
      expect(link.target).toBe('_blank');
      expect(link.href).toContain('q=');
    }
    await api.visitQuery(verification.id, 0);

    // accept both suggestions by clicking their rendered accept buttons
    const clickAccept = (sid: string) => {
      const button = panel.querySelector(
        `.et-suggestion[data-suggestion="${sid}"] .et-action-accept`,
      ) as HTMLButtonElement;
      button.click();
    };
    clickAccept(paris.id);
    clickAccept(fact.id);
    expect(accepted).toEqual([paris.id, fact.id]);
    for (const sid of accepted) {
      await api.accept(docId, sid);
    }

    doc = await api.getDocument(docId);
    expect(doc.content).toBe(
      "Let's plan a trip to Paris. The Michelin-starred food scene is amazing. Cheers, Sam",
    );

    // audit mode: surviving system spans carry the class colors
    await api.switchMode(docId, 'audit');
    let audit = await api.getAudit(docId);
    const classesByEdit = new Map(audit.spans.map((s) => [s.edit_id, s.highlight_class]));
    expect(classesByEdit.get(paris.id)).toBe('no_new_info');
    expect(classesByEdit.get(fact.id)).toBe('new_info_unlabeled');

    let auditPanel = renderAuditView(audit, { label() {}, verify() {} });
    const yellow = auditPanel.querySelector('.et-new_info_unlabeled') as HTMLElement;
    expect(yellow.style.backgroundColor).toBe('yellow');
    expect(yellow.textContent).toContain('Michelin-starred');
    const grey = auditPanel.querySelector('.et-no_new_info') as HTMLElement;
    expect(grey.style.backgroundColor).toBe('grey');

    // the auditor labels the fact Verified; its highlight turns green
    await api.labelSuggestion(fact.id, 'verified');
    audit = await api.getAudit(docId);
    const factSpans = audit.spans.filter((s) => s.edit_id === fact.id);
    expect(factSpans.length).toBeGreaterThan(0);
    for (const span of factSpans) {
      expect(span.highlight_class).toBe('verified');
    }
    auditPanel = renderAuditView(audit, { label() {}, verify() {} });
    const green = auditPanel.querySelector('.et-verified') as HTMLElement;
    expect(green.style.backgroundColor).toBe('green');

    // back to edit mode: verification info stays visible, unlabeled spans
    // were assigned Not Enough Time at audit close
    await api.switchMode(docId, 'edit');
    doc = await api.getDocument(docId);
    expect(doc.mode).toBe('edit');
    const factTrace = doc.trace.filter((t) => t.edit_id === fact.id);
    for (const trace of factTrace) {
      expect(trace.label).toBe('verified');
    }
    const parisTrace = doc.trace.filter((t) => t.edit_id === paris.id);
    for (const trace of parisTrace) {
      expect(trace.label).toBe('not_enough_time');
    }
  });

  it('surfaces stale accepts as lifecycle outcomes, not content corruption', async () => {
    const created = await api.createDocument(manifest.template);
    const docId = created.id;
    await api.chat(docId, manifest.chatMessage);
    const doc = await api.getDocument(docId);
    const fact = suggestionByOriginal(doc, 'The food scene');
    const start = doc.content.indexOf('The food scene');
    await api.manualEdit(docId, start, start + 'The food scene'.length, 'Dining there');

    await expect(api.accept(docId, fact.id)).rejects.toMatchObject({ status: 409 });
    const after = await api.getDocument(docId);
    expect(after.content).toContain('Dining there is amazing.');
    const record = after.suggestions.find((s) => s.id === fact.id);
    expect(record?.status).toBe('implicitly_dismissed');
  });
});
