/**
 * Audit mode: a non-editable view of the latest draft with every surviving
 * system-originated span highlighted. Unlabeled spans show whether they
 * introduce new information (yellow) or not (grey); labeled spans turn
 * green (Verified), red (Incorrect), or orange (Not Sure).
 */

import type { AuditExport, TraceSpanView } from './types.js';
import { el } from './render.js';

/** Highlight class to background color; one entry per class, nothing else. */
export const HIGHLIGHT_COLORS: Record<string, string> = {
  new_info_unlabeled: 'yellow',
  no_new_info: 'grey',
  verified: 'green',
  incorrect: 'red',
  not_sure: 'orange',
};

export const LABEL_ACTIONS = ['verified', 'incorrect', 'not_sure'] as const;

export const LABEL_TITLES: Record<string, string> = {
  verified: 'Verified',
  incorrect: 'Incorrect',
  not_sure: 'Not Sure',
  not_enough_time: 'Not Enough Time',
  unlabeled: 'Unlabeled',
};

export interface AuditActions {
  label(editId: string, label: string): void;
  verify(editId: string): void;
}

function renderAuditSpan(span: TraceSpanView, actions: AuditActions): HTMLElement {
  const node = el('span', `et-audit-span et-${span.highlight_class}`, span.text);
  node.dataset.editId = span.edit_id;
  node.dataset.label = span.label;
  node.style.backgroundColor = HIGHLIGHT_COLORS[span.highlight_class] ?? 'transparent';
  node.title = LABEL_TITLES[span.label] ?? span.label;
  const menu = el('span', 'et-audit-menu');
  const verifyButton = el('button', 'et-action et-action-verify', 'verify');
  verifyButton.addEventListener('click', () => actions.verify(span.edit_id));
  menu.appendChild(verifyButton);
  for (const label of LABEL_ACTIONS) {
    const button = el('button', `et-action et-label-${label}`, LABEL_TITLES[label] ?? label);
    button.addEventListener('click', () => actions.label(span.edit_id, label));
    menu.appendChild(button);
  }
  node.appendChild(menu);
  return node;
}

/** The read-only audit panel over an audit export. */
export function renderAuditView(audit: AuditExport, actions: AuditActions): HTMLElement {
  const panel = el('div', 'et-audit');
  panel.setAttribute('aria-readonly', 'true');
  panel.dataset.doc = audit.doc_id;
  let cursor = 0;
  for (const span of audit.spans) {
    if (span.start > cursor) {
      panel.appendChild(el('span', 'et-text', audit.content.slice(cursor, span.start)));
    }
    panel.appendChild(renderAuditSpan(span, actions));
    cursor = span.end;
  }
  if (cursor < audit.content.length) {
    panel.appendChild(el('span', 'et-text', audit.content.slice(cursor)));
  }
  return panel;
}
