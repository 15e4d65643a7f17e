/**
 * DOM builders for suggestion diffs and the editor text panel.
 *
 * A suggestion's display script comes from the server as plain/strike/insert
 * steps; the editor embeds it inline (Inline mode) or shows the original
 * text with the script in an overlay (Hover mode). Underline style and color
 * identify the component that produced the suggestion.
 */

import type { DisplayStep, DocumentState, SuggestionView, ViewMode } from './types.js';

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

const STEP_CLASSES: Record<DisplayStep['kind'], string> = {
  plain: 'et-plain',
  strike: 'et-strike',
  insert: 'et-insert',
};

/** The word-level diff of one suggestion, as a row of styled spans. */
export function renderDisplayScript(steps: DisplayStep[]): HTMLElement {
  const wrapper = el('span', 'et-diff');
  for (const step of steps) {
    const node = el('span', STEP_CLASSES[step.kind], step.text);
    if (step.kind === 'strike') node.style.textDecoration = 'line-through';
    wrapper.appendChild(node);
  }
  return wrapper;
}

function applyUnderline(node: HTMLElement, suggestion: SuggestionView): void {
  node.style.textDecorationLine = 'underline';
  node.style.textDecorationStyle = suggestion.underline.style;
  node.style.textDecorationColor = suggestion.underline.color;
}

export interface SuggestionActions {
  accept(sid: string): void;
  dismiss(sid: string): void;
  verify(sid: string): void;
}

/** The hover menu: Accept/Dismiss, plus Verify and the warning for new-information edits. */
export function renderSuggestionMenu(
  suggestion: SuggestionView,
  actions: SuggestionActions,
): HTMLElement {
  const menu = el('div', 'et-menu');
  menu.dataset.suggestion = suggestion.id;
  if (suggestion.warning) {
    const warning = el('div', 'et-warning', suggestion.warning);
    warning.setAttribute('role', 'alert');
    menu.appendChild(warning);
  }
  for (const action of suggestion.menu) {
    const button = el('button', `et-action et-action-${action}`, action);
    button.addEventListener('click', () => {
      if (action === 'accept') actions.accept(suggestion.id);
      else if (action === 'dismiss') actions.dismiss(suggestion.id);
      else if (action === 'verify') actions.verify(suggestion.id);
    });
    menu.appendChild(button);
  }
  return menu;
}

/** One decorated suggestion occurrence for the text panel. */
export function renderSuggestion(
  suggestion: SuggestionView,
  mode: ViewMode,
  actions: SuggestionActions,
): HTMLElement {
  const holder = el('span', 'et-suggestion');
  holder.dataset.suggestion = suggestion.id;
  holder.dataset.origin = suggestion.origin;
  if (mode === 'inline') {
    const diff = renderDisplayScript(suggestion.display);
    applyUnderline(diff, suggestion);
    holder.appendChild(diff);
  } else {
    const original = el('span', 'et-original', suggestion.original_text);
    applyUnderline(original, suggestion);
    holder.appendChild(original);
    const overlay = el('span', 'et-overlay');
    overlay.appendChild(renderDisplayScript(suggestion.display));
    holder.appendChild(overlay);
  }
  holder.appendChild(renderSuggestionMenu(suggestion, actions));
  return holder;
}

function pendingVisible(doc: DocumentState): SuggestionView[] {
  return doc.suggestions
    .filter((s) => s.status === 'pending' && s.visible && s.span !== null)
    .sort((a, b) => (a.span as { start: number }).start - (b.span as { start: number }).start);
}

/**
 * The editor text panel: document content with pending suggestions embedded
 * at their spans. Renders safely on empty documents.
 */
export function renderEditorContent(
  doc: DocumentState,
  mode: ViewMode,
  actions: SuggestionActions,
): HTMLElement {
  const panel = el('div', 'et-content');
  panel.dataset.version = String(doc.version_id);
  let cursor = 0;
  for (const suggestion of pendingVisible(doc)) {
    const span = suggestion.span as { start: number; end: number };
    if (span.start > cursor) {
      panel.appendChild(el('span', 'et-text', doc.content.slice(cursor, span.start)));
    }
    panel.appendChild(renderSuggestion(suggestion, mode, actions));
    cursor = span.end;
  }
  if (cursor < doc.content.length) {
    panel.appendChild(el('span', 'et-text', doc.content.slice(cursor)));
  }
  if (doc.content.length === 0 && panel.childNodes.length === 0) {
    panel.appendChild(el('span', 'et-text', ''));
  }
  return panel;
}
