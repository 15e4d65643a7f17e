/**
 * Right-hand control panels: markers, chat, comments, brainstorm dropdown,
 * and the verify tab with its outbound search links.
 */

import type {
  BrainstormResult,
  CommentView,
  DocumentState,
  MarkerView,
  MessageView,
  VerificationView,
} from './types.js';
import { el } from './render.js';
import { LABEL_ACTIONS, LABEL_TITLES } from './audit.js';

export interface MarkerActions {
  toggle(markerId: string, visible: boolean): void;
  refresh(markerId: string): void;
  remove(markerId: string): void;
}

export function renderMarkersPanel(markers: MarkerView[], actions: MarkerActions): HTMLElement {
  const panel = el('div', 'et-markers');
  panel.appendChild(el('h3', 'et-panel-title', 'Markers'));
  const list = el('ul', 'et-marker-list');
  for (const marker of markers) {
    const item = el('li', 'et-marker');
    item.dataset.marker = marker.id;
    const swatch = el('span', 'et-marker-swatch', marker.name);
    swatch.style.textDecorationLine = 'underline';
    swatch.style.textDecorationStyle = marker.underline_style;
    swatch.style.textDecorationColor = marker.color;
    item.appendChild(swatch);
    if (marker.description) item.appendChild(el('span', 'et-marker-desc', marker.description));

    const toggle = el('button', 'et-marker-toggle', marker.visible ? 'hide' : 'show');
    toggle.addEventListener('click', () => actions.toggle(marker.id, !marker.visible));
    item.appendChild(toggle);

    const refresh = el('button', 'et-marker-refresh', 'refresh');
    refresh.addEventListener('click', () => actions.refresh(marker.id));
    item.appendChild(refresh);

    const remove = el('button', 'et-marker-delete', 'delete');
    remove.addEventListener('click', () => actions.remove(marker.id));
    item.appendChild(remove);

    list.appendChild(item);
  }
  panel.appendChild(list);
  return panel;
}

function renderMessages(messages: MessageView[]): HTMLElement {
  const list = el('div', 'et-messages');
  for (const message of messages) {
    list.appendChild(el('div', `et-message et-message-${message.author}`, message.text));
  }
  return list;
}

export interface ChatActions {
  send(message: string): void;
  acceptAll(): void;
  dismissAll(): void;
}

export function renderChatPanel(doc: DocumentState, actions: ChatActions): HTMLElement {
  const panel = el('div', 'et-chat');
  panel.appendChild(el('h3', 'et-panel-title', 'Chat'));
  panel.appendChild(renderMessages(doc.chat.messages));

  const input = el('input', 'et-chat-input');
  input.type = 'text';
  const send = el('button', 'et-chat-send', 'send');
  send.addEventListener('click', () => {
    if (input.value) actions.send(input.value);
  });
  panel.appendChild(input);
  panel.appendChild(send);

  const pendingChat = doc.suggestions.filter(
    (s) => s.status === 'pending' && s.origin.startsWith('chat'),
  );
  if (pendingChat.length > 0) {
    const batch = el('div', 'et-chat-batch', `${pendingChat.length} suggested edits`);
    const acceptAll = el('button', 'et-accept-all', 'Accept All');
    acceptAll.addEventListener('click', () => actions.acceptAll());
    const dismissAll = el('button', 'et-dismiss-all', 'Dismiss All');
    dismissAll.addEventListener('click', () => actions.dismissAll());
    batch.appendChild(acceptAll);
    batch.appendChild(dismissAll);
    panel.appendChild(batch);
  }
  return panel;
}

export interface CommentActions {
  send(cid: string, message: string): void;
  resolve(cid: string): void;
}

export function renderCommentPanel(comment: CommentView, actions: CommentActions): HTMLElement {
  const panel = el('div', 'et-comment');
  panel.dataset.comment = comment.id;
  panel.appendChild(el('h3', 'et-panel-title', 'Comment'));
  panel.appendChild(renderMessages(comment.messages));
  if (!comment.resolved) {
    const input = el('input', 'et-comment-input');
    input.type = 'text';
    const send = el('button', 'et-comment-send', 'send');
    send.addEventListener('click', () => {
      if (input.value) actions.send(comment.id, input.value);
    });
    const resolve = el('button', 'et-comment-resolve', 'Resolve');
    resolve.addEventListener('click', () => actions.resolve(comment.id));
    panel.appendChild(input);
    panel.appendChild(send);
    panel.appendChild(resolve);
  } else {
    panel.appendChild(el('div', 'et-comment-resolved', 'resolved'));
  }
  return panel;
}

export function renderBrainstormDropdown(
  result: BrainstormResult,
  accept: (bid: string, index: number) => void,
  close: () => void,
): HTMLElement {
  const dropdown = el('div', 'et-brainstorm');
  dropdown.dataset.brainstorm = result.id;
  for (const [index, option] of result.options.entries()) {
    const button = el('button', 'et-brainstorm-option', option);
    button.addEventListener('click', () => accept(result.id, index));
    dropdown.appendChild(button);
  }
  const dismiss = el('button', 'et-brainstorm-close', 'dismiss');
  dismiss.addEventListener('click', close);
  dropdown.appendChild(dismiss);
  return dropdown;
}

export interface VerifyActions {
  visit(vid: string, index: number): void;
  label(vid: string, label: string): void;
}

/** Verification tab: clickable queries opening a new browser tab, then labels. */
export function renderVerifyPanel(
  verification: VerificationView,
  actions: VerifyActions,
): HTMLElement {
  const panel = el('div', 'et-verify');
  panel.dataset.verification = verification.id;
  panel.appendChild(el('h3', 'et-panel-title', 'Verify'));
  const list = el('ul', 'et-query-list');
  verification.queries.forEach((query, index) => {
    const item = el('li', 'et-query');
    const link = el('a', 'et-query-link', query);
    link.href = verification.query_urls?.[index] ?? '#';
    link.target = '_blank';
    link.rel = 'noopener';
    if (verification.visited.includes(index)) item.classList.add('et-query-visited');
    link.addEventListener('click', () => actions.visit(verification.id, index));
    item.appendChild(link);
    list.appendChild(item);
  });
  panel.appendChild(list);
  const labels = el('div', 'et-verify-labels');
  for (const label of LABEL_ACTIONS) {
    const button = el('button', `et-label-${label}`, LABEL_TITLES[label] ?? label);
    button.addEventListener('click', () => actions.label(verification.id, label));
    labels.appendChild(button);
  }
  panel.appendChild(labels);
  return panel;
}
