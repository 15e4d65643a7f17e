/**
 * Application shell: three-panel editor plus the audit view.
 *
 * Left panel: document list and the "Audit Interface" switch. Center: the
 * text panel (edit or audit mode). Right: markers, chat, comment, and
 * verify tabs. The server is the source of truth; after every mutation the
 * whole view re-renders from a fresh document fetch.
 */

import { ApiClient, ApiError } from './api.js';
import { renderAuditView } from './audit.js';
import { dispatchableBrackets } from './brackets.js';
import { el, renderEditorContent } from './render.js';
import {
  renderBrainstormDropdown,
  renderChatPanel,
  renderCommentPanel,
  renderMarkersPanel,
  renderVerifyPanel,
} from './panels.js';
import type { BrainstormResult, DocumentState, VerificationView, ViewMode } from './types.js';

export class App {
  private doc: DocumentState | null = null;
  private viewMode: ViewMode = 'inline';
  private activeComment: string | null = null;
  private activeVerification: VerificationView | null = null;
  private openBrainstorm: BrainstormResult | null = null;
  private statusText = '';

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
  ) {}

  get document(): DocumentState | null {
    return this.doc;
  }

  async openDocument(docId: string): Promise<void> {
    this.doc = await this.api.getDocument(docId);
    this.render();
  }

  async createDocument(template: string): Promise<string> {
    const created = await this.api.createDocument(template);
    this.doc = created.document;
    this.render();
    return created.id;
  }

  setViewMode(mode: ViewMode): void {
    this.viewMode = mode;
    this.render();
  }

  private async refresh(): Promise<void> {
    if (this.doc) {
      this.doc = await this.api.getDocument(this.doc.id);
    }
    this.render();
  }

  private async guard(action: () => Promise<unknown>): Promise<void> {
    try {
      await action();
      this.statusText = '';
    } catch (error) {
      // 409s surface lifecycle outcomes (stale, resolved); 5xx carry the retry message
      this.statusText = error instanceof ApiError ? error.message : String(error);
    }
    await this.refresh();
  }

  // ----------------------------------------------------------------
  // commands

  acceptSuggestion = (sid: string) => void this.guard(() => this.api.accept(this.docId(), sid));
  dismissSuggestion = (sid: string) => void this.guard(() => this.api.dismiss(this.docId(), sid));

  verifySuggestion = (sid: string) =>
    void this.guard(async () => {
      const result = await this.api.startVerification(sid);
      this.activeVerification = result.verification;
    });

  sendChat = (message: string) => void this.guard(() => this.api.chat(this.docId(), message));
  acceptAllChat = () => void this.guard(() => this.api.acceptAll(this.docId(), 'chat'));
  dismissAllChat = () => void this.guard(() => this.api.dismissAll(this.docId(), 'chat'));

  sendComment = (cid: string, message: string) =>
    void this.guard(() => this.api.commentMessage(cid, message));

  resolveComment = (cid: string) =>
    void this.guard(async () => {
      await this.api.resolveComment(cid);
      this.activeComment = null;
    });

  selectComment = (cid: string) => {
    this.activeComment = cid;
    this.render();
  };

  startBrainstorm = (start: number, end: number) =>
    void this.guard(async () => {
      this.openBrainstorm = await this.api.brainstorm(this.docId(), start, end);
    });

  acceptBrainstormOption = (bid: string, index: number) =>
    void this.guard(async () => {
      await this.api.acceptBrainstorm(bid, index);
      this.openBrainstorm = null;
    });

  closeBrainstorm = () => {
    this.openBrainstorm = null;
    this.render();
  };

  toggleMarker = (markerId: string, visible: boolean) =>
    void this.guard(() => this.api.updateMarker(this.docId(), markerId, { visible }));
  refreshMarker = (markerId: string) => void this.guard(() => this.api.refreshMarker(markerId));
  deleteMarker = (markerId: string) =>
    void this.guard(() => this.api.deleteMarker(this.docId(), markerId));

  visitQuery = (vid: string, index: number) =>
    void this.guard(async () => {
      const result = await this.api.visitQuery(vid, index);
      this.activeVerification = result.verification;
    });

  labelVerification = (vid: string, label: string) =>
    void this.guard(async () => {
      const result = await this.api.labelVerification(vid, label);
      this.activeVerification = result.verification;
    });

  labelTracedEdit = (editId: string, label: string) =>
    void this.guard(() => this.api.labelSuggestion(editId, label));

  verifyTracedEdit = (editId: string) =>
    void this.guard(async () => {
      const result = await this.api.startVerification(editId);
      this.activeVerification = result.verification;
    });

  switchMode = (mode: 'edit' | 'audit') =>
    void this.guard(() => this.api.switchMode(this.docId(), mode));

  /** Manual edit entry point; afterwards any new bracketed passage dispatches. */
  manualEdit = (start: number, end: number, replacement: string) =>
    void this.guard(async () => {
      await this.api.manualEdit(this.docId(), start, end, replacement);
      const doc = await this.api.getDocument(this.docId());
      for (const bracket of dispatchableBrackets(doc.content)) {
        const result = await this.api.bracket(this.docId(), bracket.start, bracket.end);
        if (result.kind === 'content' && result.brainstorm_id && result.options) {
          this.openBrainstorm = { id: result.brainstorm_id, options: result.options };
        } else if (result.kind === 'command' && result.comment_id) {
          this.activeComment = result.comment_id;
        }
        break; // one dispatch per edit keeps the flow predictable
      }
    });

  private docId(): string {
    if (!this.doc) throw new Error('no document open');
    return this.doc.id;
  }

  // ----------------------------------------------------------------
  // rendering

  render(): void {
    this.root.textContent = '';
    if (!this.doc) {
      this.root.appendChild(el('div', 'et-empty', 'No document open'));
      return;
    }
    const layout = el('div', 'et-layout');
    layout.appendChild(this.renderLeftPanel());
    layout.appendChild(this.renderCenterPanel());
    layout.appendChild(this.renderRightPanel());
    if (this.statusText) {
      const status = el('div', 'et-status', this.statusText);
      status.setAttribute('role', 'status');
      layout.appendChild(status);
    }
    this.root.appendChild(layout);
  }

  private renderLeftPanel(): HTMLElement {
    const doc = this.doc as DocumentState;
    const panel = el('div', 'et-left');
    panel.appendChild(el('div', 'et-doc-id', doc.id));
    const modeButton = el(
      'button',
      'et-mode-switch',
      doc.mode === 'edit' ? 'Audit Interface' : 'Back to Editing',
    );
    modeButton.addEventListener('click', () =>
      this.switchMode(doc.mode === 'edit' ? 'audit' : 'edit'),
    );
    panel.appendChild(modeButton);

    const viewToggle = el(
      'button',
      'et-view-toggle',
      this.viewMode === 'inline' ? 'Hover view' : 'Inline view',
    );
    viewToggle.addEventListener('click', () =>
      this.setViewMode(this.viewMode === 'inline' ? 'hover' : 'inline'),
    );
    panel.appendChild(viewToggle);
    return panel;
  }

  private renderCenterPanel(): HTMLElement {
    const doc = this.doc as DocumentState;
    const panel = el('div', 'et-center');
    if (doc.mode === 'audit') {
      const auditFromState = {
        doc_id: doc.id,
        mode: doc.mode,
        content: doc.content,
        spans: doc.trace,
        verifications: [],
        metrics: {},
      };
      panel.appendChild(
        renderAuditView(auditFromState, {
          label: this.labelTracedEdit,
          verify: this.verifyTracedEdit,
        }),
      );
    } else {
      panel.appendChild(
        renderEditorContent(doc, this.viewMode, {
          accept: this.acceptSuggestion,
          dismiss: this.dismissSuggestion,
          verify: this.verifySuggestion,
        }),
      );
      if (this.openBrainstorm) {
        panel.appendChild(
          renderBrainstormDropdown(this.openBrainstorm, this.acceptBrainstormOption, this.closeBrainstorm),
        );
      }
    }
    return panel;
  }

  private renderRightPanel(): HTMLElement {
    const doc = this.doc as DocumentState;
    const panel = el('div', 'et-right');
    panel.appendChild(
      renderMarkersPanel(doc.markers, {
        toggle: this.toggleMarker,
        refresh: this.refreshMarker,
        remove: this.deleteMarker,
      }),
    );
    panel.appendChild(
      renderChatPanel(doc, {
        send: this.sendChat,
        acceptAll: this.acceptAllChat,
        dismissAll: this.dismissAllChat,
      }),
    );
    const active = doc.comments.find((c) => c.id === this.activeComment);
    if (active) {
      panel.appendChild(
        renderCommentPanel(active, { send: this.sendComment, resolve: this.resolveComment }),
      );
    }
    if (this.activeVerification) {
      panel.appendChild(
        renderVerifyPanel(this.activeVerification, {
          visit: this.visitQuery,
          label: this.labelVerification,
        }),
      );
    }
    return panel;
  }
}

/** Boot helper for index.html. */
export function mount(baseUrl: string, root: HTMLElement): App {
  return new App(new ApiClient(baseUrl), root);
}
