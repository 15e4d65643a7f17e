/**
 * Thin client for the engine's HTTP API.
 *
 * The UI holds no authoritative state: every mutation goes through here and
 * the caller re-renders from the server's answer.
 */

import type {
  AuditExport,
  BrainstormResult,
  ChatResult,
  DocumentState,
  MarkerView,
  SuggestionView,
  VerificationView,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: Record<string, unknown>,
  ) {
    super(typeof body.message === 'string' ? body.message : `request failed with ${status}`);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly token: string | null = null,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers['Content-Type'] = 'application/json';
    if (this.token) headers['Authorization'] = `Bearer ${this.token}`;
    const response = await fetch(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    const decoded = text ? JSON.parse(text) : {};
    if (!response.ok) {
      throw new ApiError(response.status, decoded);
    }
    return decoded as T;
  }

  createDocument(template: string): Promise<{ id: string; document: DocumentState }> {
    return this.request('POST', '/documents', { template });
  }

  getDocument(docId: string): Promise<DocumentState> {
    return this.request('GET', `/documents/${docId}`);
  }

  manualEdit(docId: string, start: number, end: number, replacement: string) {
    return this.request<{ content: string; version_id: number }>(
      'POST',
      `/documents/${docId}/manual-edit`,
      { range: [start, end], replacement },
    );
  }

  accept(docId: string, sid: string) {
    return this.request<{ suggestion: SuggestionView; content: string }>(
      'POST',
      `/documents/${docId}/suggestions/${sid}/accept`,
    );
  }

  dismiss(docId: string, sid: string) {
    return this.request<{ suggestion: SuggestionView }>(
      'POST',
      `/documents/${docId}/suggestions/${sid}/dismiss`,
      {},
    );
  }

  acceptAll(docId: string, origin?: string) {
    return this.request<{ accepted: string[] }>(
      'POST',
      `/documents/${docId}/suggestions/accept-all`,
      origin ? { origin } : {},
    );
  }

  dismissAll(docId: string, origin?: string) {
    return this.request<{ dismissed: string[] }>(
      'POST',
      `/documents/${docId}/suggestions/dismiss-all`,
      origin ? { origin } : {},
    );
  }

  chat(docId: string, message: string): Promise<ChatResult> {
    return this.request('POST', `/documents/${docId}/chat`, { message });
  }

  createComment(docId: string, start: number, end: number) {
    return this.request<{ id: string }>('POST', `/documents/${docId}/comments`, {
      span: [start, end],
    });
  }

  commentMessage(cid: string, message: string): Promise<ChatResult> {
    return this.request('POST', `/comments/${cid}/message`, { message });
  }

  resolveComment(cid: string) {
    return this.request('POST', `/comments/${cid}/resolve`);
  }

  brainstorm(docId: string, start: number, end: number): Promise<BrainstormResult> {
    return this.request('POST', `/documents/${docId}/brainstorm`, { span: [start, end] });
  }

  acceptBrainstorm(bid: string, optionIndex: number) {
    return this.request<{ content: string }>('POST', `/brainstorms/${bid}/accept`, {
      option_index: optionIndex,
    });
  }

  bracket(docId: string, start: number, end: number) {
    return this.request<{ kind: string; comment_id?: string; brainstorm_id?: string; options?: string[] }>(
      'POST',
      `/documents/${docId}/bracket`,
      { span: [start, end] },
    );
  }

  listMarkers(docId: string) {
    return this.request<{ markers: MarkerView[] }>('GET', `/documents/${docId}/markers`);
  }

  createMarker(docId: string, marker: Partial<MarkerView> & { name: string }) {
    return this.request<{ marker: MarkerView }>('POST', `/documents/${docId}/markers`, marker);
  }

  updateMarker(docId: string, markerId: string, changes: Partial<MarkerView>) {
    return this.request<{ marker: MarkerView }>('PATCH', `/documents/${docId}/markers`, {
      id: markerId,
      ...changes,
    });
  }

  deleteMarker(docId: string, markerId: string) {
    return this.request('DELETE', `/documents/${docId}/markers`, { id: markerId });
  }

  refreshMarker(markerId: string) {
    return this.request<{ suggestions: SuggestionView[] }>('POST', `/markers/${markerId}/refresh`);
  }

  startVerification(sid: string) {
    return this.request<{ verification: VerificationView }>('POST', `/suggestions/${sid}/verify`);
  }

  visitQuery(vid: string, index: number) {
    return this.request<{ verification: VerificationView }>('POST', `/verifications/${vid}/visit`, {
      index,
    });
  }

  labelVerification(vid: string, label: string) {
    return this.request<{ verification: VerificationView }>('POST', `/verifications/${vid}/label`, {
      label,
    });
  }

  labelSuggestion(sid: string, label: string) {
    return this.request<{ verification: VerificationView }>('POST', `/suggestions/${sid}/label`, {
      label,
    });
  }

  getAudit(docId: string): Promise<AuditExport> {
    return this.request('GET', `/documents/${docId}/audit`);
  }

  getMetrics(docId: string): Promise<Record<string, unknown>> {
    return this.request('GET', `/documents/${docId}/metrics`);
  }

  switchMode(docId: string, mode: 'edit' | 'audit') {
    return this.request<{ mode: string }>('POST', `/documents/${docId}/mode`, { mode });
  }

  getConfig(): Promise<Record<string, unknown>> {
    return this.request('GET', '/config');
  }
}
