/** Payload shapes served by the engine's HTTP API. */

export interface DisplayStep {
  kind: 'plain' | 'strike' | 'insert';
  text: string;
}

export interface Underline {
  style: string;
  color: string;
}

export interface SpanRange {
  start: number;
  end: number;
  version_id?: number;
}

export interface VerificationView {
  id: string;
  suggestion_id: string;
  queries: string[];
  query_urls?: string[];
  visited: number[];
  label: string;
  queries_opened: boolean;
}

export interface SuggestionView {
  id: string;
  origin: string;
  status: string;
  original_text: string;
  replace_text: string;
  new_info: boolean;
  replace_all: boolean;
  span: SpanRange | null;
  visible: boolean;
  display: DisplayStep[];
  underline: Underline;
  warning: string | null;
  menu: string[];
  thread_id: string | null;
  verification: VerificationView | null;
}

export interface MarkerView {
  id: string;
  name: string;
  underline_style: string;
  color: string;
  description: string | null;
  visible: boolean;
}

export interface MessageView {
  author: 'user' | 'system';
  text: string;
}

export interface CommentView {
  id: string;
  anchor: SpanRange;
  resolved: boolean;
  messages: MessageView[];
}

export interface TraceSpanView {
  start: number;
  end: number;
  edit_id: string;
  new_info: boolean;
  label: string;
  highlight_class: string;
  text: string;
}

export interface DocumentState {
  id: string;
  content: string;
  version_id: number;
  mode: 'edit' | 'audit';
  chat: { messages: MessageView[] };
  comments: CommentView[];
  markers: MarkerView[];
  suggestions: SuggestionView[];
  trace: TraceSpanView[];
}

export interface AuditExport {
  doc_id: string;
  mode: string;
  content: string;
  spans: TraceSpanView[];
  verifications: VerificationView[];
  metrics: Record<string, unknown>;
}

export interface ChatResult {
  reply: string;
  suggestions: SuggestionView[];
}

export interface BrainstormResult {
  id: string;
  options: string[];
}

export type ViewMode = 'inline' | 'hover';
