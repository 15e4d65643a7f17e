/** The audit view's five-class color scheme and span rendering. */

import { describe, expect, it } from 'vitest';
import { HIGHLIGHT_COLORS, renderAuditView } from '../src/audit.js';
import type { AuditExport, TraceSpanView } from '../src/types.js';

const NO_ACTIONS = { label() {}, verify() {} };

function span(partial: Partial<TraceSpanView>): TraceSpanView {
  return {
    start: 0,
    end: 1,
    edit_id: 'doc.s1',
    new_info: false,
    label: 'unlabeled',
    highlight_class: 'no_new_info',
    text: 'x',
    ...partial,
  };
}

function auditExport(content: string, spans: TraceSpanView[]): AuditExport {
  return { doc_id: 'doc', mode: 'audit', content, spans, verifications: [], metrics: {} };
}

describe('five-class color mapping', () => {
  it('maps exactly the five highlight classes to their colors', () => {
    expect(HIGHLIGHT_COLORS).toEqual({
      new_info_unlabeled: 'yellow',
      no_new_info: 'grey',
      verified: 'green',
      incorrect: 'red',
      not_sure: 'orange',
    });
  });

  it.each([
    ['new_info_unlabeled', 'yellow'],
    ['no_new_info', 'grey'],
    ['verified', 'green'],
    ['incorrect', 'red'],
    ['not_sure', 'orange'],
  ])('paints %s spans %s', (highlightClass, color) => {
    const view = renderAuditView(
      auditExport('abc', [span({ highlight_class: highlightClass, text: 'a', end: 1 })]),
      NO_ACTIONS,
    );
    const node = view.querySelector('.et-audit-span') as HTMLElement;
    expect(node.style.backgroundColor).toBe(color);
    expect(node.classList.contains(`et-${highlightClass}`)).toBe(true);
  });
});

describe('audit panel', () => {
  it('is read-only and interleaves plain text with highlighted spans (golden DOM)', () => {
    const content = 'Keep the Louvre visit and the tram ride.';
    const spans = [
      span({
        start: 9,
        end: 21,
        edit_id: 'doc.s1',
        new_info: true,
        highlight_class: 'new_info_unlabeled',
        text: 'Louvre visit',
      }),
      span({
        start: 30,
        end: 39,
        edit_id: 'doc.s2',
        label: 'verified',
        highlight_class: 'verified',
        text: 'tram ride',
      }),
    ];
    const view = renderAuditView(auditExport(content, spans), NO_ACTIONS);
    expect(view.getAttribute('aria-readonly')).toBe('true');
    expect(view.outerHTML).toMatchSnapshot();
  });

  it('offers verify and the three direct labels on every span', () => {
    const view = renderAuditView(auditExport('ab', [span({ text: 'a' })]), NO_ACTIONS);
    const labels = Array.from(view.querySelectorAll('.et-audit-menu button')).map(
      (b) => b.textContent,
    );
    expect(labels).toEqual(['verify', 'Verified', 'Incorrect', 'Not Sure']);
  });

  it('renders no spans for an all-user document', () => {
    const view = renderAuditView(auditExport('entirely human', []), NO_ACTIONS);
    expect(view.querySelectorAll('.et-audit-span')).toHaveLength(0);
    expect(view.textContent).toBe('entirely human');
  });
});
