/** Keystroke event buffer types and the structural prevalidation that
 * mirrors the service's checks, so the UI never submits a stream the
 * backend would call malformed. */

export type KeyAction = 'press' | 'release';

export interface CapturedEvent {
  key: string;
  action: KeyAction;
  t_ms: number;
}

/** Map a KeyboardEvent.key value to the label the service understands:
 * single characters stand for themselves, space is named, everything
 * else (Shift, Tab, ...) is passed through and ignored server-side. */
export function labelForKey(key: string): string {
  if (key === ' ') return 'space';
  return key;
}

function charForLabel(label: string): string | null {
  if (label === 'space') return ' ';
  if (label.length === 1) return label;
  return null;
}

/** Shift timestamps so the first event sits at t_ms = 0. */
export function rebase(events: CapturedEvent[]): CapturedEvent[] {
  if (events.length === 0) return events;
  const t0 = events[0].t_ms;
  return events.map((e) => ({ ...e, t_ms: e.t_ms - t0 }));
}

export interface ValidationOutcome {
  ok: boolean;
  reason?: 'malformed_events' | 'text_mismatch';
}

/** Structural checks mirroring the service: sorted non-negative
 * timestamps, every press matched by a later release (FIFO per label),
 * and the character presses must spell the typed text in order. */
export function prevalidate(events: CapturedEvent[], typedText: string): ValidationOutcome {
  if (events.length === 0) {
    return typedText === '' ? { ok: true } : { ok: false, reason: 'malformed_events' };
  }
  let prev = 0;
  const open = new Map<string, number>();
  const typedChars: string[] = [];
  for (const ev of events) {
    if (ev.t_ms < 0 || ev.t_ms < prev) return { ok: false, reason: 'malformed_events' };
    prev = ev.t_ms;
    if (ev.action === 'press') {
      open.set(ev.key, (open.get(ev.key) ?? 0) + 1);
      const ch = charForLabel(ev.key);
      if (ch !== null) typedChars.push(ch);
    } else {
      const pending = open.get(ev.key) ?? 0;
      if (pending === 0) return { ok: false, reason: 'malformed_events' };
      open.set(ev.key, pending - 1);
    }
  }
  for (const count of open.values()) {
    if (count !== 0) return { ok: false, reason: 'malformed_events' };
  }
  if (typedChars.join('') !== typedText) return { ok: false, reason: 'malformed_events' };
  return { ok: true };
}

/** Template vector lengths for a password of length n. */
export function templateDimensions(n: number): Record<string, number> {
  return { PP: n - 1, RR: n - 1, RP: n - 1, PR: n, V: 4 * n - 3 };
}
