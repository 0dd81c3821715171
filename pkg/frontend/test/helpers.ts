import { ApiClient } from '../src/api.js';
import { CaptureSession, Phase } from '../src/session.js';

export class FakeClock {
  t = 1000;
  tick(ms: number): number {
    this.t += ms;
    return this.t;
  }
  now = (): number => this.t;
}

function codeFor(ch: string): string {
  return ch === ' ' ? 'Space' : `Key${ch.toUpperCase()}`;
}

/** Type a text cleanly: press, hold 80 ms, release, 120 ms to next key. */
export function typeText(session: CaptureSession, clock: FakeClock, text: string): void {
  for (const ch of text) {
    clock.tick(120);
    session.keyDown(ch, codeFor(ch));
    clock.tick(80);
    session.keyUp(ch, codeFor(ch));
  }
}

/** Rollover typing: the next key goes down before the previous comes up. */
export function typeOverlapped(session: CaptureSession, clock: FakeClock, text: string): void {
  const chars = [...text];
  chars.forEach((ch, i) => {
    clock.tick(60);
    session.keyDown(ch, codeFor(ch) + i); // unique code per position
  });
  chars.forEach((ch, i) => {
    clock.tick(50);
    session.keyUp(ch, codeFor(ch) + i);
  });
}

export type FetchStub = (url: string, init?: RequestInit) => Promise<Response>;

export function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

export function makeSession(
  phase: Phase,
  fetchStub: FetchStub,
  userId = 'alice',
): { session: CaptureSession; clock: FakeClock } {
  const clock = new FakeClock();
  const api = new ApiClient('http://service', fetchStub as typeof fetch);
  return { session: new CaptureSession(userId, phase, api, clock.now), clock };
}
