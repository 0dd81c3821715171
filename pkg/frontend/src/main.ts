/** DOM wiring for the capture page. */

import { ApiClient } from './api.js';
import { CaptureSession, Phase } from './session.js';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function renderState(session: CaptureSession): void {
  const status = el<HTMLDivElement>('status');
  status.textContent = session.state.message;
  status.dataset.state = session.state.status;
  el<HTMLSpanElement>('typo-count').textContent = String(session.typoCount);
  const progress = el<HTMLProgressElement>('enroll-progress');
  if (session.state.enrolledCount !== undefined && session.state.enrollmentCount) {
    progress.max = session.state.enrollmentCount;
    progress.value = session.state.enrolledCount;
  } else if (session.state.status === 'active') {
    progress.value = progress.max;
  }
  el<HTMLSpanElement>('phase').textContent = session.phase;
}

export function start(): void {
  const api = new ApiClient(
    (document.body.dataset.apiBase ?? '').replace(/\/$/, '') || 'http://127.0.0.1:8000',
  );
  const input = el<HTMLInputElement>('password');
  const userField = el<HTMLInputElement>('user-id');
  let session: CaptureSession | null = null;

  const begin = async (phase: Phase) => {
    const userId = userField.value.trim();
    if (phase !== 'identify' && !userId) {
      el<HTMLDivElement>('status').textContent = 'Enter a user id first.';
      return;
    }
    if (phase === 'enroll') {
      try {
        await api.createUser(userId);
      } catch {
        // existing user: resume enrollment or get a clean invalid_state later
      }
    }
    session = new CaptureSession(userId, phase, api);
    input.value = '';
    input.disabled = false;
    input.focus();
    renderState(session);
  };

  el<HTMLButtonElement>('btn-enroll').addEventListener('click', () => void begin('enroll'));
  el<HTMLButtonElement>('btn-verify').addEventListener('click', () => void begin('verify'));
  el<HTMLButtonElement>('btn-identify').addEventListener('click', () => void begin('identify'));

  input.addEventListener('keydown', (ev) => {
    if (!session || session.busy) return;
    if (ev.key === 'Enter') {
      ev.preventDefault();
      const typed = input.value;
      input.disabled = true; // single in-flight submission
      void session.submit(typed).then(() => {
        input.value = '';
        input.disabled = false;
        input.focus();
        if (session) renderState(session);
      });
      return;
    }
    if (!session.keyDown(ev.key, ev.code)) {
      ev.preventDefault();
      input.value = '';
      renderState(session);
    }
  });

  input.addEventListener('keyup', (ev) => {
    session?.keyUp(ev.key, ev.code);
  });
}

if (typeof document !== 'undefined' && document.readyState !== 'loading') {
  start();
} else if (typeof document !== 'undefined') {
  document.addEventListener('DOMContentLoaded', start);
}
