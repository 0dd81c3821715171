/** Capture session state machine, free of DOM dependencies.
 *
 * Records keydown/keyup timings from an injected monotonic clock, aborts
 * the attempt on correction keys (no-correction rule: the user retypes
 * from scratch), and submits buffered attempts to the service. The UI
 * never scores anything locally; all accept/reject decisions come from
 * the service.
 */

import { ApiClient, ApiError, AttemptResponse, IdentifyResponse } from './api.js';
import { CapturedEvent, labelForKey, prevalidate, rebase } from './events.js';

export type Phase = 'enroll' | 'verify' | 'identify';

const ABORT_KEYS = new Set([
  'Backspace',
  'Delete',
  'ArrowLeft',
  'ArrowRight',
  'ArrowUp',
  'ArrowDown',
  'Home',
  'End',
]);

export interface UiState {
  status:
    | 'idle'
    | 'typing'
    | 'pending'
    | 'fta'
    | 'enrolling'
    | 'active'
    | 'accepted'
    | 'rejected'
    | 'identified'
    | 'error';
  message: string;
  enrolledCount?: number;
  enrollmentCount?: number;
  score?: number;
  identifiedUser?: string;
}

export class CaptureSession {
  readonly userId: string;
  phase: Phase;
  typoCount = 0;
  state: UiState = { status: 'idle', message: 'Type the password and press Enter.' };

  private buffer: CapturedEvent[] = [];
  private pressedCodes = new Map<string, string>(); // physical code -> label
  private inFlight = false;

  constructor(
    userId: string,
    phase: Phase,
    private readonly api: ApiClient,
    private readonly now: () => number = () => performance.now(),
  ) {
    this.userId = userId;
    this.phase = phase;
  }

  get events(): CapturedEvent[] {
    return [...this.buffer];
  }

  get busy(): boolean {
    return this.inFlight;
  }

  /** Record one keydown. Returns false when the attempt was aborted. */
  keyDown(key: string, code: string): boolean {
    if (this.inFlight) return true;
    if (ABORT_KEYS.has(key)) {
      this.abortAttempt();
      return false;
    }
    if (key === 'Enter') return true; // handled by submit()
    const label = labelForKey(key);
    // Remember the label per physical key so the matching keyup pairs up
    // even if a modifier changed the character value in between.
    this.pressedCodes.set(code, label);
    this.buffer.push({ key: label, action: 'press', t_ms: this.now() });
    this.state = { status: 'typing', message: 'Recording...' };
    return true;
  }

  keyUp(key: string, code: string): void {
    if (this.inFlight || key === 'Enter' || ABORT_KEYS.has(key)) return;
    const label = this.pressedCodes.get(code) ?? labelForKey(key);
    this.pressedCodes.delete(code);
    // A release with no recorded press (focus gained mid-hold) is dropped;
    // keeping it would fail the structural prevalidation.
    if (!this.buffer.some((e) => e.key === label && e.action === 'press')) return;
    this.buffer.push({ key: label, action: 'release', t_ms: this.now() });
  }

  /** Correction pressed: discard the buffer, count a visible typo. */
  abortAttempt(): void {
    this.buffer = [];
    this.pressedCodes.clear();
    this.typoCount += 1;
    this.state = { status: 'idle', message: 'Attempt aborted; type the password again from scratch.' };
  }

  resetBuffer(): void {
    this.buffer = [];
    this.pressedCodes.clear();
  }

  /** Submit the buffered attempt. The buffer is always discarded afterwards:
   * failed submissions are never auto-retried with recorded timings. */
  async submit(typedText: string): Promise<UiState> {
    if (this.inFlight) return this.state;
    const events = rebase(this.buffer);
    this.resetBuffer();

    const structural = prevalidate(events, typedText);
    if (!structural.ok) {
      this.typoCount += 1;
      this.state = { status: 'fta', message: `Not captured (${structural.reason}); type again.` };
      return this.state;
    }

    this.inFlight = true;
    try {
      if (this.phase === 'identify') {
        const result = await this.api.identify(typedText, events);
        this.state = this.renderIdentify(result);
      } else {
        const result = await this.api.submitAttempt(this.userId, this.phase, typedText, events);
        this.state = this.renderAttempt(result);
      }
    } catch (err) {
      this.state = {
        status: 'error',
        message:
          err instanceof ApiError
            ? `Service error: ${err.message}`
            : 'Network failure; the attempt was discarded, please retype.',
      };
    } finally {
      this.inFlight = false;
    }
    return this.state;
  }

  private renderAttempt(result: AttemptResponse): UiState {
    if (result.outcome === 'fta') {
      this.typoCount += 1;
      return { status: 'fta', message: `Not captured (${result.reason}); type again from scratch.` };
    }
    if (result.outcome === 'active') {
      this.phase = 'verify';
      return { status: 'active', message: 'Enrollment complete. Switching to verification.' };
    }
    if (result.outcome.startsWith('enrolled_')) {
      return {
        status: 'enrolling',
        message: `Enrolled ${result.enrolled} of ${result.enrollment_count}.`,
        enrolledCount: result.enrolled,
        enrollmentCount: result.enrollment_count,
      };
    }
    // decision
    if (result.accepted) {
      return { status: 'accepted', message: `Accepted (score ${result.score?.toFixed(4)}).`, score: result.score };
    }
    return {
      status: 'rejected',
      message: `Rejected (score ${result.score?.toFixed(4)} > ${result.threshold}). Try again.`,
      score: result.score,
    };
  }

  private renderIdentify(result: IdentifyResponse): UiState {
    return {
      status: 'identified',
      message: result.accepted
        ? `Identified as ${result.user_id} (score ${result.score.toFixed(4)}).`
        : `Best match ${result.user_id}, but above threshold (score ${result.score.toFixed(4)}).`,
      identifiedUser: result.user_id,
      score: result.score,
    };
  }
}
