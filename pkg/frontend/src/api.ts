/** Thin client for the auth service HTTP API. */

import type { CapturedEvent } from './events.js';

export interface AttemptResponse {
  outcome: string; // "fta" | "enrolled_k_of_n" | "active" | "decision"
  reason?: string;
  enrolled?: number;
  enrollment_count?: number;
  score?: number;
  accepted?: boolean;
  threshold?: number;
}

export interface IdentifyResponse {
  user_id: string;
  score: number;
  accepted: boolean;
}

export interface UserSummary {
  user_id: string;
  state: 'enrolling' | 'active';
  enrolled: number;
  enrollment_count: number;
  fta_count: number;
  attempt_count: number;
}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const data = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiError(response.status, JSON.stringify((data as { detail?: unknown }).detail ?? data));
    }
    return data as T;
  }

  createUser(userId: string): Promise<UserSummary> {
    return this.request('POST', '/users', { user_id: userId });
  }

  getUser(userId: string): Promise<UserSummary> {
    return this.request('GET', `/users/${encodeURIComponent(userId)}`);
  }

  submitAttempt(
    userId: string,
    phase: 'enroll' | 'verify',
    typedText: string,
    events: CapturedEvent[],
  ): Promise<AttemptResponse> {
    return this.request('POST', `/users/${encodeURIComponent(userId)}/attempts`, {
      phase,
      typed_text: typedText,
      events,
    });
  }

  identify(typedText: string, events: CapturedEvent[]): Promise<IdentifyResponse> {
    return this.request('POST', '/identify', { typed_text: typedText, events });
  }

  async health(): Promise<boolean> {
    try {
      await this.request('GET', '/health');
      return true;
    } catch {
      return false;
    }
  }
}
