import type { GenerateRequest, GenerateResponse, HealthResponse } from './types.js';

export class LayoutRejectedError extends Error {
  violations: string[];

  constructor(violations: string[]) {
    super(`layout rejected: ${violations.join('; ')}`);
    this.name = 'LayoutRejectedError';
    this.violations = violations;
  }
}

export class ServiceUnavailableError extends Error {
  constructor() {
    super('model not loaded');
    this.name = 'ServiceUnavailableError';
  }
}

export class SupersededError extends Error {
  constructor() {
    super('request superseded by a newer submission');
    this.name = 'SupersededError';
  }
}

interface QueuedRequest {
  request: GenerateRequest;
  resolve: (response: GenerateResponse) => void;
  reject: (error: unknown) => void;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

function extractViolations(detail: unknown): string[] {
  if (typeof detail === 'object' && detail !== null && 'violations' in detail) {
    const violations = (detail as { violations: unknown }).violations;
    if (Array.isArray(violations)) {
      return violations.map(String);
    }
  }
  return [String(detail)];
}

// Client for the generate endpoint with a single-in-flight policy: while a
// request is running, the newest submission waits in a one-slot queue and
// any submission it displaces rejects with SupersededError.
export class GenerateClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;
  private busy = false;
  private queued: QueuedRequest | null = null;

  constructor(baseUrl = '', fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, '');
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  get inFlight(): boolean {
    return this.busy;
  }

  async health(): Promise<HealthResponse> {
    const response = await this.fetchFn(`${this.baseUrl}/api/health`);
    if (!response.ok) {
      throw new Error(`health check failed: HTTP ${response.status}`);
    }
    return (await response.json()) as HealthResponse;
  }

  generate(request: GenerateRequest): Promise<GenerateResponse> {
    if (this.busy) {
      if (this.queued !== null) {
        this.queued.reject(new SupersededError());
      }
      return new Promise<GenerateResponse>((resolve, reject) => {
        this.queued = { request, resolve, reject };
      });
    }
    return this.run(request);
  }

  private async run(request: GenerateRequest): Promise<GenerateResponse> {
    this.busy = true;
    try {
      return await this.post(request);
    } finally {
      this.busy = false;
      const next = this.queued;
      if (next !== null) {
        this.queued = null;
        this.run(next.request).then(next.resolve, next.reject);
      }
    }
  }

  private async post(request: GenerateRequest): Promise<GenerateResponse> {
    const response = await this.fetchFn(`${this.baseUrl}/api/generate`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(request),
    });
    if (response.status === 400) {
      const body = (await response.json()) as { detail?: unknown };
      throw new LayoutRejectedError(extractViolations(body.detail));
    }
    if (response.status === 503) {
      throw new ServiceUnavailableError();
    }
    if (!response.ok) {
      throw new Error(`generate failed: HTTP ${response.status}`);
    }
    return (await response.json()) as GenerateResponse;
  }
}
