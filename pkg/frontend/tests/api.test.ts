import { describe, expect, it } from 'vitest';

import {
  GenerateClient,
  LayoutRejectedError,
  ServiceUnavailableError,
  SupersededError,
} from '../src/api.js';
import type { GenerateRequest, GenerateResponse } from '../src/types.js';

function request(seed: number): GenerateRequest {
  return {
    layout: { canvas_size: 256, glands: [{ x: 128, y: 128, sx: 48, sy: 48 }] },
    seed,
  };
}

function responseBody(seedUsed: number): GenerateResponse {
  return {
    image: 'aW1n',
    mask: 'bXNr',
    bboxes: [{ x0: 104, y0: 104, x1: 152, y1: 152 }],
    seed_used: seedUsed,
    checkpoint_id: 'abcdef012345',
    latency_ms: 3.25,
  };
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

function deferred<T>(): { promise: Promise<T>; resolve: (v: T) => void } {
  let resolve!: (v: T) => void;
  const promise = new Promise<T>((res) => {
    resolve = res;
  });
  return { promise, resolve };
}

describe('GenerateClient.generate', () => {
  it('POSTs the request and parses the response', async () => {
    const seen: { url: string; init?: RequestInit }[] = [];
    const client = new GenerateClient('', (url, init) => {
      seen.push({ url, init });
      return Promise.resolve(jsonResponse(responseBody(5)));
    });
    const result = await client.generate(request(5));
    expect(result).toEqual(responseBody(5));
    expect(seen).toHaveLength(1);
    expect(seen[0]?.url).toBe('/api/generate');
    expect(seen[0]?.init?.method).toBe('POST');
    const body = JSON.parse(String(seen[0]?.init?.body));
    expect(body.layout.glands).toHaveLength(1);
    expect(body.seed).toBe(5);
  });

  it('strips a trailing slash from the base URL', async () => {
    let url = '';
    const client = new GenerateClient('http://svc:9000/', (u) => {
      url = u;
      return Promise.resolve(jsonResponse(responseBody(1)));
    });
    await client.generate(request(1));
    expect(url).toBe('http://svc:9000/api/generate');
  });

  it('maps 400 to LayoutRejectedError with the violation list', async () => {
    const detail = {
      error: 'invalid layout',
      violations: ['gland 0: non-positive size (0, 8)'],
    };
    const client = new GenerateClient('', () =>
      Promise.resolve(jsonResponse({ detail }, 400)),
    );
    const failure = client.generate(request(0));
    await expect(failure).rejects.toBeInstanceOf(LayoutRejectedError);
    await failure.catch((error: LayoutRejectedError) => {
      expect(error.violations).toEqual(detail.violations);
    });
  });

  it('keeps a string detail readable on 400', async () => {
    const client = new GenerateClient('', () =>
      Promise.resolve(jsonResponse({ detail: 'seed must fit in 64 bits' }, 400)),
    );
    await client.generate(request(0)).catch((error: LayoutRejectedError) => {
      expect(error.violations).toEqual(['seed must fit in 64 bits']);
    });
  });

  it('maps 503 to ServiceUnavailableError', async () => {
    const client = new GenerateClient('', () =>
      Promise.resolve(jsonResponse({ detail: 'model not loaded' }, 503)),
    );
    await expect(client.generate(request(0))).rejects.toBeInstanceOf(
      ServiceUnavailableError,
    );
  });

  it('surfaces other statuses as plain errors', async () => {
    const client = new GenerateClient('', () =>
      Promise.resolve(jsonResponse({ detail: 'boom' }, 500)),
    );
    await expect(client.generate(request(0))).rejects.toThrow(/HTTP 500/);
  });
});

describe('GenerateClient single-in-flight policy', () => {
  it('queues the newest submission and supersedes the displaced one', async () => {
    const gate = deferred<Response>();
    let calls = 0;
    const client = new GenerateClient('', (_url, init) => {
      calls += 1;
      if (calls === 1) {
        return gate.promise;
      }
      const seed = JSON.parse(String(init?.body)).seed as number;
      return Promise.resolve(jsonResponse(responseBody(seed)));
    });

    const first = client.generate(request(0));
    expect(client.inFlight).toBe(true);
    const second = client.generate(request(1));
    const third = client.generate(request(2));

    await expect(second).rejects.toBeInstanceOf(SupersededError);
    expect(calls).toBe(1); // nothing new was sent while busy

    gate.resolve(jsonResponse(responseBody(0)));
    await expect(first).resolves.toMatchObject({ seed_used: 0 });
    await expect(third).resolves.toMatchObject({ seed_used: 2 });
    expect(calls).toBe(2);
    expect(client.inFlight).toBe(false);
  });

  it('propagates a queued request failure to its own caller', async () => {
    const gate = deferred<Response>();
    let calls = 0;
    const client = new GenerateClient('', () => {
      calls += 1;
      if (calls === 1) {
        return gate.promise;
      }
      return Promise.resolve(jsonResponse({ detail: 'model not loaded' }, 503));
    });
    const first = client.generate(request(0));
    const second = client.generate(request(1));
    gate.resolve(jsonResponse(responseBody(0)));
    await expect(first).resolves.toMatchObject({ seed_used: 0 });
    await expect(second).rejects.toBeInstanceOf(ServiceUnavailableError);
  });
});

describe('GenerateClient.health', () => {
  it('fetches the health endpoint', async () => {
    let url = '';
    const client = new GenerateClient('', (u) => {
      url = u;
      return Promise.resolve(
        jsonResponse({ status: 'ready', checkpoint_id: 'abcdef012345' }),
      );
    });
    const health = await client.health();
    expect(url).toBe('/api/health');
    expect(health.status).toBe('ready');
  });

  it('raises on a failing health endpoint', async () => {
    const client = new GenerateClient('', () =>
      Promise.resolve(jsonResponse({}, 500)),
    );
    await expect(client.health()).rejects.toThrow(/HTTP 500/);
  });
});
