/** Thin client over the scoring service endpoints.
 *
 * Click points are sent raw; densification is the server's concern so the
 * browser and any other client score identically.
 */

import type { ModelMeta, Point, PrimitivesResponse, ScoreResponse } from "./types.js";

export class ServiceUnreachable extends Error {
  constructor(baseUrl: string, readonly cause?: unknown) {
    super(`scoring service unreachable at ${baseUrl}`);
    this.name = "ServiceUnreachable";
  }
}

export class TrackTooShort extends Error {
  constructor(detail: string) {
    super(detail);
    this.name = "TrackTooShort";
  }
}

export class ServiceError extends Error {
  constructor(public status: number, detail: string) {
    super(`service returned ${status}: ${detail}`);
    this.name = "ServiceError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ProbeClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  sceneUrl(): string {
    return `${this.baseUrl}/scene`;
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ServiceUnreachable(this.baseUrl, err);
    }
    return response;
  }

  private static async detailOf(response: Response): Promise<string> {
    try {
      const body = (await response.json()) as { detail?: string };
      return body.detail ?? response.statusText;
    } catch {
      return response.statusText;
    }
  }

  async score(points: readonly Point[]): Promise<ScoreResponse> {
    const response = await this.request("/score", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ points }),
    });
    if (response.status === 422) {
      throw new TrackTooShort(await ProbeClient.detailOf(response));
    }
    if (!response.ok) {
      throw new ServiceError(response.status, await ProbeClient.detailOf(response));
    }
    return (await response.json()) as ScoreResponse;
  }

  async meta(): Promise<ModelMeta> {
    const response = await this.request("/model/meta");
    if (!response.ok) {
      throw new ServiceError(response.status, await ProbeClient.detailOf(response));
    }
    return (await response.json()) as ModelMeta;
  }

  async primitives(scale = 1): Promise<PrimitivesResponse> {
    const response = await this.request(`/model/primitives?scale=${scale}`);
    if (!response.ok) {
      throw new ServiceError(response.status, await ProbeClient.detailOf(response));
    }
    return (await response.json()) as PrimitivesResponse;
  }
}
