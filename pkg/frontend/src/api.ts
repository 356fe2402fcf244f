import type {
    AnalysisStatus,
    DetectionRecord,
    ExecutionRecord,
    Histogram,
    Page,
    UploadAccepted,
    UploadError,
} from "./types.js";

export type FetchLike = (
    input: string,
    init?: RequestInit
) => Promise<Response>;

/** A non-2xx gateway response, with the structured errors when present. */
export class GatewayError extends Error {
    constructor(
        readonly status: number,
        readonly errors: UploadError[],
        message?: string
    ) {
        super(message ?? `gateway answered ${status}`);
        this.name = "GatewayError";
    }
}

/**
 * The slice of the gateway the views talk to. Tests substitute fakes for
 * this interface; GatewayClient is the real HTTP implementation.
 */
export interface Gateway {
    submitAnalysis(parts: FormData): Promise<UploadAccepted>;
    analysisStatus(correlationId: string): Promise<AnalysisStatus | null>;
    detections(query: URLSearchParams): Promise<Page<DetectionRecord>>;
    histogram(query: URLSearchParams): Promise<Histogram>;
    executions(query: URLSearchParams): Promise<Page<ExecutionRecord>>;
}

async function errorsFrom(response: Response): Promise<UploadError[]> {
    try {
        const body = (await response.json()) as { errors?: UploadError[] };
        return Array.isArray(body.errors) ? body.errors : [];
    } catch {
        return [];
    }
}

export class GatewayClient implements Gateway {
    constructor(
        private readonly base: string = "",
        private readonly fetchImpl: FetchLike = (input, init) =>
            fetch(input, init)
    ) {}

    private async getJson<T>(path: string): Promise<T> {
        const response = await this.fetchImpl(this.base + path);
        if (!response.ok) {
            throw new GatewayError(response.status, await errorsFrom(response));
        }
        return (await response.json()) as T;
    }

    async submitAnalysis(parts: FormData): Promise<UploadAccepted> {
        const response = await this.fetchImpl(this.base + "/analyses", {
            method: "POST",
            body: parts,
        });
        if (response.status !== 202) {
            throw new GatewayError(response.status, await errorsFrom(response));
        }
        return (await response.json()) as UploadAccepted;
    }

    async analysisStatus(
        correlationId: string
    ): Promise<AnalysisStatus | null> {
        const response = await this.fetchImpl(
            this.base + `/analyses/${encodeURIComponent(correlationId)}`
        );
        if (response.status === 404) {
            return null;
        }
        if (!response.ok) {
            throw new GatewayError(response.status, await errorsFrom(response));
        }
        return (await response.json()) as AnalysisStatus;
    }

    detections(query: URLSearchParams): Promise<Page<DetectionRecord>> {
        return this.getJson(withQuery("/detections", query));
    }

    histogram(query: URLSearchParams): Promise<Histogram> {
        return this.getJson(withQuery("/detections/histogram", query));
    }

    executions(query: URLSearchParams): Promise<Page<ExecutionRecord>> {
        return this.getJson(withQuery("/executions", query));
    }
}

function withQuery(path: string, query: URLSearchParams): string {
    const text = query.toString();
    return text ? `${path}?${text}` : path;
}
