import type { Gateway } from "./api.js";
import type { AnalysisStatus, Stage } from "./types.js";

export const STAGE_FLOW: readonly Stage[] = [
    "requested",
    "validated",
    "interpreted",
    "persisted",
];

/** Position of each stage along the pipeline; failed ends any run. */
export const STAGE_RANK: Record<Stage, number> = {
    requested: 0,
    validated: 1,
    interpreted: 2,
    persisted: 3,
    failed: 9,
};

export function isTerminal(stage: Stage): boolean {
    return stage === "persisted" || stage === "failed";
}

export interface WatchOptions {
    intervalMs?: number;
    timeoutMs?: number;
}

const DEFAULT_INTERVAL_MS = 500;
const DEFAULT_TIMEOUT_MS = 30_000;

/**
 * Poll GET /analyses/{id} until the run reaches a terminal stage.
 * Every status body seen is passed to onUpdate, including the final one,
 * so a status panel can advance as the run moves through the pipeline.
 * Resolves with the terminal status; rejects if the deadline passes
 * first. A 404 right after the 202 is normal (the request event may not
 * have been applied yet) and is retried like any other poll.
 */
export function watchAnalysis(
    gateway: Gateway,
    correlationId: string,
    onUpdate: (status: AnalysisStatus) => void,
    options: WatchOptions = {}
): Promise<AnalysisStatus> {
    const intervalMs = options.intervalMs ?? DEFAULT_INTERVAL_MS;
    const timeoutMs = options.timeoutMs ?? DEFAULT_TIMEOUT_MS;
    const deadline = Date.now() + timeoutMs;

    return new Promise((resolve, reject) => {
        let timer: ReturnType<typeof setInterval> | null = null;
        let inFlight = false;

        const stop = () => {
            if (timer !== null) {
                clearInterval(timer);
                timer = null;
            }
        };

        const poll = async () => {
            if (inFlight) {
                return;
            }
            inFlight = true;
            try {
                const status = await gateway.analysisStatus(correlationId);
                if (status !== null) {
                    onUpdate(status);
                    if (isTerminal(status.stage)) {
                        stop();
                        resolve(status);
                        return;
                    }
                }
            } catch {
                // transient network trouble; the next tick retries
            } finally {
                inFlight = false;
            }
            if (Date.now() > deadline) {
                stop();
                reject(
                    new Error(
                        `run ${correlationId} still not settled after ${timeoutMs}ms`
                    )
                );
            }
        };

        void poll();
        timer = setInterval(() => void poll(), intervalMs);
    });
}
