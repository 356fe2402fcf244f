// @vitest-environment jsdom
import { beforeEach, describe, expect, it, vi } from "vitest";

import { GatewayError } from "../src/api.js";
import { SubmitView } from "../src/views/submit.js";
import { FakeGateway } from "./fake-gateway.js";
import type { AnalysisStatus, Stage } from "../src/types.js";

let gateway: FakeGateway;
let view: SubmitView;

beforeEach(() => {
    gateway = new FakeGateway();
    view = new SubmitView(gateway, { pollIntervalMs: 1, pollTimeoutMs: 2000 });
    document.body.textContent = "";
    document.body.appendChild(view.element);
});

function submitForm(): void {
    (view.element.querySelector("form") as HTMLFormElement).dispatchEvent(
        new Event("submit", { cancelable: true })
    );
}

function statusAt(
    stage: Stage,
    extra: Partial<AnalysisStatus> = {}
): AnalysisStatus {
    return {
        correlation_id: "c-fake",
        stage,
        requested_at: "2026-08-16T10:00:00+00:00",
        updated_at: "2026-08-16T10:00:01+00:00",
        diagnostics: null,
        detections: null,
        annotations: [],
        ...extra,
    };
}

/** Status handler that advances one scripted step per poll. */
function scriptStatuses(steps: AnalysisStatus[]): void {
    let cursor = 0;
    gateway.onStatus = () => {
        const step = steps[Math.min(cursor, steps.length - 1)];
        cursor += 1;
        return Promise.resolve(step);
    };
}

describe("structural upload errors", () => {
    it("places each 400 error beside the input it belongs to", async () => {
        gateway.onSubmit = () =>
            Promise.reject(
                new GatewayError(400, [
                    {
                        part: "metrics",
                        message: "row 2 has 3 cells, expected 4",
                        row: 2,
                    },
                    {
                        part: "thresholds",
                        message: "value must be a number",
                        key: "WMC_HIGH",
                    },
                    { part: "script", message: "part is not valid UTF-8" },
                ])
            );
        submitForm();
        await vi.waitFor(() => {
            expect(gateway.submitCalls).toHaveLength(1);
        });

        const slot = (part: string) =>
            view.element.querySelector(
                `.part-errors[data-part="${part}"]`
            ) as HTMLUListElement;
        expect(slot("metrics").hidden).toBe(false);
        expect(slot("metrics").textContent).toContain("(row 2)");
        expect(slot("metrics").textContent).toContain("3 cells");
        expect(slot("thresholds").textContent).toContain("(key WMC_HIGH)");
        expect(slot("script").textContent).toContain("UTF-8");
        expect(slot("metadata").hidden).toBe(true);
        expect(slot("metadata").textContent).toBe("");
    });

    it("clears old errors on the next attempt", async () => {
        gateway.onSubmit = () =>
            Promise.reject(
                new GatewayError(400, [
                    { part: "metadata", message: "required part is missing" },
                ])
            );
        submitForm();
        await vi.waitFor(() => expect(gateway.submitCalls).toHaveLength(1));

        gateway.onSubmit = () =>
            Promise.resolve({
                correlation_id: "c-ok",
                accepted_at: "2026-08-16T10:00:00+00:00",
            });
        scriptStatuses([statusAt("persisted", { detections: [] })]);
        submitForm();
        await vi.waitFor(() => expect(view.lastRun).not.toBeNull());
        await view.lastRun;

        const slot = view.element.querySelector(
            '.part-errors[data-part="metadata"]'
        ) as HTMLUListElement;
        expect(slot.hidden).toBe(true);
        expect(slot.textContent).toBe("");
    });

    it("shows other failures in the banner", async () => {
        gateway.onSubmit = () => Promise.reject(new Error("nowhere to send"));
        submitForm();
        await vi.waitFor(() => {
            const banner = view.element.querySelector(
                ".banner"
            ) as HTMLElement;
            expect(banner.hidden).toBe(false);
            expect(banner.textContent).toContain("nowhere to send");
        });
    });
});

describe("stage timeline", () => {
    it("advances through the stages in pipeline order", async () => {
        scriptStatuses([
            statusAt("requested"),
            statusAt("validated"),
            statusAt("interpreted"),
            statusAt("persisted", {
                detections: [
                    {
                        entity_id: "OrderManager",
                        smell_name: "GodClass",
                        severity: "high",
                    },
                ],
            }),
        ]);
        submitForm();
        await vi.waitFor(() => expect(view.lastRun).not.toBeNull());
        await view.lastRun;

        const stages = [
            ...view.element.querySelectorAll(".stage-list .stage"),
        ].map((item) => (item as HTMLElement).dataset.stage);
        expect(stages).toEqual([
            "requested",
            "validated",
            "interpreted",
            "persisted",
        ]);
        const outcome = view.element.querySelector(".outcome") as HTMLElement;
        expect(outcome.textContent).toContain("OrderManager");
        expect(outcome.textContent).toContain("GodClass");
    });

    it("does not repeat a stage the poller sees twice", async () => {
        scriptStatuses([
            statusAt("requested"),
            statusAt("requested"),
            statusAt("requested"),
            statusAt("persisted", { detections: [] }),
        ]);
        submitForm();
        await vi.waitFor(() => expect(view.lastRun).not.toBeNull());
        await view.lastRun;

        const stages = [
            ...view.element.querySelectorAll(".stage-list .stage"),
        ].map((item) => (item as HTMLElement).dataset.stage);
        expect(stages).toEqual(["requested", "persisted"]);
    });

    it("ends at failed with the diagnostics spelled out", async () => {
        scriptStatuses([
            statusAt("requested"),
            statusAt("failed", {
                diagnostics: [
                    {
                        source: "metrics",
                        detail: "value 'fifty' is not numeric",
                        position: "2:3",
                    },
                ],
            }),
        ]);
        submitForm();
        await vi.waitFor(() => expect(view.lastRun).not.toBeNull());
        await view.lastRun;

        const stages = [
            ...view.element.querySelectorAll(".stage-list .stage"),
        ].map((item) => (item as HTMLElement).dataset.stage);
        expect(stages).toEqual(["requested", "failed"]);
        const outcome = view.element.querySelector(".outcome") as HTMLElement;
        expect(outcome.textContent).toContain("failed validation");
        expect(outcome.textContent).toContain(
            "[metrics at 2:3] value 'fifty' is not numeric"
        );
    });

    it("celebrates a clean run", async () => {
        scriptStatuses([statusAt("persisted", { detections: [] })]);
        submitForm();
        await vi.waitFor(() => expect(view.lastRun).not.toBeNull());
        await view.lastRun;
        expect(
            view.element.querySelector(".all-clear")?.textContent
        ).toContain("No smells detected");
    });

    it("lists handler annotations when the run carries any", async () => {
        scriptStatuses([
            statusAt("persisted", {
                detections: [],
                annotations: ["persistence-service: disk said no"],
            }),
        ]);
        submitForm();
        await vi.waitFor(() => expect(view.lastRun).not.toBeNull());
        await view.lastRun;
        expect(
            view.element.querySelector(".annotations")?.textContent
        ).toContain("disk said no");
    });
});
