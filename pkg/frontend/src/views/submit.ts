import { GatewayError, type Gateway } from "../api.js";
import { el } from "../dom.js";
import { isTerminal, watchAnalysis } from "../poll.js";
import type { AnalysisStatus, Stage, UploadError } from "../types.js";

const PARTS = [
    { name: "script", label: "Smell script", hint: ".smell" },
    { name: "metrics", label: "Metric table", hint: ".csv" },
    { name: "thresholds", label: "Thresholds", hint: ".json" },
    { name: "metadata", label: "Run metadata", hint: ".json" },
] as const;

export interface SubmitOptions {
    pollIntervalMs?: number;
    pollTimeoutMs?: number;
}

/**
 * Upload panel: one file input per payload part, a stage timeline that
 * advances as the run moves through the pipeline, and the outcome
 * (detections or diagnostics) once the run settles. Structural upload
 * errors from the 400 body are shown beside the input they belong to.
 */
export class SubmitView {
    readonly element: HTMLElement;
    /** Settles with the terminal status of the most recent upload. */
    lastRun: Promise<AnalysisStatus> | null = null;

    private readonly form: HTMLFormElement;
    private readonly stageList: HTMLOListElement;
    private readonly outcome: HTMLElement;
    private readonly banner: HTMLElement;
    private seen: Stage[] = [];

    constructor(
        private readonly gateway: Gateway,
        private readonly options: SubmitOptions = {}
    ) {
        this.element = el("section", "submit-view");
        this.element.innerHTML = `
            <h2>Run an analysis</h2>
            <p class="lede">Upload the four payload files; the run is tracked here until it settles.</p>
            <form class="upload-form">
                ${PARTS.map(
                    (part) => `
                <div class="part-row">
                    <label>
                        <span class="part-label">${part.label} <small>${part.hint}</small></span>
                        <input type="file" name="${part.name}">
                    </label>
                    <ul class="part-errors" data-part="${part.name}" hidden></ul>
                </div>`
                ).join("")}
                <button type="submit">Analyze</button>
            </form>
            <p class="banner" hidden></p>
            <section class="run-panel" hidden>
                <h3>Run <code class="run-id"></code></h3>
                <ol class="stage-list"></ol>
                <div class="outcome"></div>
            </section>
        `;
        this.form = this.element.querySelector("form") as HTMLFormElement;
        this.stageList = this.element.querySelector(
            ".stage-list"
        ) as HTMLOListElement;
        this.outcome = this.element.querySelector(".outcome") as HTMLElement;
        this.banner = this.element.querySelector(".banner") as HTMLElement;
        this.form.addEventListener("submit", (event) => {
            event.preventDefault();
            void this.submit();
        });
    }

    private async submit(): Promise<void> {
        this.clearErrors();
        const payload = new FormData();
        for (const part of PARTS) {
            const input = this.form.querySelector(
                `input[name="${part.name}"]`
            ) as HTMLInputElement;
            const file = input.files?.[0];
            if (file) {
                payload.append(part.name, file, file.name);
            }
        }

        const button = this.form.querySelector("button") as HTMLButtonElement;
        button.disabled = true;
        try {
            const accepted = await this.gateway.submitAnalysis(payload);
            this.beginRun(accepted.correlation_id);
        } catch (error) {
            if (error instanceof GatewayError && error.errors.length > 0) {
                this.placeErrors(error.errors);
            } else {
                this.showBanner(
                    error instanceof Error ? error.message : String(error)
                );
            }
        } finally {
            button.disabled = false;
        }
    }

    private beginRun(correlationId: string): void {
        this.seen = [];
        this.stageList.textContent = "";
        this.outcome.textContent = "";
        const panel = this.element.querySelector(".run-panel") as HTMLElement;
        panel.hidden = false;
        (panel.querySelector(".run-id") as HTMLElement).textContent =
            correlationId;

        this.lastRun = watchAnalysis(
            this.gateway,
            correlationId,
            (status) => this.applyStatus(status),
            {
                intervalMs: this.options.pollIntervalMs,
                timeoutMs: this.options.pollTimeoutMs,
            }
        );
        this.lastRun.catch((error: Error) => this.showBanner(error.message));
    }

    private applyStatus(status: AnalysisStatus): void {
        if (!this.seen.includes(status.stage)) {
            this.seen.push(status.stage);
            const item = el("li", `stage stage-${status.stage}`, status.stage);
            item.dataset.stage = status.stage;
            this.stageList.appendChild(item);
        }
        if (isTerminal(status.stage)) {
            this.renderOutcome(status);
        }
    }

    private renderOutcome(status: AnalysisStatus): void {
        this.outcome.textContent = "";
        if (status.stage === "persisted") {
            const detections = status.detections ?? [];
            if (detections.length === 0) {
                this.outcome.appendChild(
                    el("p", "all-clear", "No smells detected.")
                );
            } else {
                const table = el("table", "detections");
                table.innerHTML =
                    "<thead><tr><th>Entity</th><th>Smell</th><th>Severity</th></tr></thead>";
                const body = el("tbody");
                for (const hit of detections) {
                    const row = el("tr");
                    row.append(
                        el("td", "", hit.entity_id),
                        el("td", "", hit.smell_name),
                        el("td", `severity-${hit.severity}`, hit.severity)
                    );
                    body.appendChild(row);
                }
                table.appendChild(body);
                this.outcome.appendChild(table);
            }
        } else {
            const list = el("ul", "diagnostics");
            for (const diagnostic of status.diagnostics ?? []) {
                const where = diagnostic.position
                    ? ` at ${diagnostic.position}`
                    : "";
                list.appendChild(
                    el(
                        "li",
                        "diagnostic",
                        `[${diagnostic.source}${where}] ${diagnostic.detail}`
                    )
                );
            }
            this.outcome.appendChild(
                el("p", "failed-note", "The run failed validation.")
            );
            this.outcome.appendChild(list);
        }
        if (status.annotations.length > 0) {
            const notes = el("ul", "annotations");
            for (const annotation of status.annotations) {
                notes.appendChild(el("li", "", annotation));
            }
            this.outcome.appendChild(notes);
        }
    }

    private placeErrors(errors: UploadError[]): void {
        for (const error of errors) {
            const slot = this.element.querySelector(
                `.part-errors[data-part="${error.part}"]`
            ) as HTMLUListElement | null;
            if (!slot) {
                this.showBanner(`${error.part}: ${error.message}`);
                continue;
            }
            slot.hidden = false;
            const spot = [
                error.row !== undefined ? `row ${error.row}` : null,
                error.column !== undefined ? `column ${error.column}` : null,
                error.key !== undefined ? `key ${error.key}` : null,
            ].filter((piece) => piece !== null);
            const prefix = spot.length > 0 ? `(${spot.join(", ")}) ` : "";
            slot.appendChild(el("li", "", prefix + error.message));
        }
    }

    private clearErrors(): void {
        for (const slot of this.element.querySelectorAll(".part-errors")) {
            slot.textContent = "";
            (slot as HTMLElement).hidden = true;
        }
        this.banner.hidden = true;
        this.banner.textContent = "";
    }

    private showBanner(message: string): void {
        this.banner.hidden = false;
        this.banner.textContent = message;
    }
}
