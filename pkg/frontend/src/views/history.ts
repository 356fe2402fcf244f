import type { Gateway } from "../api.js";
import { el, stamp } from "../dom.js";
import { RequestGate } from "../latest.js";
import { STAGE_FLOW, STAGE_RANK } from "../poll.js";
import type { AnalysisStatus, ExecutionRecord, Page } from "../types.js";

const PAGE_SIZE = 20;

/**
 * Run history: the executions listing exactly as the server orders it
 * (newest first), with a detail panel showing the pipeline stages of a
 * selected run. Totals come from the listing envelope, never from
 * counting rows.
 */
export class HistoryView {
    readonly element: HTMLElement;
    lastRefresh: Promise<void> = Promise.resolve();

    private readonly gate = new RequestGate();
    private offset = 0;

    constructor(private readonly gateway: Gateway) {
        this.element = el("section", "history-view");
        this.element.innerHTML = `
            <h2>Run history</h2>
            <p class="count" data-total="0"></p>
            <p class="empty" hidden>No runs have been submitted yet.</p>
            <div class="error-panel" hidden>
                <p class="error-text"></p>
                <button type="button" class="retry">Retry</button>
            </div>
            <div class="table-slot"></div>
            <nav class="pager" hidden>
                <button type="button" class="prev">&laquo; newer</button>
                <span class="pager-note"></span>
                <button type="button" class="next">older &raquo;</button>
            </nav>
            <section class="run-detail" hidden>
                <h3>Run <code class="run-id"></code></h3>
                <ol class="stage-list"></ol>
                <div class="detail-body"></div>
            </section>
        `;
        (this.element.querySelector(".retry") as HTMLButtonElement)
            .addEventListener("click", () => void this.refresh());
        (this.element.querySelector(".prev") as HTMLButtonElement)
            .addEventListener("click", () => {
                this.offset = Math.max(0, this.offset - PAGE_SIZE);
                void this.refresh();
            });
        (this.element.querySelector(".next") as HTMLButtonElement)
            .addEventListener("click", () => {
                this.offset += PAGE_SIZE;
                void this.refresh();
            });
    }

    refresh(): Promise<void> {
        this.lastRefresh = this.query();
        return this.lastRefresh;
    }

    private async query(): Promise<void> {
        const token = this.gate.begin();
        const params = new URLSearchParams({
            offset: String(this.offset),
            limit: String(PAGE_SIZE),
        });
        try {
            const page = await this.gateway.executions(params);
            if (this.gate.isCurrent(token)) {
                this.render(page);
            }
        } catch (error) {
            if (this.gate.isCurrent(token)) {
                this.showError(
                    error instanceof Error ? error.message : String(error)
                );
            }
        }
    }

    private render(page: Page<ExecutionRecord>): void {
        (this.element.querySelector(".error-panel") as HTMLElement).hidden =
            true;
        const count = this.element.querySelector(".count") as HTMLElement;
        count.dataset.total = String(page.total);
        count.textContent = `${page.total} runs`;
        (this.element.querySelector(".empty") as HTMLElement).hidden =
            page.items.length > 0;

        const slot = this.element.querySelector(".table-slot") as HTMLElement;
        slot.textContent = "";
        if (page.items.length > 0) {
            slot.appendChild(this.buildTable(page.items));
        }

        const pager = this.element.querySelector(".pager") as HTMLElement;
        pager.hidden = page.total <= page.limit && page.offset === 0;
        (pager.querySelector(".pager-note") as HTMLElement).textContent =
            `offset ${page.offset} of ${page.total}`;
        (pager.querySelector(".prev") as HTMLButtonElement).disabled =
            page.offset === 0;
        (pager.querySelector(".next") as HTMLButtonElement).disabled =
            page.offset + page.limit >= page.total;
    }

    private buildTable(records: ExecutionRecord[]): HTMLTableElement {
        const table = el("table", "executions");
        table.innerHTML = `
            <thead><tr>
                <th>Executed</th><th>Script</th><th>Project</th>
                <th>Status</th><th>Detections</th><th>Smell found</th>
            </tr></thead>
        `;
        const body = el("tbody");
        for (const record of records) {
            const row = el("tr");
            row.dataset.correlationId = record.correlation_id;
            row.tabIndex = 0;
            const status = el("td");
            status.appendChild(
                el("span", `badge badge-${record.status}`, record.status)
            );
            row.append(
                el("td", "", stamp(record.executed_at)),
                el("td", "", record.script_name),
                el("td", "", record.project_id),
                status,
                el("td", "num", String(record.detection_count)),
                el("td", "", record.smell_detected ? "yes" : "no")
            );
            row.addEventListener("click", () =>
                void this.select(record.correlation_id)
            );
            body.appendChild(row);
        }
        table.appendChild(body);
        return table;
    }

    private async select(correlationId: string): Promise<void> {
        const detail = this.element.querySelector(
            ".run-detail"
        ) as HTMLElement;
        detail.hidden = false;
        (detail.querySelector(".run-id") as HTMLElement).textContent =
            correlationId;
        const body = detail.querySelector(".detail-body") as HTMLElement;
        const stages = detail.querySelector(".stage-list") as HTMLOListElement;
        stages.textContent = "";
        body.textContent = "Loading...";

        let status: AnalysisStatus | null;
        try {
            status = await this.gateway.analysisStatus(correlationId);
        } catch (error) {
            body.textContent =
                error instanceof Error ? error.message : String(error);
            return;
        }
        if (status === null) {
            body.textContent = "This run is not known to the gateway.";
            return;
        }
        this.renderDetail(status, stages, body);
    }

    private renderDetail(
        status: AnalysisStatus,
        stages: HTMLOListElement,
        body: HTMLElement
    ): void {
        // The pipeline is linear, so the stages a run passed through are
        // implied by the one it is at now: everything ranked at or below
        // it, or just "requested" followed by "failed".
        const reached =
            status.stage === "failed"
                ? (["requested", "failed"] as const)
                : STAGE_FLOW.filter(
                      (stage) => STAGE_RANK[stage] <= STAGE_RANK[status.stage]
                  );
        for (const stage of reached) {
            const item = el("li", `stage stage-${stage}`, stage);
            item.dataset.stage = stage;
            if (stage === status.stage) {
                item.classList.add("current");
            }
            stages.appendChild(item);
        }

        body.textContent = "";
        if (status.diagnostics && status.diagnostics.length > 0) {
            const list = el("ul", "diagnostics");
            for (const diagnostic of status.diagnostics) {
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
            body.appendChild(list);
        }
        if (status.detections && status.detections.length > 0) {
            const list = el("ul", "hits");
            for (const hit of status.detections) {
                list.appendChild(
                    el(
                        "li",
                        "",
                        `${hit.entity_id}: ${hit.smell_name} (${hit.severity})`
                    )
                );
            }
            body.appendChild(list);
        }
        if (status.annotations.length > 0) {
            const notes = el("ul", "annotations");
            for (const annotation of status.annotations) {
                notes.appendChild(el("li", "", annotation));
            }
            body.appendChild(notes);
        }
        if (body.childNodes.length === 0) {
            body.textContent = "No detections were recorded for this run.";
        }
    }

    private showError(message: string): void {
        const panel = this.element.querySelector(
            ".error-panel"
        ) as HTMLElement;
        panel.hidden = false;
        (panel.querySelector(".error-text") as HTMLElement).textContent =
            `Could not reach the gateway: ${message}`;
    }
}
