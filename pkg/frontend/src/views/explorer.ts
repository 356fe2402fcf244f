import type { Gateway } from "../api.js";
import { renderHistogram, renderScatter } from "../charts.js";
import { el, stamp } from "../dom.js";
import {
    emptyFilter,
    filterToParams,
    sameFilter,
    type ExplorerFilter,
} from "../filters.js";
import { RequestGate } from "../latest.js";
import type { DetectionRecord, Histogram, Page, Severity } from "../types.js";

export interface ExplorerOptions {
    /** Called after a user action changes the filter (not on setFilter). */
    onFilterChange?: (filter: ExplorerFilter) => void;
}

/**
 * Detection explorer: facet controls, the record table, a per-smell
 * histogram and a coordinate scatter. Every facet change re-queries both
 * /detections and /detections/histogram, and every count shown is the
 * server's own number; pages are never summed up locally. A response
 * belonging to a superseded query is discarded.
 */
export class ExplorerView {
    readonly element: HTMLElement;
    filter: ExplorerFilter = emptyFilter();
    /** Settles when the most recent refresh has been rendered or dropped. */
    lastRefresh: Promise<void> = Promise.resolve();

    private readonly gate = new RequestGate();
    private readonly results: HTMLElement;
    private readonly errorPanel: HTMLElement;

    constructor(
        private readonly gateway: Gateway,
        private readonly options: ExplorerOptions = {}
    ) {
        this.element = el("section", "explorer-view");
        this.element.innerHTML = `
            <h2>Explore detections</h2>
            <form class="facets">
                <label>Smell <input type="text" name="smell" placeholder="any"></label>
                <label>Severity
                    <select name="severity">
                        <option value="">any</option>
                        <option value="low">low</option>
                        <option value="medium">medium</option>
                        <option value="high">high</option>
                        <option value="critical">critical</option>
                    </select>
                </label>
                <label>Org <input type="text" name="org_id" placeholder="any"></label>
                <label>Project <input type="text" name="project_id" placeholder="any"></label>
                <label>From <input type="text" name="from" placeholder="2026-08-01T00:00:00+00:00"></label>
                <label>To <input type="text" name="to" placeholder="exclusive"></label>
                <button type="submit">Apply</button>
                <span class="bbox-chip" hidden>
                    <span class="bbox-text"></span>
                    <button type="button" class="bbox-clear" title="Drop the box filter">x</button>
                </span>
            </form>
            <div class="error-panel" hidden>
                <p class="error-text"></p>
                <button type="button" class="retry">Retry</button>
            </div>
            <div class="results">
                <p class="count" data-total="0"></p>
                <p class="empty" hidden>No detections match the current filter.</p>
                <div class="table-slot"></div>
                <nav class="pager" hidden>
                    <button type="button" class="prev">&laquo; newer</button>
                    <span class="pager-note"></span>
                    <button type="button" class="next">older &raquo;</button>
                </nav>
                <div class="charts">
                    <figure class="histogram-slot">
                        <figcaption>Detections per smell (all matching)</figcaption>
                    </figure>
                    <figure class="scatter-slot">
                        <figcaption>Coordinates on this page; drag a box to filter</figcaption>
                    </figure>
                </div>
            </div>
        `;
        this.results = this.element.querySelector(".results") as HTMLElement;
        this.errorPanel = this.element.querySelector(
            ".error-panel"
        ) as HTMLElement;

        const facets = this.element.querySelector(".facets") as HTMLFormElement;
        facets.addEventListener("submit", (event) => {
            event.preventDefault();
            this.readControls();
            this.filter.offset = 0;
            this.changed();
        });
        (facets.querySelector('select[name="severity"]') as HTMLSelectElement)
            .addEventListener("change", () => {
                this.readControls();
                this.filter.offset = 0;
                this.changed();
            });
        (this.element.querySelector(".bbox-clear") as HTMLButtonElement)
            .addEventListener("click", () => {
                this.filter.bbox = null;
                this.filter.offset = 0;
                this.changed();
            });
        (this.errorPanel.querySelector(".retry") as HTMLButtonElement)
            .addEventListener("click", () => void this.refresh());
        (this.element.querySelector(".prev") as HTMLButtonElement)
            .addEventListener("click", () => this.turnPage(-1));
        (this.element.querySelector(".next") as HTMLButtonElement)
            .addEventListener("click", () => this.turnPage(1));
    }

    /** Replace the filter wholesale, e.g. when restoring it from the URL. */
    setFilter(filter: ExplorerFilter): void {
        if (sameFilter(this.filter, filter)) {
            return;
        }
        this.filter = { ...filter };
        this.writeControls();
        void this.refresh();
    }

    refresh(): Promise<void> {
        this.lastRefresh = this.query();
        return this.lastRefresh;
    }

    private async query(): Promise<void> {
        const token = this.gate.begin();
        const pageParams = filterToParams(this.filter);
        const facetParams = filterToParams(this.filter);
        facetParams.delete("offset");
        facetParams.delete("limit");
        this.element.classList.add("loading");
        try {
            const [page, histogram] = await Promise.all([
                this.gateway.detections(pageParams),
                this.gateway.histogram(facetParams),
            ]);
            if (!this.gate.isCurrent(token)) {
                return;
            }
            this.render(page, histogram);
        } catch (error) {
            if (!this.gate.isCurrent(token)) {
                return;
            }
            this.showError(
                error instanceof Error ? error.message : String(error)
            );
        } finally {
            if (this.gate.isCurrent(token)) {
                this.element.classList.remove("loading");
            }
        }
    }

    private render(page: Page<DetectionRecord>, histogram: Histogram): void {
        this.errorPanel.hidden = true;
        this.results.hidden = false;

        const count = this.results.querySelector(".count") as HTMLElement;
        count.dataset.total = String(page.total);
        count.textContent = `${page.total} detections match`;

        (this.results.querySelector(".empty") as HTMLElement).hidden =
            page.items.length > 0;

        const slot = this.results.querySelector(".table-slot") as HTMLElement;
        slot.textContent = "";
        if (page.items.length > 0) {
            slot.appendChild(this.buildTable(page.items));
        }
        this.updatePager(page);

        const histogramSlot = this.results.querySelector(
            ".histogram-slot"
        ) as HTMLElement;
        histogramSlot.querySelector("svg")?.remove();
        histogramSlot.appendChild(
            renderHistogram(histogram, (smell) => {
                this.filter.smell = smell;
                this.filter.offset = 0;
                this.changed();
            })
        );

        const scatterSlot = this.results.querySelector(
            ".scatter-slot"
        ) as HTMLElement;
        scatterSlot.querySelector("svg")?.remove();
        scatterSlot.appendChild(
            renderScatter(page.items, (bbox) => {
                this.filter.bbox = bbox;
                this.filter.offset = 0;
                this.changed();
            })
        );
    }

    private buildTable(records: DetectionRecord[]): HTMLTableElement {
        const table = el("table", "detections");
        table.innerHTML = `
            <thead><tr>
                <th>Detected</th><th>Entity</th><th>Smell</th><th>Severity</th>
                <th>Org</th><th>Project</th><th>File</th><th>Coordinates</th>
            </tr></thead>
        `;
        const body = el("tbody");
        for (const record of records) {
            const row = el("tr");
            row.dataset.recordId = record.record_id;
            row.dataset.smell = record.smell_name;
            const where =
                record.latitude !== null && record.longitude !== null
                    ? `${record.latitude}, ${record.longitude}`
                    : "-";
            row.append(
                el("td", "", stamp(record.detected_at)),
                el("td", "", record.entity_id),
                el("td", "", record.smell_name),
                el("td", `severity-${record.severity}`, record.severity),
                el("td", "", record.org_id),
                el("td", "", record.project_id),
                el("td", "", record.file_path),
                el("td", "coords", where)
            );
            body.appendChild(row);
        }
        table.appendChild(body);
        return table;
    }

    private updatePager(page: Page<DetectionRecord>): void {
        const pager = this.results.querySelector(".pager") as HTMLElement;
        pager.hidden = page.total <= page.limit && page.offset === 0;
        (pager.querySelector(".pager-note") as HTMLElement).textContent =
            `offset ${page.offset} of ${page.total}`;
        (pager.querySelector(".prev") as HTMLButtonElement).disabled =
            page.offset === 0;
        (pager.querySelector(".next") as HTMLButtonElement).disabled =
            page.offset + page.limit >= page.total;
    }

    private turnPage(direction: number): void {
        const next = this.filter.offset + direction * this.filter.limit;
        this.filter.offset = Math.max(0, next);
        this.changed();
    }

    private changed(): void {
        this.writeControls();
        void this.refresh();
        this.options.onFilterChange?.(this.filter);
    }

    private readControls(): void {
        const value = (name: string): string =>
            (
                this.element.querySelector(
                    `[name="${name}"]`
                ) as HTMLInputElement | HTMLSelectElement
            ).value.trim();
        this.filter.smell = value("smell") || null;
        this.filter.severity = (value("severity") || null) as Severity | null;
        this.filter.orgId = value("org_id") || null;
        this.filter.projectId = value("project_id") || null;
        this.filter.from = value("from") || null;
        this.filter.to = value("to") || null;
    }

    private writeControls(): void {
        const set = (name: string, text: string): void => {
            (
                this.element.querySelector(
                    `[name="${name}"]`
                ) as HTMLInputElement | HTMLSelectElement
            ).value = text;
        };
        set("smell", this.filter.smell ?? "");
        set("severity", this.filter.severity ?? "");
        set("org_id", this.filter.orgId ?? "");
        set("project_id", this.filter.projectId ?? "");
        set("from", this.filter.from ?? "");
        set("to", this.filter.to ?? "");
        const chip = this.element.querySelector(".bbox-chip") as HTMLElement;
        chip.hidden = this.filter.bbox === null;
        if (this.filter.bbox) {
            (chip.querySelector(".bbox-text") as HTMLElement).textContent =
                `box ${this.filter.bbox.join(", ")}`;
        }
    }

    private showError(message: string): void {
        this.errorPanel.hidden = false;
        this.results.hidden = true;
        (this.errorPanel.querySelector(".error-text") as HTMLElement)
            .textContent = `Could not reach the gateway: ${message}`;
    }
}
