import type { Severity } from "./types.js";

/** Min lat, max lat, min lon, max lon; the order /detections expects. */
export type BBox = [number, number, number, number];

/**
 * Everything the explorer sends to /detections and /detections/histogram.
 * The same object is serialized into the page URL so a reload lands on
 * the identical view.
 */
export interface ExplorerFilter {
    smell: string | null;
    severity: Severity | null;
    orgId: string | null;
    projectId: string | null;
    bbox: BBox | null;
    from: string | null;
    to: string | null;
    offset: number;
    limit: number;
}

export const DEFAULT_LIMIT = 50;

export function emptyFilter(): ExplorerFilter {
    return {
        smell: null,
        severity: null,
        orgId: null,
        projectId: null,
        bbox: null,
        from: null,
        to: null,
        offset: 0,
        limit: DEFAULT_LIMIT,
    };
}

const SEVERITIES: readonly Severity[] = ["low", "medium", "high", "critical"];

/**
 * Serialize a filter using the gateway's own query parameter names.
 * Defaults are omitted so untouched facets leave no residue in the URL.
 */
export function filterToParams(filter: ExplorerFilter): URLSearchParams {
    const params = new URLSearchParams();
    if (filter.smell) params.set("smell", filter.smell);
    if (filter.severity) params.set("severity", filter.severity);
    if (filter.orgId) params.set("org_id", filter.orgId);
    if (filter.projectId) params.set("project_id", filter.projectId);
    if (filter.bbox) params.set("bbox", filter.bbox.join(","));
    if (filter.from) params.set("from", filter.from);
    if (filter.to) params.set("to", filter.to);
    if (filter.offset !== 0) params.set("offset", String(filter.offset));
    if (filter.limit !== DEFAULT_LIMIT) params.set("limit", String(filter.limit));
    return params;
}

/**
 * Rebuild a filter from URL parameters, the inverse of filterToParams.
 * Values that would be rejected by the server (a fifth bbox number, a
 * made-up severity) are dropped rather than round-tripped, so a mangled
 * URL degrades to a broader query instead of a dead page.
 */
export function filterFromParams(params: URLSearchParams): ExplorerFilter {
    const filter = emptyFilter();
    filter.smell = params.get("smell") || null;
    const severity = params.get("severity");
    if (severity && SEVERITIES.includes(severity as Severity)) {
        filter.severity = severity as Severity;
    }
    filter.orgId = params.get("org_id") || null;
    filter.projectId = params.get("project_id") || null;
    const bbox = params.get("bbox");
    if (bbox) {
        const numbers = bbox.split(",").map(Number);
        if (numbers.length === 4 && numbers.every(Number.isFinite)) {
            filter.bbox = numbers as BBox;
        }
    }
    filter.from = params.get("from") || null;
    filter.to = params.get("to") || null;
    const offset = Number(params.get("offset"));
    if (Number.isInteger(offset) && offset > 0) {
        filter.offset = offset;
    }
    const limit = Number(params.get("limit"));
    if (Number.isInteger(limit) && limit >= 1 && limit <= 1000) {
        filter.limit = limit;
    }
    return filter;
}

export function sameFilter(a: ExplorerFilter, b: ExplorerFilter): boolean {
    return filterToParams(a).toString() === filterToParams(b).toString();
}
