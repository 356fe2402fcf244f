import type { BBox } from "./filters.js";
import type { DetectionRecord, Histogram } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function svgElement<K extends keyof SVGElementTagNameMap>(
    tag: K,
    attrs: Record<string, string | number> = {}
): SVGElementTagNameMap[K] {
    const node = document.createElementNS(SVG_NS, tag);
    for (const [name, value] of Object.entries(attrs)) {
        node.setAttribute(name, String(value));
    }
    return node;
}

const BAR_HEIGHT = 22;
const BAR_GAP = 6;
const LABEL_WIDTH = 150;
const CHART_WIDTH = 560;

/**
 * Horizontal bar chart of detections per smell. Bar lengths and the
 * printed numbers come straight from the histogram endpoint; nothing is
 * recounted on the client. Clicking a bar narrows the filter to that
 * smell when onPick is given.
 */
export function renderHistogram(
    counts: Histogram,
    onPick?: (smell: string) => void
): SVGSVGElement {
    const entries = Object.entries(counts).sort(
        (a, b) => b[1] - a[1] || a[0].localeCompare(b[0])
    );
    const height = Math.max(entries.length * (BAR_HEIGHT + BAR_GAP), 20);
    const svg = svgElement("svg", {
        viewBox: `0 0 ${CHART_WIDTH} ${height}`,
        width: "100%",
        role: "img",
    });
    svg.classList.add("histogram");
    const peak = Math.max(...entries.map(([, count]) => count), 1);
    const span = CHART_WIDTH - LABEL_WIDTH - 56;

    entries.forEach(([smell, count], index) => {
        const y = index * (BAR_HEIGHT + BAR_GAP);
        const width = Math.max((count / peak) * span, 2);
        const group = svgElement("g");
        group.classList.add("bar");
        group.dataset.smell = smell;
        group.dataset.count = String(count);

        const label = svgElement("text", {
            x: LABEL_WIDTH - 8,
            y: y + BAR_HEIGHT * 0.7,
            "text-anchor": "end",
        });
        label.textContent = smell;
        const rect = svgElement("rect", {
            x: LABEL_WIDTH,
            y,
            width,
            height: BAR_HEIGHT,
            rx: 2,
        });
        const value = svgElement("text", {
            x: LABEL_WIDTH + width + 6,
            y: y + BAR_HEIGHT * 0.7,
        });
        value.classList.add("bar-count");
        value.textContent = String(count);

        group.append(label, rect, value);
        if (onPick) {
            group.addEventListener("click", () => onPick(smell));
            group.classList.add("clickable");
        }
        svg.appendChild(group);
    });
    return svg;
}

export interface ScatterFrame {
    minLat: number;
    maxLat: number;
    minLon: number;
    maxLon: number;
    width: number;
    height: number;
}

const SCATTER_WIDTH = 560;
const SCATTER_HEIGHT = 320;
const FRAME_PAD = 0.5;

/** Pixel-space frame around the plotted coordinate extent. */
export function scatterFrame(
    points: ReadonlyArray<{ latitude: number; longitude: number }>
): ScatterFrame {
    let minLat = Infinity;
    let maxLat = -Infinity;
    let minLon = Infinity;
    let maxLon = -Infinity;
    for (const point of points) {
        minLat = Math.min(minLat, point.latitude);
        maxLat = Math.max(maxLat, point.latitude);
        minLon = Math.min(minLon, point.longitude);
        maxLon = Math.max(maxLon, point.longitude);
    }
    if (points.length === 0) {
        minLat = -60;
        maxLat = 60;
        minLon = -120;
        maxLon = 120;
    }
    return {
        minLat: minLat - FRAME_PAD,
        maxLat: maxLat + FRAME_PAD,
        minLon: minLon - FRAME_PAD,
        maxLon: maxLon + FRAME_PAD,
        width: SCATTER_WIDTH,
        height: SCATTER_HEIGHT,
    };
}

function toPixel(
    frame: ScatterFrame,
    latitude: number,
    longitude: number
): { x: number; y: number } {
    const x =
        ((longitude - frame.minLon) / (frame.maxLon - frame.minLon)) *
        frame.width;
    // SVG y grows downward, latitude grows upward.
    const y =
        ((frame.maxLat - latitude) / (frame.maxLat - frame.minLat)) *
        frame.height;
    return { x, y };
}

export interface PixelRect {
    x1: number;
    y1: number;
    x2: number;
    y2: number;
}

/** Invert a dragged pixel rectangle back into a latitude/longitude box. */
export function pixelRectToBBox(frame: ScatterFrame, rect: PixelRect): BBox {
    const left = Math.min(rect.x1, rect.x2);
    const right = Math.max(rect.x1, rect.x2);
    const top = Math.min(rect.y1, rect.y2);
    const bottom = Math.max(rect.y1, rect.y2);
    const lonAt = (x: number) =>
        frame.minLon + (x / frame.width) * (frame.maxLon - frame.minLon);
    const latAt = (y: number) =>
        frame.maxLat - (y / frame.height) * (frame.maxLat - frame.minLat);
    const round = (value: number) => Math.round(value * 10_000) / 10_000;
    return [
        round(latAt(bottom)),
        round(latAt(top)),
        round(lonAt(left)),
        round(lonAt(right)),
    ];
}

/**
 * Plain SVG scatter of the detections on the current page that carry
 * coordinates. No tile server is involved, so the plot works offline.
 * Dragging a box selects a bbox filter; onSelect receives it on release.
 */
export function renderScatter(
    records: ReadonlyArray<DetectionRecord>,
    onSelect?: (bbox: BBox) => void
): SVGSVGElement {
    const located = records.filter(
        (record): record is DetectionRecord & {
            latitude: number;
            longitude: number;
        } => record.latitude !== null && record.longitude !== null
    );
    const frame = scatterFrame(located);
    const svg = svgElement("svg", {
        viewBox: `0 0 ${frame.width} ${frame.height}`,
        width: "100%",
        role: "img",
    });
    svg.classList.add("scatter");

    svg.appendChild(
        svgElement("rect", {
            x: 0,
            y: 0,
            width: frame.width,
            height: frame.height,
            class: "scatter-bed",
        })
    );

    for (const record of located) {
        const { x, y } = toPixel(frame, record.latitude, record.longitude);
        const dot = svgElement("circle", { cx: x, cy: y, r: 5 });
        dot.classList.add("dot", `severity-${record.severity}`);
        dot.dataset.entity = record.entity_id;
        dot.dataset.smell = record.smell_name;
        const tip = svgElement("title");
        tip.textContent = `${record.entity_id}: ${record.smell_name} (${record.severity})`;
        dot.appendChild(tip);
        svg.appendChild(dot);
    }

    if (onSelect && located.length > 0) {
        wireBoxSelect(svg, frame, onSelect);
    }
    return svg;
}

function wireBoxSelect(
    svg: SVGSVGElement,
    frame: ScatterFrame,
    onSelect: (bbox: BBox) => void
): void {
    let dragging: PixelRect | null = null;
    let outline: SVGRectElement | null = null;

    const toLocal = (event: MouseEvent): { x: number; y: number } => {
        const bounds = svg.getBoundingClientRect();
        const scaleX = bounds.width > 0 ? frame.width / bounds.width : 1;
        const scaleY = bounds.height > 0 ? frame.height / bounds.height : 1;
        return {
            x: (event.clientX - bounds.left) * scaleX,
            y: (event.clientY - bounds.top) * scaleY,
        };
    };

    svg.addEventListener("mousedown", (event) => {
        const { x, y } = toLocal(event);
        dragging = { x1: x, y1: y, x2: x, y2: y };
        outline = svgElement("rect", { class: "select-box" });
        svg.appendChild(outline);
        event.preventDefault();
    });

    svg.addEventListener("mousemove", (event) => {
        if (!dragging || !outline) {
            return;
        }
        const { x, y } = toLocal(event);
        dragging.x2 = x;
        dragging.y2 = y;
        outline.setAttribute("x", String(Math.min(dragging.x1, x)));
        outline.setAttribute("y", String(Math.min(dragging.y1, y)));
        outline.setAttribute("width", String(Math.abs(x - dragging.x1)));
        outline.setAttribute("height", String(Math.abs(y - dragging.y1)));
    });

    svg.addEventListener("mouseup", () => {
        if (!dragging) {
            return;
        }
        const rect = dragging;
        dragging = null;
        outline?.remove();
        outline = null;
        const wide = Math.abs(rect.x2 - rect.x1) > 4;
        const tall = Math.abs(rect.y2 - rect.y1) > 4;
        if (wide && tall) {
            onSelect(pixelRectToBBox(frame, rect));
        }
    });
}
