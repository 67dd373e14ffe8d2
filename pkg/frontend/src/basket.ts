/** Selection basket: live checklist preview, distribution donut, export. */

import { donutSegments } from "./distribution.js";
import type { Checklist } from "./types.js";

export interface BasketCallbacks {
    onRemove(id: string): void;
    onExport(format: "json" | "markdown"): void;
}

export interface BasketView {
    selected: string[];
    preview: Checklist | null;
    previewError: string | null;
    notice: string | null;
    goalTitles: Map<string, string>;
}

const SVG_NS = "http://www.w3.org/2000/svg";

export function renderBasket(
    container: HTMLElement,
    view: BasketView,
    callbacks: BasketCallbacks,
): void {
    container.textContent = "";

    const heading = document.createElement("h2");
    heading.textContent = `Selection (${view.selected.length})`;
    container.append(heading);

    if (view.notice) {
        const notice = document.createElement("p");
        notice.className = "notice";
        notice.textContent = view.notice;
        container.append(notice);
    }

    if (view.selected.length === 0) {
        const hint = document.createElement("p");
        hint.className = "muted";
        hint.textContent = "Tick nodes in the tree to build a checklist.";
        container.append(hint);
    }

    const exports = document.createElement("div");
    exports.className = "export-row";
    for (const format of ["markdown", "json"] as const) {
        const button = document.createElement("button");
        button.type = "button";
        button.textContent = `Export ${format === "markdown" ? "Markdown" : "JSON"}`;
        button.disabled = view.selected.length === 0;
        button.addEventListener("click", () => callbacks.onExport(format));
        exports.append(button);
    }
    container.append(exports);

    if (view.previewError) {
        const error = document.createElement("p");
        error.className = "load-error";
        error.textContent = `Preview failed: ${view.previewError}`;
        container.append(error);
        return;
    }
    if (view.preview === null) {
        return;
    }

    const distribution = view.preview.distribution;
    const segments = donutSegments(
        distribution["per-goal-count"],
        distribution["per-goal-percent"],
    );
    if (segments.length) {
        const chartRow = document.createElement("div");
        chartRow.className = "chart-row";
        const svg = document.createElementNS(SVG_NS, "svg");
        svg.setAttribute("viewBox", "0 0 120 120");
        svg.setAttribute("class", "donut");
        for (const segment of segments) {
            const path = document.createElementNS(SVG_NS, "path");
            path.setAttribute("d", segment.path);
            path.setAttribute("class", `slice slice-${segment.colorIndex}`);
            const tip = document.createElementNS(SVG_NS, "title");
            tip.textContent = `${segment.goalId}: ${segment.count} (${segment.percent}%)`;
            path.append(tip);
            svg.append(path);
        }
        chartRow.append(svg);

        const legend = document.createElement("ul");
        legend.className = "legend";
        for (const segment of segments) {
            const item = document.createElement("li");
            const swatch = document.createElement("span");
            swatch.className = `swatch slice-${segment.colorIndex}`;
            const label = view.goalTitles.get(segment.goalId) ?? segment.goalId;
            item.append(swatch, ` ${label}: ${segment.count} (${segment.percent}%)`);
            legend.append(item);
        }
        chartRow.append(legend);
        container.append(chartRow);
    }

    const list = document.createElement("ol");
    list.className = "preview";
    for (const item of view.preview.items) {
        const row = document.createElement("li");
        const box = document.createElement("span");
        box.className = "box";
        box.textContent = "☐";
        const title = document.createElement("span");
        title.textContent = ` ${item.title}`;
        const remove = document.createElement("button");
        remove.type = "button";
        remove.className = "remove";
        remove.textContent = "×";
        remove.title = "Remove from selection";
        remove.addEventListener("click", () => callbacks.onRemove(item["control-id"]));
        row.append(box, title, remove);
        if (item.instruction) {
            const instruction = document.createElement("div");
            instruction.className = "muted small";
            instruction.textContent = item.instruction;
            row.append(instruction);
        }
        list.append(row);
    }
    container.append(list);
}
