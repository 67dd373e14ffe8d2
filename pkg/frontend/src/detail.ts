/** Detail pane for the active node. */

import type { NodeDetail } from "./types.js";
import { LEVEL_BADGES } from "./types.js";

export function renderDetail(container: HTMLElement, detail: NodeDetail | null,
                             error: string | null, retry: () => void): void {
    container.textContent = "";
    if (error !== null) {
        const wrap = document.createElement("div");
        wrap.className = "load-error";
        wrap.textContent = `Detail failed: ${error} `;
        const button = document.createElement("button");
        button.type = "button";
        button.textContent = "Retry";
        button.addEventListener("click", retry);
        wrap.append(button);
        container.append(wrap);
        return;
    }
    if (detail === null) {
        const hint = document.createElement("p");
        hint.className = "muted";
        hint.textContent = "Select a node to see its full detail.";
        container.append(hint);
        return;
    }

    const heading = document.createElement("h2");
    const badge = document.createElement("span");
    badge.className = `badge badge-${detail.level}`;
    badge.textContent = LEVEL_BADGES[detail.level];
    heading.append(badge, ` ${detail.title}`);
    container.append(heading);

    const meta = document.createElement("p");
    meta.className = "muted";
    meta.textContent = detail.parent ? `${detail.id} (under ${detail.parent})` : detail.id;
    container.append(meta);

    if (detail.statement) {
        container.append(section("Statement", detail.statement));
    }
    if (detail.description) {
        container.append(section("Guidance", detail.description));
    }
    if (detail["canonical-id"]) {
        container.append(section("Canonical duplicate of", detail["canonical-id"]!));
    }
    if (detail.agents && detail.phase) {
        container.append(chipsSection("Agents", detail.agents));
        container.append(section("Phase", detail.phase));
    }
    if (detail.sources?.length) {
        const block = document.createElement("div");
        block.append(subtitle("Sources"));
        const list = document.createElement("ul");
        for (const source of detail.sources) {
            const item = document.createElement("li");
            if (source.url) {
                const link = document.createElement("a");
                link.href = source.url;
                link.target = "_blank";
                link.rel = "noreferrer";
                link.textContent = `${source.framework} ${source["source-id"]}`;
                item.append(link);
            } else {
                item.textContent = `${source.framework} ${source["source-id"]}`;
            }
            list.append(item);
        }
        block.append(list);
        container.append(block);
    }
    if (detail.operations?.length) {
        const block = document.createElement("div");
        block.append(subtitle(`Operations (${detail.operations.length})`));
        for (const op of detail.operations) {
            const card = document.createElement("div");
            card.className = "op-card";
            const title = document.createElement("strong");
            title.textContent = op.title;
            card.append(title);
            const chips = document.createElement("div");
            chips.className = "chips";
            for (const agent of op.agents) {
                chips.append(chip(agent, "agent"));
            }
            chips.append(chip(op.phase, "phase"));
            card.append(chips);
            if (op.description) {
                const text = document.createElement("p");
                text.textContent = op.description;
                card.append(text);
            }
            block.append(card);
        }
        container.append(block);
    }
}

function subtitle(text: string): HTMLElement {
    const h = document.createElement("h3");
    h.textContent = text;
    return h;
}

function section(label: string, text: string): HTMLElement {
    const block = document.createElement("div");
    block.append(subtitle(label));
    const p = document.createElement("p");
    p.textContent = text;
    block.append(p);
    return block;
}

function chipsSection(label: string, values: string[]): HTMLElement {
    const block = document.createElement("div");
    block.append(subtitle(label));
    const chips = document.createElement("div");
    chips.className = "chips";
    for (const value of values) {
        chips.append(chip(value, "agent"));
    }
    block.append(chips);
    return block;
}

function chip(text: string, kind: "agent" | "phase"): HTMLElement {
    const span = document.createElement("span");
    span.className = `chip chip-${kind}`;
    span.textContent = text;
    return span;
}
