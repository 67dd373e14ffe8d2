/** Tree pane rendering: lazily expanded goal/requirement hierarchy. */

import type { TreeNode } from "./types.js";
import { LEVEL_BADGES } from "./types.js";
import type { UiState } from "./state.js";

export interface TreeCallbacks {
    onToggleExpand(id: string): void;
    onToggleSelect(id: string): void;
    onShowDetail(id: string): void;
    onRetry(id: string | null): void;
}

export interface TreeData {
    roots: TreeNode[] | null;
    rootsError: string | null;
    childrenOf: Map<string, TreeNode[]>;
    childErrors: Map<string, string>;
}

export function renderTree(
    container: HTMLElement,
    data: TreeData,
    state: UiState,
    callbacks: TreeCallbacks,
): void {
    container.textContent = "";
    if (data.rootsError !== null) {
        container.append(errorRow(data.rootsError, () => callbacks.onRetry(null)));
        return;
    }
    if (data.roots === null) {
        const loading = document.createElement("p");
        loading.className = "muted";
        loading.textContent = "Loading catalog…";
        container.append(loading);
        return;
    }
    container.append(nodeList(data.roots, data, state, callbacks));
}

function nodeList(
    nodes: TreeNode[],
    data: TreeData,
    state: UiState,
    callbacks: TreeCallbacks,
): HTMLUListElement {
    const list = document.createElement("ul");
    list.className = "tree";
    for (const node of nodes) {
        list.append(nodeRow(node, data, state, callbacks));
    }
    return list;
}

function nodeRow(
    node: TreeNode,
    data: TreeData,
    state: UiState,
    callbacks: TreeCallbacks,
): HTMLLIElement {
    const item = document.createElement("li");
    const row = document.createElement("div");
    row.className = "tree-row";
    row.dataset.id = node.id;

    const childCount = node["child-count"];
    const expander = document.createElement("button");
    expander.className = "expander";
    expander.type = "button";
    if (childCount > 0) {
        const isOpen = state.expanded.has(node.id);
        expander.textContent = isOpen ? "▾" : "▸";
        expander.title = isOpen ? "Collapse" : "Expand";
        expander.addEventListener("click", () => callbacks.onToggleExpand(node.id));
    } else {
        expander.textContent = "·";
        expander.disabled = true;
    }
    row.append(expander);

    const checkbox = document.createElement("input");
    checkbox.type = "checkbox";
    checkbox.checked = state.selected.has(node.id);
    checkbox.title = "Add to checklist selection";
    checkbox.addEventListener("change", () => callbacks.onToggleSelect(node.id));
    row.append(checkbox);

    const badge = document.createElement("span");
    badge.className = `badge badge-${node.level}`;
    badge.textContent = LEVEL_BADGES[node.level];
    row.append(badge);

    const title = document.createElement("a");
    title.className = "node-title";
    title.href = "#";
    title.textContent = node.title || node.id;
    if (state.activeDetail === node.id) {
        title.classList.add("active");
    }
    title.addEventListener("click", (event) => {
        event.preventDefault();
        callbacks.onShowDetail(node.id);
    });
    row.append(title);

    if (childCount > 0) {
        const count = document.createElement("span");
        count.className = "child-count";
        count.textContent = String(childCount);
        row.append(count);
    }
    item.append(row);

    if (state.expanded.has(node.id) && childCount > 0) {
        const error = data.childErrors.get(node.id);
        if (error !== undefined) {
            item.append(errorRow(error, () => callbacks.onRetry(node.id)));
        } else {
            const children = data.childrenOf.get(node.id);
            if (children === undefined) {
                const loading = document.createElement("div");
                loading.className = "muted nested";
                loading.textContent = "Loading…";
                item.append(loading);
            } else {
                item.append(nodeList(children, data, state, callbacks));
            }
        }
    }
    return item;
}

function errorRow(message: string, retry: () => void): HTMLElement {
    const wrap = document.createElement("div");
    wrap.className = "load-error";
    const text = document.createElement("span");
    text.textContent = `Load failed: ${message} `;
    const button = document.createElement("button");
    button.type = "button";
    button.textContent = "Retry";
    button.addEventListener("click", retry);
    wrap.append(text, button);
    return wrap;
}
