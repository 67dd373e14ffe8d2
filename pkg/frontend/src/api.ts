/** Typed client for the navigator API.
 *
 * All checklist math lives on the server; this module only moves bytes, so
 * the UI can never disagree with the CLI about checklist content.
 */

import type { Checklist, NodeDetail, TreeNode } from "./types.js";

export class ApiError extends Error {
    constructor(
        readonly status: number,
        readonly body: unknown,
        message?: string,
    ) {
        super(message ?? `API error ${status}`);
    }
}

async function getJson<T>(url: string, signal?: AbortSignal): Promise<T> {
    const response = await fetch(url, { signal });
    const body = await response.json().catch(() => null);
    if (!response.ok) {
        throw new ApiError(response.status, body);
    }
    return body as T;
}

export async function getTree(base: string, depth = 1, signal?: AbortSignal): Promise<TreeNode[]> {
    const body = await getJson<{ tree: TreeNode[] }>(`${base}/api/tree?depth=${depth}`, signal);
    return body.tree;
}

export async function getNode(base: string, id: string, signal?: AbortSignal): Promise<NodeDetail> {
    return getJson<NodeDetail>(`${base}/api/nodes/${encodeURIComponent(id)}`, signal);
}

export async function postChecklist(
    base: string,
    selection: string[],
    signal?: AbortSignal,
): Promise<Checklist> {
    const response = await fetch(`${base}/api/checklists`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ selection }),
        signal,
    });
    const body = await response.json().catch(() => null);
    if (!response.ok) {
        throw new ApiError(response.status, body);
    }
    return body as Checklist;
}

/** Raw export bytes for download; identical to the CLI's output. */
export async function fetchChecklistBytes(
    base: string,
    selection: string[],
    format: "json" | "markdown",
): Promise<Uint8Array> {
    const payload: Record<string, unknown> = { selection };
    if (format === "markdown") {
        payload.format = "markdown";
    }
    const response = await fetch(`${base}/api/checklists`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(payload),
    });
    if (!response.ok) {
        throw new ApiError(response.status, await response.json().catch(() => null));
    }
    return new Uint8Array(await response.arrayBuffer());
}

/** Runs async tasks so only the most recent one's result is delivered. */
export class LatestWins {
    private seq = 0;
    private controller: AbortController | null = null;

    async run<T>(task: (signal: AbortSignal) => Promise<T>): Promise<T | undefined> {
        const ticket = ++this.seq;
        this.controller?.abort();
        this.controller = new AbortController();
        try {
            const result = await task(this.controller.signal);
            return ticket === this.seq ? result : undefined;
        } catch (error) {
            if (ticket !== this.seq || isAbort(error)) {
                return undefined;
            }
            throw error;
        }
    }
}

function isAbort(error: unknown): boolean {
    return error instanceof Error && error.name === "AbortError";
}
