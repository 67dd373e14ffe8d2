/** Typed client for the navigator API.
 *
 * All checklist math lives on the server; this module only moves bytes, so
 * the UI can never disagree with the CLI about checklist content.
 */
export class ApiError extends Error {
    constructor(status, body, message) {
        super(message ?? `API error ${status}`);
        this.status = status;
        this.body = body;
    }
}
async function getJson(url, signal) {
    const response = await fetch(url, { signal });
    const body = await response.json().catch(() => null);
    if (!response.ok) {
        throw new ApiError(response.status, body);
    }
    return body;
}
export async function getTree(base, depth = 1, signal) {
    const body = await getJson(`${base}/api/tree?depth=${depth}`, signal);
    return body.tree;
}
export async function getNode(base, id, signal) {
    return getJson(`${base}/api/nodes/${encodeURIComponent(id)}`, signal);
}
export async function postChecklist(base, selection, signal) {
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
    return body;
}
/** Raw export bytes for download; identical to the CLI's output. */
export async function fetchChecklistBytes(base, selection, format) {
    const payload = { selection };
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
    constructor() {
        this.seq = 0;
        this.controller = null;
    }
    async run(task) {
        const ticket = ++this.seq;
        this.controller?.abort();
        this.controller = new AbortController();
        try {
            const result = await task(this.controller.signal);
            return ticket === this.seq ? result : undefined;
        }
        catch (error) {
            if (ticket !== this.seq || isAbort(error)) {
                return undefined;
            }
            throw error;
        }
    }
}
function isAbort(error) {
    return error instanceof Error && error.name === "AbortError";
}
