/** UI state and its pure transitions; the URL is the serialized session. */

export interface UiState {
    expanded: Set<string>;
    selected: Set<string>;
    activeDetail: string | null;
}

export function emptyState(): UiState {
    return { expanded: new Set(), selected: new Set(), activeDetail: null };
}

function cloned(state: UiState): UiState {
    return {
        expanded: new Set(state.expanded),
        selected: new Set(state.selected),
        activeDetail: state.activeDetail,
    };
}

export function toggleExpanded(state: UiState, id: string): UiState {
    const next = cloned(state);
    if (next.expanded.has(id)) {
        next.expanded.delete(id);
    } else {
        next.expanded.add(id);
    }
    return next;
}

/** Selection toggle; insertion order is preserved (it is the export order). */
export function toggleSelected(state: UiState, id: string): UiState {
    const next = cloned(state);
    if (next.selected.has(id)) {
        next.selected.delete(id);
    } else {
        next.selected.add(id);
    }
    return next;
}

export function deselectAll(state: UiState, ids: Iterable<string>): UiState {
    const next = cloned(state);
    for (const id of ids) {
        next.selected.delete(id);
    }
    return next;
}

export function showDetail(state: UiState, id: string | null): UiState {
    return { ...cloned(state), activeDetail: id };
}

export function statesEqual(a: UiState, b: UiState): boolean {
    return (
        a.activeDetail === b.activeDetail &&
        setsEqual(a.expanded, b.expanded) &&
        setsEqual(a.selected, b.selected) &&
        [...a.selected].join(",") === [...b.selected].join(",")
    );
}

function setsEqual(a: Set<string>, b: Set<string>): boolean {
    if (a.size !== b.size) {
        return false;
    }
    for (const value of a) {
        if (!b.has(value)) {
            return false;
        }
    }
    return true;
}

/** Encode the session into query parameters (ids are comma-safe by grammar). */
export function encodeState(state: UiState): string {
    const params = new URLSearchParams();
    if (state.expanded.size) {
        params.set("expanded", [...state.expanded].join(","));
    }
    if (state.selected.size) {
        params.set("selected", [...state.selected].join(","));
    }
    if (state.activeDetail) {
        params.set("detail", state.activeDetail);
    }
    const text = params.toString();
    return text ? `?${text}` : "";
}

const ID_PATTERN = /^SSS(-\d{2}){1,5}$/;

export function decodeState(query: string): UiState {
    const params = new URLSearchParams(query.startsWith("?") ? query.slice(1) : query);
    const state = emptyState();
    for (const id of splitIds(params.get("expanded"))) {
        state.expanded.add(id);
    }
    for (const id of splitIds(params.get("selected"))) {
        state.selected.add(id);
    }
    const detail = params.get("detail");
    state.activeDetail = detail && ID_PATTERN.test(detail) ? detail : null;
    return state;
}

function splitIds(raw: string | null): string[] {
    if (!raw) {
        return [];
    }
    return raw.split(",").filter((id) => ID_PATTERN.test(id));
}
