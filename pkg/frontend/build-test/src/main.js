/** Navigator bootstrap: owns the state, the caches, and the render loop.
 *
 * Session state round-trips through the URL query string, checklist previews
 * are always fetched (never computed locally), and at most one preview
 * request is in flight (latest wins).
 */
import { ApiError, LatestWins, fetchChecklistBytes, getNode, getTree, postChecklist } from "./api.js";
import { renderBasket } from "./basket.js";
import { renderDetail } from "./detail.js";
import { decodeState, deselectAll, encodeState, showDetail, toggleExpanded, toggleSelected, } from "./state.js";
import { renderTree } from "./tree.js";
const BASE = "";
let state = decodeState(window.location.search);
const tree = {
    roots: null,
    rootsError: null,
    childrenOf: new Map(),
    childErrors: new Map(),
};
const detailCache = new Map();
const goalTitles = new Map();
let activeDetailData = null;
let detailError = null;
let preview = null;
let previewError = null;
let notice = null;
const previewFetches = new LatestWins();
const treePane = document.getElementById("tree-pane");
const detailPane = document.getElementById("detail-pane");
const basketPane = document.getElementById("basket-pane");
function render() {
    renderTree(treePane, tree, state, {
        onToggleExpand: handleToggleExpand,
        onToggleSelect: handleToggleSelect,
        onShowDetail: handleShowDetail,
        onRetry: (id) => (id === null ? loadRoots() : loadChildren(id)),
    });
    renderDetail(detailPane, activeDetailData, detailError, () => {
        if (state.activeDetail) {
            loadDetail(state.activeDetail);
        }
    });
    renderBasket(basketPane, {
        selected: [...state.selected],
        preview,
        previewError,
        notice,
        goalTitles,
    }, { onRemove: handleToggleSelect, onExport: handleExport });
}
function syncUrl() {
    window.history.replaceState(null, "", window.location.pathname + encodeState(state));
}
function setState(next) {
    state = next;
    syncUrl();
    render();
}
async function loadRoots() {
    tree.rootsError = null;
    render();
    try {
        const roots = await getTree(BASE, 1);
        tree.roots = roots;
        for (const goal of roots) {
            goalTitles.set(goal.id, goal.title);
        }
    }
    catch (error) {
        tree.rootsError = describe(error);
    }
    render();
}
async function loadChildren(id) {
    tree.childErrors.delete(id);
    render();
    try {
        const detail = await getNode(BASE, id);
        detailCache.set(id, detail);
        tree.childrenOf.set(id, childSummaries(detail));
    }
    catch (error) {
        tree.childErrors.set(id, describe(error));
    }
    render();
}
function childSummaries(detail) {
    if (detail.operations) {
        return detail.operations.map((op) => ({
            id: op.id,
            title: op.title,
            level: "operation",
            "child-count": 0,
        }));
    }
    return detail.children ?? [];
}
async function loadDetail(id) {
    detailError = null;
    const cached = detailCache.get(id);
    if (cached) {
        activeDetailData = cached;
        render();
        return;
    }
    activeDetailData = null;
    render();
    try {
        const detail = await getNode(BASE, id);
        detailCache.set(id, detail);
        if (state.activeDetail === id) {
            activeDetailData = detail;
        }
    }
    catch (error) {
        detailError = describe(error);
    }
    render();
}
async function refreshPreview() {
    const selection = [...state.selected];
    if (selection.length === 0) {
        preview = null;
        previewError = null;
        render();
        return;
    }
    previewError = null;
    const result = await previewFetches
        .run((signal) => postChecklist(BASE, selection, signal))
        .catch((error) => {
        if (error instanceof ApiError && error.status === 422) {
            const body = error.body;
            const missing = body?.["missing-ids"] ?? [];
            notice = `Removed unknown ids: ${missing.join(", ")}`;
            setState(deselectAll(state, missing));
            void refreshPreview();
            return undefined;
        }
        previewError = describe(error);
        return undefined;
    });
    if (result !== undefined) {
        preview = result;
    }
    render();
}
function handleToggleExpand(id) {
    const next = toggleExpanded(state, id);
    setState(next);
    if (next.expanded.has(id) && !tree.childrenOf.has(id)) {
        void loadChildren(id);
    }
}
function handleToggleSelect(id) {
    notice = null;
    setState(toggleSelected(state, id));
    void refreshPreview();
}
function handleShowDetail(id) {
    setState(showDetail(state, id));
    void loadDetail(id);
}
function handleExport(format) {
    const selection = [...state.selected];
    if (selection.length === 0) {
        return;
    }
    void fetchChecklistBytes(BASE, selection, format)
        .then((bytes) => {
        const type = format === "markdown" ? "text/markdown" : "application/json";
        const blob = new Blob([bytes.buffer], { type });
        const link = document.createElement("a");
        link.href = URL.createObjectURL(blob);
        link.download = format === "markdown" ? "checklist.md" : "checklist.json";
        link.click();
        URL.revokeObjectURL(link.href);
    })
        .catch((error) => {
        notice = `Export failed: ${describe(error)}`;
        render();
    });
}
function describe(error) {
    if (error instanceof ApiError) {
        return `HTTP ${error.status}`;
    }
    return error instanceof Error ? error.message : String(error);
}
async function restoreSession() {
    await loadRoots();
    await Promise.all([...state.expanded].map((id) => loadChildren(id)));
    if (state.activeDetail) {
        await loadDetail(state.activeDetail);
    }
    await refreshPreview();
}
window.addEventListener("popstate", () => {
    state = decodeState(window.location.search);
    void restoreSession();
});
void restoreSession();
