/** Wire types for the navigator API (shapes match the server exactly). */

export type LevelName = "goal" | "level-1" | "level-2" | "level-3" | "operation";

export interface TreeNode {
    id: string;
    title: string;
    level: LevelName;
    "child-count": number;
    children?: TreeNode[];
}

export interface SourceRef {
    framework: string;
    "source-id": string;
    url?: string;
}

export interface OperationDetail {
    id: string;
    title: string;
    description: string;
    agents: string[];
    phase: string;
}

export interface NodeDetail {
    id: string;
    title: string;
    level: LevelName;
    parent?: string;
    statement?: string;
    description?: string;
    "canonical-id"?: string;
    sources?: SourceRef[];
    links?: string[];
    children?: TreeNode[];
    operations?: OperationDetail[];
    agents?: string[];
    phase?: string;
}

export interface ChecklistItem {
    "control-id": string;
    title: string;
    instruction: string;
    recommendations: string[];
    done: boolean;
}

export interface Checklist {
    items: ChecklistItem[];
    distribution: {
        "per-goal-count": Record<string, number>;
        "per-goal-percent": Record<string, number>;
    };
}

export interface MissingControlBody {
    error: "missing-control";
    "missing-ids": string[];
}

export const LEVEL_BADGES: Record<LevelName, string> = {
    goal: "Goal",
    "level-1": "L1",
    "level-2": "L2",
    "level-3": "L3",
    operation: "Op",
};
