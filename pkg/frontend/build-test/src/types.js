/** Wire types for the navigator API (shapes match the server exactly). */
export const LEVEL_BADGES = {
    goal: "Goal",
    "level-1": "L1",
    "level-2": "L2",
    "level-3": "L3",
    operation: "Op",
};
