/** Donut geometry for the checklist's per-goal distribution.
 *
 * Counts and percentages come from the server response untouched; this module
 * only turns them into SVG arcs and legend rows.
 */
const TAU = Math.PI * 2;
function point(cx, cy, r, angle) {
    return [cx + r * Math.sin(angle), cy - r * Math.cos(angle)];
}
export function arcPath(cx, cy, rOuter, rInner, start, end) {
    const largeArc = end - start > Math.PI ? 1 : 0;
    const [x0, y0] = point(cx, cy, rOuter, start);
    const [x1, y1] = point(cx, cy, rOuter, end);
    const [x2, y2] = point(cx, cy, rInner, end);
    const [x3, y3] = point(cx, cy, rInner, start);
    return [
        `M ${x0.toFixed(2)} ${y0.toFixed(2)}`,
        `A ${rOuter} ${rOuter} 0 ${largeArc} 1 ${x1.toFixed(2)} ${y1.toFixed(2)}`,
        `L ${x2.toFixed(2)} ${y2.toFixed(2)}`,
        `A ${rInner} ${rInner} 0 ${largeArc} 0 ${x3.toFixed(2)} ${y3.toFixed(2)}`,
        "Z",
    ].join(" ");
}
export function donutSegments(counts, percents, size = 120) {
    const goals = Object.keys(counts).sort();
    const total = goals.reduce((sum, goal) => sum + counts[goal], 0);
    if (total === 0) {
        return [];
    }
    const cx = size / 2;
    const rOuter = size / 2 - 2;
    const rInner = rOuter * 0.55;
    const segments = [];
    let angle = 0;
    goals.forEach((goalId, index) => {
        const share = counts[goalId] / total;
        const end = angle + share * TAU;
        // A full circle degenerates in SVG arc syntax; back off a hair.
        const safeEnd = share >= 1 ? end - 0.0001 : end;
        segments.push({
            goalId,
            count: counts[goalId],
            percent: percents[goalId] ?? Math.round(share * 100),
            path: arcPath(cx, cx, rOuter, rInner, angle, safeEnd),
            colorIndex: index % 6,
        });
        angle = end;
    });
    return segments;
}
/** Sum of segment shares always reconstructs the full circle. */
export function totalAngle(counts) {
    const total = Object.values(counts).reduce((a, b) => a + b, 0);
    return total > 0 ? TAU : 0;
}
