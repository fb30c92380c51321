// Panel geometry in centimeters, mirrored from the service config so the
// 2.5 cm icon layout stays logically true at any pixels-per-cm scale.
import { GRASPS } from "./protocol.js";
export const DEFAULT_PANEL = {
    iconSizeCm: 2.5,
    gapCm: 0.5,
    originCm: [0, 0],
    rows: 2,
    cols: 3,
    order: [...GRASPS],
};
export function iconRect(geom, grasp) {
    const i = geom.order.indexOf(grasp);
    const row = Math.floor(i / geom.cols);
    const col = i % geom.cols;
    const x0 = geom.originCm[0] + col * (geom.iconSizeCm + geom.gapCm);
    const y0 = geom.originCm[1] + row * (geom.iconSizeCm + geom.gapCm);
    return { x0, y0, x1: x0 + geom.iconSizeCm, y1: y0 + geom.iconSizeCm };
}
export function iconCenter(geom, grasp) {
    const r = iconRect(geom, grasp);
    return [(r.x0 + r.x1) / 2, (r.y0 + r.y1) / 2];
}
export function panelSizeCm(geom) {
    return [
        geom.cols * geom.iconSizeCm + (geom.cols - 1) * geom.gapCm,
        geom.rows * geom.iconSizeCm + (geom.rows - 1) * geom.gapCm,
    ];
}
/** Rendering-side hover hint only; selection authority stays with the service. */
export function hitTest(geom, xCm, yCm) {
    for (const grasp of geom.order) {
        const r = iconRect(geom, grasp);
        if (xCm >= r.x0 && xCm < r.x1 && yCm >= r.y0 && yCm < r.y1)
            return grasp;
    }
    return null;
}
export function pointerToCm(pxX, pxY, mapping) {
    return [
        (pxX - mapping.panelOffsetPx[0]) / mapping.pxPerCm,
        (pxY - mapping.panelOffsetPx[1]) / mapping.pxPerCm,
    ];
}
export function cmToPx(xCm, yCm, mapping) {
    return [
        mapping.panelOffsetPx[0] + xCm * mapping.pxPerCm,
        mapping.panelOffsetPx[1] + yCm * mapping.pxPerCm,
    ];
}
/** Read the service's layout echo (hello.config.layout) into panel geometry. */
export function geometryFromConfig(config) {
    const layout = (config["layout"] ?? {});
    const geom = { ...DEFAULT_PANEL };
    if (typeof layout["icon_size_cm"] === "number")
        geom.iconSizeCm = layout["icon_size_cm"];
    if (typeof layout["gap_cm"] === "number")
        geom.gapCm = layout["gap_cm"];
    if (Array.isArray(layout["origin_cm"]) && layout["origin_cm"].length === 2) {
        geom.originCm = [Number(layout["origin_cm"][0]), Number(layout["origin_cm"][1])];
    }
    if (typeof layout["rows"] === "number")
        geom.rows = layout["rows"];
    if (typeof layout["cols"] === "number")
        geom.cols = layout["cols"];
    if (Array.isArray(layout["order"]))
        geom.order = layout["order"];
    return geom;
}
