"""Hot rotated-box kernels: corners, convex clipping, IoU, greedy NMS.

Single-source scalar implementations over ``(cx, cy, w, h, theta)`` rows.
Under the numba backend every function here is ``@njit``-compiled; under the
numpy backend the same code runs as plain Python (see ``holodet._backend``).

Conventions: y-down image axes; corners emitted clockwise on screen; the
signed shoelace area used here is negative for that orientation. Intersection
areas below ``AREA_EPS`` count as empty so collinear slivers can never produce
negative or NaN IoU.
"""

import numpy as np

from .._backend import maybe_jit

# Clipping a quadrilateral by four half-planes yields at most 8 vertices;
# 16 leaves headroom for degenerate duplicates.
_BUF = 16

AREA_EPS = 1e-12


@maybe_jit(cache=True)
def box_corners_array(box):
    """Corners of one (cx, cy, w, h, theta) row, (4, 2), clockwise on screen.

    Order starts at the local (-w/2, -h/2) corner rotated by theta.
    """
    cx, cy, w, h, t = box[0], box[1], box[2], box[3], box[4]
    c = np.cos(t)
    s = np.sin(t)
    hw = 0.5 * w
    hh = 0.5 * h
    out = np.empty((4, 2))
    out[0, 0] = cx - hw * c + hh * s
    out[0, 1] = cy - hw * s - hh * c
    out[1, 0] = cx + hw * c + hh * s
    out[1, 1] = cy + hw * s - hh * c
    out[2, 0] = cx + hw * c - hh * s
    out[2, 1] = cy + hw * s + hh * c
    out[3, 0] = cx - hw * c - hh * s
    out[3, 1] = cy - hw * s + hh * c
    return out


@maybe_jit(cache=True)
def _abs_polygon_area(xs, ys, n):
    acc = 0.0
    for i in range(n):
        j = (i + 1) % n
        acc += xs[j] * ys[i] - xs[i] * ys[j]
    return abs(0.5 * acc)


@maybe_jit(cache=True)
def convex_intersection_area(pa, pb):
    """Area of the intersection of two convex polygons (Sutherland-Hodgman).

    ``pa`` is clipped by each edge of ``pb``; both are (k, 2) arrays in the
    corner order produced by :func:`box_corners_array`. Points exactly on a
    clip edge are kept, so clipping a polygon against itself is exact.
    """
    cur_x = np.empty(_BUF)
    cur_y = np.empty(_BUF)
    nxt_x = np.empty(_BUF)
    nxt_y = np.empty(_BUF)
    n_cur = pa.shape[0]
    for k in range(n_cur):
        cur_x[k] = pa[k, 0]
        cur_y[k] = pa[k, 1]

    m = pb.shape[0]
    for e in range(m):
        ax = pb[e, 0]
        ay = pb[e, 1]
        f = (e + 1) % m
        ex = pb[f, 0] - ax
        ey = pb[f, 1] - ay
        n_nxt = 0
        for i in range(n_cur):
            j = (i + 1) % n_cur
            # cross(edge, p - a); >= 0 is the inside half-plane for our
            # screen-clockwise corner order
            si = ex * (cur_y[i] - ay) - ey * (cur_x[i] - ax)
            sj = ex * (cur_y[j] - ay) - ey * (cur_x[j] - ax)
            if si >= 0.0:
                nxt_x[n_nxt] = cur_x[i]
                nxt_y[n_nxt] = cur_y[i]
                n_nxt += 1
            if (si > 0.0 and sj < 0.0) or (si < 0.0 and sj > 0.0):
                t = si / (si - sj)
                nxt_x[n_nxt] = cur_x[i] + t * (cur_x[j] - cur_x[i])
                nxt_y[n_nxt] = cur_y[i] + t * (cur_y[j] - cur_y[i])
                n_nxt += 1
        for k in range(n_nxt):
            cur_x[k] = nxt_x[k]
            cur_y[k] = nxt_y[k]
        n_cur = n_nxt
        if n_cur < 3:
            return 0.0

    area = _abs_polygon_area(cur_x, cur_y, n_cur)
    if area < AREA_EPS:
        return 0.0
    return area


@maybe_jit(cache=True)
def pair_iou(a, b):
    """IoU of two (cx, cy, w, h, theta) rows in [0, 1].

    Purely geometric (no image clipping); identical rows give exactly 1.0.
    """
    ca = box_corners_array(a)
    cb = box_corners_array(b)

    # axis-aligned reject
    ax0 = ca[0, 0]
    ax1 = ca[0, 0]
    ay0 = ca[0, 1]
    ay1 = ca[0, 1]
    bx0 = cb[0, 0]
    bx1 = cb[0, 0]
    by0 = cb[0, 1]
    by1 = cb[0, 1]
    for k in range(1, 4):
        ax0 = min(ax0, ca[k, 0])
        ax1 = max(ax1, ca[k, 0])
        ay0 = min(ay0, ca[k, 1])
        ay1 = max(ay1, ca[k, 1])
        bx0 = min(bx0, cb[k, 0])
        bx1 = max(bx1, cb[k, 0])
        by0 = min(by0, cb[k, 1])
        by1 = max(by1, cb[k, 1])
    if ax1 < bx0 or bx1 < ax0 or ay1 < by0 or by1 < ay0:
        return 0.0

    inter = convex_intersection_area(ca, cb)
    if inter <= 0.0:
        return 0.0
    # shoelace areas keep identical inputs exactly equal to the intersection
    area_a = _abs_polygon_area(ca[:, 0], ca[:, 1], 4)
    area_b = _abs_polygon_area(cb[:, 0], cb[:, 1], 4)
    union = area_a + area_b - inter
    if union <= AREA_EPS:
        return 0.0
    iou = inter / union
    if iou > 1.0:
        return 1.0
    if iou < 0.0:
        return 0.0
    return iou


@maybe_jit(cache=True)
def iou_matrix(boxes_a, boxes_b):
    """Pairwise IoU of (N, 5) vs (M, 5) rows, returns (N, M)."""
    n = boxes_a.shape[0]
    m = boxes_b.shape[0]
    out = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            out[i, j] = pair_iou(boxes_a[i], boxes_b[j])
    return out


@maybe_jit(cache=True)
def nms_keep(boxes, order, iou_threshold):
    """Greedy suppression over pre-sorted candidates.

    ``order`` holds row indices sorted by descending score (ties broken by
    the caller). Returns a keep mask aligned with ``order`` positions; a
    candidate is suppressed when its IoU with an earlier kept box exceeds
    ``iou_threshold`` (strictly).
    """
    n = order.shape[0]
    keep = np.zeros(n, dtype=np.bool_)
    suppressed = np.zeros(n, dtype=np.bool_)
    for pos in range(n):
        if suppressed[pos]:
            continue
        keep[pos] = True
        i = order[pos]
        for later in range(pos + 1, n):
            if suppressed[later]:
                continue
            if pair_iou(boxes[i], boxes[order[later]]) > iou_threshold:
                suppressed[later] = True
    return keep
