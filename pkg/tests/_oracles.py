"""Independent reference implementations used only by tests.

Everything here is written from first principles (plain Python loops, dicts
and itertools) so that it shares no code path with the package: brute-force
enumeration MAP, loss-augmented enumeration, an explicit pixel-pair
adjacency scan, and a textbook CIE LUV conversion.
"""

import itertools


def unary_table(graph, weights, num_classes, svm=None, mean=None, scale=None):
    """Per-node, per-label unary energies as plain lists of floats."""
    w1 = list(weights.unary)
    table = []
    for node in graph.nodes:
        feats = list(node.features)
        if mean is not None:
            feats = [(f - m) for f, m in zip(feats, mean)]
        if scale is not None:
            feats = [f / s for f, s in zip(feats, scale)]
        if svm is not None:
            payload = []
            for k in range(num_classes):
                acc = float(svm.biases[k])
                for j, f in enumerate(feats):
                    acc += float(svm.weights[k][j]) * f
                payload.append(acc)
        else:
            payload = feats
        block = len(payload)
        row = []
        for k in range(num_classes):
            acc = 0.0
            for j, v in enumerate(payload):
                acc += w1[k * block + j] * v
            row.append(acc)
        table.append(row)
    return table


def multiplier(table_counts, relation, a, b, mode, clamp):
    """Edge multiplier from raw counts; table_counts may be None (plain)."""
    if mode == "plain" or table_counts is None:
        return 1.0
    coexist, rel_counts = table_counts
    n_i = rel_counts[relation][a][b]
    if mode == "mutex":
        return 1.0 if n_i > 0 else clamp
    if n_i == 0:
        return clamp
    return coexist[a][b] / n_i


def edge_tables(graph, weights, num_classes, mode="plain", counts=None,
                clamp=1.0, alpha=1.0, relation_blocks=True):
    """Per-edge (K, K) energy tables as nested lists."""
    w2 = list(weights.pairwise)
    e_dim = graph.pfeat_dim
    tables = []
    for edge in graph.edges:
        if relation_blocks:
            block = w2[int(edge.relation) * e_dim:(int(edge.relation) + 1) * e_dim]
        else:
            block = w2
        base = 0.0
        for wv, fv in zip(block, edge.pairwise_features):
            base += wv * float(fv)
        base *= edge.boundary_length
        table = []
        for a in range(num_classes):
            row = []
            for b in range(num_classes):
                if a == b:
                    row.append(0.0)
                else:
                    g = multiplier(counts, int(edge.relation), a, b, mode, clamp)
                    row.append(alpha * base * g)
            table.append(row)
        tables.append(table)
    return tables


def labeling_energy(labeling, unary, edges, pair_tables):
    total = 0.0
    for p, row in enumerate(unary):
        total += row[labeling[p]]
    for (p, q), table in zip(edges, pair_tables):
        total += table[labeling[p]][labeling[q]]
    return total


def enumerate_map(graph, weights, num_classes, mode="plain", counts=None,
                  clamp=1.0, alpha=1.0, svm=None, mean=None, scale=None,
                  loss_weights=None, y_true=None):
    """Full enumeration argmin of the energy (optionally minus the loss).

    Returns (best labeling as tuple, best value). Ties go to the first
    labeling in lexicographic order.
    """
    unary = unary_table(graph, weights, num_classes, svm=svm, mean=mean, scale=scale)
    if loss_weights is not None:
        for p in range(len(unary)):
            c = loss_weights[y_true[p]]
            for k in range(num_classes):
                if k != y_true[p]:
                    unary[p][k] -= c
    edges = [(e.p, e.q) for e in graph.edges]
    tables = edge_tables(graph, weights, num_classes, mode=mode, counts=counts,
                         clamp=clamp, alpha=alpha)
    best = None
    best_value = None
    for labeling in itertools.product(range(num_classes), repeat=graph.num_nodes):
        value = labeling_energy(labeling, unary, edges, tables)
        if best_value is None or value < best_value:
            best, best_value = labeling, value
    return best, best_value


def adjacency_by_pixel_scan(assignments):
    """Boundary lengths by checking every pixel's right and down neighbour."""
    h = len(assignments)
    w = len(assignments[0])
    lengths = {}
    for r in range(h):
        for c in range(w):
            a = assignments[r][c]
            for rr, cc in ((r, c + 1), (r + 1, c)):
                if rr >= h or cc >= w:
                    continue
                b = assignments[rr][cc]
                if a != b:
                    key = (min(a, b), max(a, b))
                    lengths[key] = lengths.get(key, 0) + 1
    return lengths


def reference_luv(rgb):
    """Textbook sRGB -> CIE 1976 L*u*v* with the nominal D65 white point."""

    def linearize(u):
        return u / 12.92 if u <= 0.04045 else ((u + 0.055) / 1.055) ** 2.4

    r, g, b = (linearize(v) for v in rgb)
    x = 0.412456439089692 * r + 0.357576077643909 * g + 0.180437483266399 * b
    y = 0.212672851405623 * r + 0.715152155287818 * g + 0.072174993306560 * b
    z = 0.019333895582329 * r + 0.119192025881303 * g + 0.950304078536368 * b
    xn, yn, zn = 0.95047, 1.0, 1.08883
    un = 4 * xn / (xn + 15 * yn + 3 * zn)
    vn = 9 * yn / (xn + 15 * yn + 3 * zn)
    yr = y / yn
    if yr > (6 / 29) ** 3:
        lstar = 116 * yr ** (1 / 3) - 16
    else:
        lstar = (29 / 3) ** 3 * yr
    denom = x + 15 * y + 3 * z
    if denom == 0:
        return (lstar, 0.0, 0.0)
    up = 4 * x / denom
    vp = 9 * y / denom
    return (lstar, 13 * lstar * (up - un), 13 * lstar * (vp - vn))
