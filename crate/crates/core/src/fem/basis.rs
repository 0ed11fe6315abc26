//! Lagrange bases on a triangle in barycentric form.
//!
//! P2 local node order: vertices 0, 1, 2, then the midpoints of edges
//! (0,1), (1,2), (2,0).

pub const P2_EDGES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

pub fn p2_values(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

/// Physical gradients given the barycentric gradients of the element.
pub fn p2_gradients(l: [f64; 3], gl: &[[f64; 2]; 3]) -> [[f64; 2]; 6] {
    let mut g = [[0.0; 2]; 6];
    for i in 0..3 {
        let s = 4.0 * l[i] - 1.0;
        g[i] = [s * gl[i][0], s * gl[i][1]];
    }
    for (k, &[a, b]) in P2_EDGES.iter().enumerate() {
        g[3 + k] = [
            4.0 * (l[a] * gl[b][0] + l[b] * gl[a][0]),
            4.0 * (l[a] * gl[b][1] + l[b] * gl[a][1]),
        ];
    }
    g
}

/// 1D quadratic trace basis on an edge `t in [0, 1]`: start, end, midpoint.
pub fn p2_edge_values(t: f64) -> [f64; 3] {
    [(1.0 - t) * (1.0 - 2.0 * t), t * (2.0 * t - 1.0), 4.0 * t * (1.0 - t)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity_and_nodality() {
        let nodes = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.5, 0.5, 0.0],
            [0.0, 0.5, 0.5],
            [0.5, 0.0, 0.5],
        ];
        for (i, n) in nodes.iter().enumerate() {
            let v = p2_values(*n);
            for (j, vj) in v.iter().enumerate() {
                assert!((vj - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
        let l = [0.2, 0.3, 0.5];
        assert!((p2_values(l).iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let gl = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        let g = p2_gradients(l, &gl);
        let s: [f64; 2] = g.iter().fold([0.0, 0.0], |a, x| [a[0] + x[0], a[1] + x[1]]);
        assert!(s[0].abs() < 1e-14 && s[1].abs() < 1e-14);
    }
}
