//! Quadrature rules: a 12-point degree-6 rule on triangles and 4-point
//! Gauss on edges. Triangle weights sum to one (multiply by the area).

/// `(barycentric coordinates, weight)`.
pub static TRIANGLE: [([f64; 3], f64); 12] = {
    const A1: f64 = 0.501426509658179;
    const B1: f64 = 0.249286745170910;
    const W1: f64 = 0.116786275726379;
    const A2: f64 = 0.873821971016996;
    const B2: f64 = 0.063089014491502;
    const W2: f64 = 0.050844906370207;
    const P: f64 = 0.053145049844817;
    const Q: f64 = 0.310352451033784;
    const R: f64 = 0.636502499121399;
    const W3: f64 = 0.082851075618374;
    [
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
        ([P, Q, R], W3),
        ([P, R, Q], W3),
        ([Q, P, R], W3),
        ([Q, R, P], W3),
        ([R, P, Q], W3),
        ([R, Q, P], W3),
    ]
};

/// `(parameter in [0, 1], weight)`; weights sum to one.
pub static EDGE: [(f64, f64); 4] = {
    const X1: f64 = 0.3399810435848563;
    const X2: f64 = 0.8611363115940526;
    const W1: f64 = 0.6521451548625461;
    const W2: f64 = 0.3478548451374538;
    [
        (0.5 * (1.0 - X2), 0.5 * W2),
        (0.5 * (1.0 - X1), 0.5 * W1),
        (0.5 * (1.0 + X1), 0.5 * W1),
        (0.5 * (1.0 + X2), 0.5 * W2),
    ]
};
