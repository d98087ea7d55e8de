//! Fixed quadrature rules on the reference edge and triangle.

/// 3-point Gauss-Legendre on `[0, 1]`: `(t, weight)`, exact to degree 5.
pub const GAUSS3_EDGE: [(f64, f64); 3] = [
    (0.5 - 0.387_298_334_620_741_7, 0.277_777_777_777_777_8),
    (0.5, 0.444_444_444_444_444_4),
    (0.5 + 0.387_298_334_620_741_7, 0.277_777_777_777_777_8),
];

const A1: f64 = 0.059_715_871_789_769_82;
const B1: f64 = 0.470_142_064_105_115_1;
const W1: f64 = 0.132_394_152_788_506_2;
const A2: f64 = 0.797_426_985_353_087_3;
const B2: f64 = 0.101_286_507_323_456_3;
const W2: f64 = 0.125_939_180_544_827_2;

/// 7-point degree-5 rule on the triangle: barycentric point and weight
/// (weights sum to 1, multiply by the area).
pub const TRIANGLE7: [([f64; 3], f64); 7] = [
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
    ([A1, B1, B1], W1),
    ([B1, A1, B1], W1),
    ([B1, B1, A1], W1),
    ([A2, B2, B2], W2),
    ([B2, A2, B2], W2),
    ([B2, B2, A2], W2),
];
