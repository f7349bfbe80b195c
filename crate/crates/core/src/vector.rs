//! Small dense-vector helpers shared by the simulation modules.

pub type Vector = Vec<f64>;

pub fn zeros(d: usize) -> Vector {
    vec![0.0; d]
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add_assign(acc: &mut [f64], v: &[f64]) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a += x;
    }
}

/// `acc += scale * v`
pub fn axpy(acc: &mut [f64], scale: f64, v: &[f64]) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a += scale * x;
    }
}

pub fn scaled(v: &[f64], scale: f64) -> Vector {
    v.iter().map(|x| x * scale).collect()
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Coordinate-wise mean of a set of vectors, using compensated summation.
pub fn mean(vectors: &[Vector]) -> Vector {
    let n = vectors.len();
    if n == 0 {
        return Vec::new();
    }
    let d = vectors[0].len();
    (0..d)
        .map(|c| compensated_sum(vectors.iter().map(|v| v[c])) / n as f64)
        .collect()
}

/// Σᵢ ‖vᵢ − v̄‖²
pub fn spread(vectors: &[Vector]) -> f64 {
    let m = mean(vectors);
    vectors.iter().map(|v| dist_sq(v, &m)).sum()
}

/// Σᵢ ‖aᵢ − bᵢ‖²
pub fn paired_dist_sq(a: &[Vector], b: &[Vector]) -> f64 {
    a.iter().zip(b).map(|(x, y)| dist_sq(x, y)).sum()
}
