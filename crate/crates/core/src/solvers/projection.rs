use alloc::vec::Vec;

/// Euclidean projection of `v` onto the probability simplex, in place.
///
/// Sort-based: find the largest `k` such that the `k` largest entries stay
/// positive after subtracting the common shift `θ = (Σ_top − 1) / k`.
pub fn project_onto_simplex(v: &mut [f64]) {
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let t = (cumulative - 1.0) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}
