//! Cell-count and pseudo-dimension bounds for arrangements of `k` hyperplanes in `R^d`.

/// `d·k^d`, or 1 with no hyperplanes; saturates at `u64::MAX`.
pub fn buck_cell_bound(d: u64, k: u64) -> u64 {
    if k == 0 {
        return 1;
    }
    u32::try_from(d).ok().and_then(|e| k.checked_pow(e)).and_then(|p| p.checked_mul(d)).unwrap_or(u64::MAX)
}

/// Exact number of regions cut from `R^d` by `k` hyperplanes in general position:
/// `Σ_{i≤d} C(k, i)`.
pub fn generic_cell_count(d: u64, k: u64) -> u128 {
    let mut total: u128 = 0;
    let mut c: u128 = 1;
    for i in 0..=d.min(k) {
        total += c;
        c = c * (k - i) as u128 / (i + 1) as u128;
    }
    total
}

/// `9·d·log2(4·d·t)` for a `(d, t)`-delineable class.
pub fn pdim_upper_bound(d: u64, t: u64) -> f64 {
    let (d, t) = (d as f64, t as f64);
    9.0 * d * (4.0 * d * t).log2()
}
