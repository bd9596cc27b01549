//! Shared numerical tolerances.

/// Absolute tolerance for constructed measures and per-coordinate profile
/// equality.
pub const CONSTRUCTION: f64 = 1e-12;

/// Absolute tolerance for derived identities (expectations, invariant
/// matching, price preservation).
pub const DERIVED: f64 = 1e-10;

/// Gaussian normal-form comparison tolerance.
pub const GAUSS: f64 = 1e-8;

/// Default cap on enumerated group order.
pub const GROUP_CAP: u64 = 1_000_000;

/// Default casino grid.
pub const CASINO_GRID: usize = 256;

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub fn close_slice(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| close(*x, *y, tol))
}

/// Lexicographic comparison that treats coordinates within `tol` as equal.
pub fn lex_cmp(a: &[f64], b: &[f64], tol: f64) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > tol {
            return x.partial_cmp(y).unwrap_or(Ordering::Equal);
        }
    }
    a.len().cmp(&b.len())
}
