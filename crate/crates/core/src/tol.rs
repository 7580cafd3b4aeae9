/// Comparison tolerances for floating point identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tol {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tol {
    fn default() -> Self {
        Tol { rel: 1e-9, abs: 1e-12 }
    }
}

impl Tol {
    /// Reads `DHAP_TOL` as an override of the relative tolerance.
    pub fn from_env() -> Self {
        let mut t = Tol::default();
        if let Some(v) = std::env::var("DHAP_TOL").ok().and_then(|s| s.parse::<f64>().ok()) {
            if v > 0.0 && v.is_finite() {
                t.rel = v;
            }
        }
        t
    }

    /// `a <= b` up to the relative tolerance measured against `scale`.
    pub fn le(&self, a: f64, b: f64, scale: f64) -> bool {
        a <= b + self.rel * scale.abs().max(b.abs()) + self.abs
    }

    /// Relative residual `diff / scale`, with `scale` floored at one.
    pub fn relative(&self, diff: f64, scale: f64) -> f64 {
        diff / scale.abs().max(1.0)
    }

    pub fn accepts_residual(&self, residual: f64) -> bool {
        residual <= self.rel
    }
}
