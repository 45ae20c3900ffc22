//! Distances between distributions and between states.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::distribution::Distribution;
use crate::error::MetricsError;
use crate::walk::StateVector;

/// Inputs whose mass differs from one by more than this are rejected.
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// Shortest round-trip text for a real, switching to exponent form outside
/// `[1e-4, 1e6)`.
pub fn fmt_real(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e6).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// `(1/√2)·√Σ(√p_k − √q_k)²` over the union of both outcome sets.
pub fn hellinger_distance(p: &Distribution, q: &Distribution) -> Result<f64, MetricsError> {
    let p = p.probabilities(NORMALIZATION_TOL)?;
    let q = q.probabilities(NORMALIZATION_TOL)?;
    let keys: BTreeSet<u64> = p.keys().chain(q.keys()).copied().collect();
    let s: f64 = keys
        .iter()
        .map(|k| {
            let a = p.get(k).copied().unwrap_or(0.0).sqrt();
            let b = q.get(k).copied().unwrap_or(0.0).sqrt();
            (a - b) * (a - b)
        })
        .sum();
    Ok((s / 2.0).sqrt().min(1.0))
}

/// `(1 − h²)²`.
pub fn hellinger_fidelity(p: &Distribution, q: &Distribution) -> Result<f64, MetricsError> {
    let h = hellinger_distance(p, q)?;
    let f = 1.0 - h * h;
    Ok((f * f).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Similarity {
    Dissimilar,
    Similar,
    AlmostAlike,
}

/// Buckets a fidelity at 0.5 and 0.95.
pub fn classify(fidelity: f64) -> Similarity {
    if fidelity > 0.95 {
        Similarity::AlmostAlike
    } else if fidelity >= 0.5 {
        Similarity::Similar
    } else {
        Similarity::Dissimilar
    }
}

/// `min_γ ‖a − e^{iγ} b‖₂`, equal to `√(2 − 2|⟨a|b⟩|)` for unit vectors.
pub fn state_distance_phase_aligned(a: &StateVector, b: &StateVector) -> Result<f64, MetricsError> {
    if a.dim() != b.dim() {
        return Err(MetricsError::Dimension(a.dim(), b.dim()));
    }
    let ov = b.inner(a);
    let ph = if ov.norm() > 0.0 { ov / ov.norm() } else { num_complex::Complex64::new(1.0, 0.0) };
    let d: f64 = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - ph * y).norm_sqr())
        .sum();
    Ok(d.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelitySeries {
    steps: Vec<usize>,
    values: Vec<f64>,
    labels: (String, String),
}

impl FidelitySeries {
    pub fn new(steps: Vec<usize>, values: Vec<f64>, labels: (String, String)) -> Result<Self, MetricsError> {
        if steps.len() != values.len() {
            return Err(MetricsError::SeriesLength(steps.len(), values.len()));
        }
        if let Some(&v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(MetricsError::OutOfRange(v));
        }
        Ok(FidelitySeries { steps, values, labels })
    }

    pub fn steps(&self) -> &[usize] {
        &self.steps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> (&str, &str) {
        (&self.labels.0, &self.labels.1)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# compare={}:{}", self.labels.0, self.labels.1).unwrap();
        s.push_str("t,fidelity\n");
        for (t, v) in self.steps.iter().zip(&self.values) {
            writeln!(s, "{t},{}", fmt_real(*v)).unwrap();
        }
        s
    }

    /// Parses one or more series, each starting at a `# compare=` line.
    pub fn parse_csv(text: &str) -> Result<Vec<FidelitySeries>, MetricsError> {
        let bad = |m: String| MetricsError::Parse(m);
        let mut out = Vec::new();
        let mut cur: Option<(String, String, Vec<usize>, Vec<f64>)> = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix("# compare=") {
                if let Some((a, b, s, v)) = cur.take() {
                    out.push(FidelitySeries::new(s, v, (a, b))?);
                }
                let (a, b) = rest.split_once(':').ok_or_else(|| bad(format!("bad compare '{rest}'")))?;
                cur = Some((a.to_string(), b.to_string(), Vec::new(), Vec::new()));
                continue;
            }
            if line.starts_with('#') || line.starts_with("t,") {
                continue;
            }
            let (_, _, s, v) = cur.as_mut().ok_or_else(|| bad("row before '# compare=' header".into()))?;
            let (t, f) = line.split_once(',').ok_or_else(|| bad(format!("bad row '{line}'")))?;
            s.push(t.trim().parse().map_err(|_| bad(format!("bad step '{t}'")))?);
            v.push(f.trim().parse().map_err(|_| bad(format!("bad fidelity '{f}'")))?);
        }
        if let Some((a, b, s, v)) = cur {
            out.push(FidelitySeries::new(s, v, (a, b))?);
        }
        Ok(out)
    }
}

/// Mann-Kendall trend statistic `S = Σ_{i<j} sign(x_j − x_i)`. Negative
/// values indicate a decreasing trend.
pub fn mann_kendall(values: &[f64]) -> i64 {
    let mut s = 0i64;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let d = values[j] - values[i];
            if d > 0.0 {
                s += 1;
            } else if d < 0.0 {
                s -= 1;
            }
        }
    }
    s
}
