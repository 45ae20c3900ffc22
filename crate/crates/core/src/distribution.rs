//! Measurement outcome distributions.
//!
//! Outcome `k` packs the measured qubits little-endian: the first measured
//! qubit is bit 0. Exact distributions hold probabilities; sampled ones hold
//! counts together with the shot total.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::MetricsError;

const EXACT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    outcomes: BTreeMap<u64, f64>,
    shots: Option<u64>,
}

impl Distribution {
    /// Probabilities summing to one within 1e-9.
    pub fn exact(probs: BTreeMap<u64, f64>) -> Result<Self, MetricsError> {
        if let Some(&p) = probs.values().find(|p| **p < 0.0 || p.is_nan()) {
            return Err(MetricsError::Negative(p));
        }
        let total: f64 = probs.values().sum();
        if (total - 1.0).abs() > EXACT_TOL {
            return Err(MetricsError::NotNormalized(total));
        }
        Ok(Distribution { outcomes: probs, shots: None })
    }

    pub fn from_counts(counts: BTreeMap<u64, u64>) -> Self {
        let shots = counts.values().sum();
        Distribution { outcomes: counts.into_iter().map(|(k, v)| (k, v as f64)).collect(), shots: Some(shots) }
    }

    /// No validation; the metrics check normalization on use.
    pub fn raw(outcomes: BTreeMap<u64, f64>, shots: Option<u64>) -> Self {
        Distribution { outcomes, shots }
    }

    pub fn point(outcome: u64) -> Self {
        Distribution { outcomes: BTreeMap::from([(outcome, 1.0)]), shots: None }
    }

    pub fn shots(&self) -> Option<u64> {
        self.shots
    }

    pub fn is_sampled(&self) -> bool {
        self.shots.is_some()
    }

    /// Raw stored values: probabilities or counts.
    pub fn values(&self) -> &BTreeMap<u64, f64> {
        &self.outcomes
    }

    pub fn get(&self, outcome: u64) -> f64 {
        self.outcomes.get(&outcome).copied().unwrap_or(0.0)
    }

    /// Probabilities, dividing counts by shots. Exact inputs off by more than
    /// `tol` from unit mass are rejected.
    pub fn probabilities(&self, tol: f64) -> Result<BTreeMap<u64, f64>, MetricsError> {
        if let Some(&p) = self.outcomes.values().find(|p| **p < 0.0 || p.is_nan()) {
            return Err(MetricsError::Negative(p));
        }
        match self.shots {
            Some(0) => Err(MetricsError::ZeroShots),
            Some(n) => Ok(self.outcomes.iter().map(|(k, v)| (*k, v / n as f64)).collect()),
            None => {
                let total: f64 = self.outcomes.values().sum();
                if (total - 1.0).abs() > tol {
                    return Err(MetricsError::NotNormalized(total));
                }
                Ok(self.outcomes.clone())
            }
        }
    }

    /// `outcome,count_or_prob` rows under a `# shots=N` header, `N = 0` for
    /// exact distributions.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# shots={}", self.shots.unwrap_or(0)).unwrap();
        s.push_str("outcome,count_or_prob\n");
        for (k, v) in &self.outcomes {
            match self.shots {
                Some(_) => writeln!(s, "{k},{}", *v as u64).unwrap(),
                None => writeln!(s, "{k},{v}").unwrap(),
            }
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self, MetricsError> {
        let bad = |m: String| MetricsError::Parse(m);
        let mut shots = None;
        let mut outcomes = BTreeMap::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("shots=") {
                    shots = Some(v.trim().parse::<u64>().map_err(|_| bad(format!("bad shots '{v}'")))?);
                }
                continue;
            }
            if line.starts_with("outcome") {
                continue;
            }
            let (k, v) = line.split_once(',').ok_or_else(|| bad(format!("bad row '{line}'")))?;
            let k = k.trim().parse::<u64>().map_err(|_| bad(format!("bad outcome '{k}'")))?;
            let v = v.trim().parse::<f64>().map_err(|_| bad(format!("bad value '{v}'")))?;
            outcomes.insert(k, v);
        }
        let shots = shots.ok_or_else(|| bad("missing '# shots=' header".into()))?;
        Ok(Distribution { outcomes, shots: (shots > 0).then_some(shots) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_rejects_bad_mass() {
        assert!(Distribution::exact(BTreeMap::from([(0, 0.5), (1, 0.4)])).is_err());
        assert!(Distribution::exact(BTreeMap::from([(0, 1.5), (1, -0.5)])).is_err());
        assert!(Distribution::exact(BTreeMap::from([(0, 0.5), (1, 0.5)])).is_ok());
    }

    #[test]
    fn counts_normalize_by_shots() {
        let d = Distribution::from_counts(BTreeMap::from([(0, 30), (3, 70)]));
        assert_eq!(d.shots(), Some(100));
        let p = d.probabilities(1e-6).unwrap();
        assert_eq!(p[&3], 0.7);
        let z = Distribution::from_counts(BTreeMap::from([(0, 0)]));
        assert_eq!(z.probabilities(1e-6), Err(MetricsError::ZeroShots));
    }

    #[test]
    fn csv_round_trip() {
        let d = Distribution::from_counts(BTreeMap::from([(0, 12), (1, 0), (2, 88)]));
        assert_eq!(Distribution::from_csv(&d.to_csv()).unwrap(), d);
        let e = Distribution::exact(BTreeMap::from([(0, 0.1), (1, 0.9)])).unwrap();
        assert_eq!(Distribution::from_csv(&e.to_csv()).unwrap(), e);
        assert!(Distribution::from_csv("outcome,count_or_prob\n0,1\n").is_err());
    }
}
