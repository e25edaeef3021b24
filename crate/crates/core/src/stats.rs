//! Numeric kernels used by the swarm: relativize, virtual reward, reward
//! density and the bounded entropic divergence between two distributions.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-9;

/// A discrete probability distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Distribution {
    weights: Vec<f64>,
}

impl Distribution {
    /// Wraps `weights`, checking they are non-negative and sum to one.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::contract("distribution needs at least one weight"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::contract("distribution weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::contract(format!("distribution weights sum to {total}, not 1")));
        }
        Ok(Self { weights })
    }

    /// Normalizes non-negative counts. Falls back to uniform when all counts are zero.
    pub fn from_counts(counts: &[usize]) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::contract("distribution needs at least one count"));
        }
        let total: usize = counts.iter().sum();
        if total == 0 {
            return Ok(Self::uniform(counts.len()));
        }
        Ok(Self {
            weights: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution over an empty support");
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Standardizes `values` and squashes them into strictly positive scores.
///
/// Values are centred on their mean and divided by the population standard
/// deviation, then mapped through `exp(x)` for `x <= 0` and `1 + ln(1 + x)`
/// above zero. Both branches meet at 1, so the map is continuous and
/// strictly increasing. A constant input (zero deviation) maps to all ones.
pub fn relativize(values: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    values
        .iter()
        .map(|&v| {
            let z = if std > 0.0 { (v - mean) / std } else { 0.0 };
            if z <= 0.0 {
                z.exp()
            } else {
                1.0 + z.ln_1p()
            }
        })
        .collect()
}

/// Elementwise product of relativized rewards and relativized distances.
pub fn virtual_reward(rewards: &[f64], distances: &[f64]) -> Result<Vec<f64>> {
    if rewards.len() != distances.len() {
        return Err(Error::contract(format!(
            "virtual reward needs equal lengths, got {} rewards and {} distances",
            rewards.len(),
            distances.len()
        )));
    }
    Ok(rewards.iter().zip(distances).map(|(r, d)| r * d).collect())
}

/// Converts non-negative rewards over a slice of states into a density.
pub fn reward_density(rewards: &[f64]) -> Result<Distribution> {
    if rewards.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::contract("reward density needs finite non-negative rewards"));
    }
    let total: f64 = rewards.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateSlice);
    }
    Ok(Distribution {
        weights: rewards.iter().map(|r| r / total).collect(),
    })
}

/// `x^y` with `0^0 = 1`.
fn pow0(base: f64, exp: f64) -> f64 {
    if exp == 0.0 {
        1.0
    } else {
        base.powf(exp)
    }
}

/// Modified Kullback-Leibler divergence `ln(prod(2 - p_i^p_i) / prod(2 - q_i^p_i))`.
///
/// Every factor lies in `[1, 2]`, so the result is finite even where
/// `q_i = 0` and `p_i > 0`.
pub fn entropic_divergence(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::contract(format!(
            "divergence needs equal supports, got {} and {}",
            p.len(),
            q.len()
        )));
    }
    // Summing logs of each factor keeps long supports away from under/overflow.
    let value = p
        .weights
        .iter()
        .zip(&q.weights)
        .map(|(&pi, &qi)| (2.0 - pow0(pi, pi)).ln() - (2.0 - pow0(qi, pi)).ln())
        .sum();
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn relativize_constant_is_all_ones() {
        assert_eq!(relativize(&[2.0, 2.0, 2.0]), vec![1.0, 1.0, 1.0]);
        assert_eq!(relativize(&[5.0]), vec![1.0]);
    }

    #[test]
    fn relativize_matches_reference_values() {
        // Frozen from an independent numpy computation.
        let expected = [0.293832655878073, 1.0, 1.7996422445006162];
        assert!(close(&relativize(&[0.0, 1.0, 2.0]), &expected, 1e-12));
    }

    #[test]
    fn relativize_empty() {
        assert!(relativize(&[]).is_empty());
    }

    #[test]
    fn virtual_reward_products() {
        assert_eq!(virtual_reward(&[2.0], &[3.0]).unwrap(), vec![6.0]);
        assert_eq!(virtual_reward(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(virtual_reward(&[0.5, 2.0], &[2.0, 0.5]).unwrap(), vec![1.0, 1.0]);
        assert!(matches!(virtual_reward(&[1.0], &[1.0, 2.0]), Err(Error::Contract(_))));
    }

    #[test]
    fn reward_density_normalizes() {
        assert_eq!(reward_density(&[1.0, 1.0, 2.0]).unwrap().weights(), &[0.25, 0.25, 0.5]);
        assert_eq!(reward_density(&[7.0]).unwrap().weights(), &[1.0]);
        assert_eq!(reward_density(&[0.0, 3.0]).unwrap().weights(), &[0.0, 1.0]);
        assert!(matches!(reward_density(&[0.0, 0.0]), Err(Error::DegenerateSlice)));
        assert!(reward_density(&[-1.0, 2.0]).is_err());
    }

    #[test]
    fn divergence_reference_values() {
        let d = |p: Vec<f64>, q: Vec<f64>| {
            entropic_divergence(&Distribution::new(p).unwrap(), &Distribution::new(q).unwrap()).unwrap()
        };
        assert_eq!(d(vec![0.5, 0.5], vec![0.5, 0.5]), 0.0);
        // ln(1 / 1.5)
        assert!((d(vec![1.0, 0.0], vec![0.5, 0.5]) - (-0.40546510810816444)).abs() < 1e-12);
        // ln((2 - sqrt(0.5))^2 / 2), q has a zero where p does not
        assert!((d(vec![0.5, 0.5], vec![1.0, 0.0]) - (-0.1793821559163158)).abs() < 1e-12);
        assert!((d(vec![0.3, 0.7], vec![0.6, 0.4]) - (-0.05604582944310274)).abs() < 1e-12);
    }

    #[test]
    fn divergence_support_mismatch() {
        let p = Distribution::uniform(2);
        let q = Distribution::uniform(3);
        assert!(matches!(entropic_divergence(&p, &q), Err(Error::Contract(_))));
    }

    #[test]
    fn distribution_validation() {
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![-0.5, 1.5]).is_err());
        assert!(Distribution::new(vec![]).is_err());
        assert_eq!(Distribution::from_counts(&[0, 0]).unwrap().weights(), &[0.5, 0.5]);
        assert_eq!(Distribution::from_counts(&[1, 3]).unwrap().weights(), &[0.25, 0.75]);
    }
}
