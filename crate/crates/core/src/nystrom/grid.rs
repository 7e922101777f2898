use crate::error::{Error, Result};

/// Equally spaced trapezoid rule on `[0, L]` with `x_1 = 0` and `x_N = L`.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    spacing: f64,
    length: f64,
}

impl Discretization {
    pub fn trapezoid(length: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidConfig(format!(
                "the trapezoid grid needs at least 2 nodes, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "grid length must be positive, got {length}"
            )));
        }
        let intervals = (n - 1) as f64;
        let spacing = length / intervals;
        let mut nodes: Vec<f64> = (0..n).map(|j| j as f64 * length / intervals).collect();
        nodes[n - 1] = length;
        let mut weights = vec![spacing; n];
        weights[0] = 0.5 * spacing;
        weights[n - 1] = 0.5 * spacing;
        Ok(Self {
            nodes,
            weights,
            spacing,
            length,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Index of `x` if it coincides with a grid node.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let j = (x / self.spacing).round();
        if j < 0.0 || j as usize >= self.len() {
            return None;
        }
        let j = j as usize;
        (self.nodes[j] == x).then_some(j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn compensated_sum(values: &[f64]) -> f64 {
        let (mut sum, mut carry) = (0.0f64, 0.0f64);
        for &v in values {
            let t = sum + v;
            carry += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
            sum = t;
        }
        sum + carry
    }

    #[test]
    fn weights_sum_to_length() {
        for &(length, n) in &[(1.0, 2), (1.0, 100), (2.7, 401), (0.3, 12801)] {
            let d = Discretization::trapezoid(length, n).unwrap();
            let total = compensated_sum(d.weights());
            assert!((total - length).abs() <= 8.0 * f64::EPSILON * length, "{length} {n} {total}");
            assert_eq!(d.nodes()[0], 0.0);
            assert_eq!(d.nodes()[n - 1], length);
        }
    }

    #[test]
    fn nodes_equally_spaced() {
        let d = Discretization::trapezoid(3.3, 257).unwrap();
        for (j, x) in d.nodes().iter().enumerate() {
            assert!((x - j as f64 * d.spacing()).abs() <= 4.0 * f64::EPSILON * d.length());
        }
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Discretization::trapezoid(1.0, 1).is_err());
        assert!(Discretization::trapezoid(0.0, 10).is_err());
    }

    #[test]
    fn finds_nodes() {
        let d = Discretization::trapezoid(1.0, 5).unwrap();
        assert_eq!(d.node_index(0.5), Some(2));
        assert_eq!(d.node_index(1.0), Some(4));
        assert_eq!(d.node_index(0.3), None);
    }
}
