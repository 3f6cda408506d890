//! Finite-difference gradient checking.

use super::graph::{Graph, NodeId};
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Outcome of a gradient check: the largest relative error over all entries
/// of the checked tensor, plus where it occurred.
#[derive(Debug, Clone, Copy)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_index: (usize, usize),
    pub entries: usize,
}

/// Compares the analytic gradient of a scalar-valued function against central
/// finite differences, entry by entry.
///
/// `f` must build the computation on the provided graph, treating the node it
/// receives as the input tensor, and return the scalar loss node. It is called
/// once analytically and twice per entry (x ± eps), so it must be a pure
/// function of the input value.
///
/// The relative error for an entry is `|analytic - numeric| /
/// max(|analytic|, |numeric|, 1e-8)` — the floor keeps near-zero gradients
/// from producing spurious blow-ups.
pub fn grad_check<F>(mut f: F, x: &Tensor<f64>, eps: f64) -> Result<GradCheckReport>
where
    F: FnMut(&mut Graph<f64>, NodeId) -> Result<NodeId>,
{
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Config(format!("eps must be positive, got {eps}")));
    }

    // Analytic gradient.
    let mut g = Graph::new();
    let xid = g.param(x.clone());
    let loss = f(&mut g, xid)?;
    if g.value(loss).shape() != (1, 1) {
        return Err(Error::Shape(format!(
            "grad_check needs a scalar loss, got {:?}",
            g.value(loss).shape()
        )));
    }
    g.backward(loss)?;
    let analytic = g
        .grad(xid)
        .cloned()
        .ok_or_else(|| Error::Shape("input did not receive a gradient".into()))?;

    // One scalar forward evaluation with a perturbed input.
    let mut eval = |xp: &Tensor<f64>| -> Result<f64> {
        let mut g = Graph::new();
        let xid = g.constant(xp.clone());
        let loss = f(&mut g, xid)?;
        Ok(g.value(loss).item())
    };

    let (rows, cols) = x.shape();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_index: (0, 0),
        entries: x.len(),
    };
    for i in 0..rows {
        for j in 0..cols {
            let mut xp = x.clone();
            xp.set(i, j, x.get(i, j) + eps);
            let fp = eval(&xp)?;
            xp.set(i, j, x.get(i, j) - eps);
            let fm = eval(&xp)?;
            let numeric = (fp - fm) / (2.0 * eps);
            let a = analytic.get(i, j);
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            if rel > report.max_rel_error {
                report.max_rel_error = rel;
                report.worst_index = (i, j);
            }
        }
    }
    Ok(report)
}
