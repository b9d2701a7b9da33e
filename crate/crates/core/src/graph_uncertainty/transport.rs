use serde::{Deserialize, Serialize};

use super::{Graph, VertexFunction};
use crate::error::{Error, Result};
use crate::ot_solver::FlowNetwork;

/// An optimal edge flow and its dual certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphTransport {
    /// `min Σ_e length(e) |J(e)|` subject to `div J = f`.
    pub cost: f64,
    /// Signed flow per edge, positive from the smaller to the larger label.
    pub flow: Vec<f64>,
    /// `φ` with `|φ(u) − φ(v)| ≤ length(uv)`, equal on edges with flow,
    /// and `Σ f φ = cost`.
    pub potential: Vec<f64>,
}

impl GraphTransport {
    /// `max_v |Σ_{e ∋ v} ±J(e) − f(v)|`.
    pub fn divergence_error(&self, g: &Graph, f: &VertexFunction) -> f64 {
        let mut div = vec![0.0; g.n()];
        for (&(u, v), j) in g.edges().iter().zip(&self.flow) {
            div[u - 1] += j;
            div[v - 1] -= j;
        }
        div.iter()
            .zip(f.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `W₁(f₊, f₋)` with the shortest-path metric, as min-cost flow on edges.
pub fn graph_w1(g: &Graph, f: &VertexFunction) -> Result<GraphTransport> {
    if f.len() != g.n() {
        return Err(Error::InvalidConfig(format!(
            "{} values for {} vertices",
            f.len(),
            g.n()
        )));
    }
    if !f.is_zero_mean() {
        let mean = f.values().iter().sum::<f64>() / g.n() as f64;
        return Err(Error::NotZeroMean { mean, tol: 1e-12 });
    }
    let mut arcs = Vec::with_capacity(2 * g.edges().len());
    for (&(u, v), &len) in g.edges().iter().zip(g.lengths()) {
        arcs.push((u - 1, v - 1, len));
        arcs.push((v - 1, u - 1, len));
    }
    let net = FlowNetwork::from_arcs(g.n(), &arcs)?;
    // Balance the rounding residue on the largest sink.
    let mut supply = f.values().to_vec();
    let residue: f64 = supply.iter().sum();
    if let Some(k) = (0..supply.len()).min_by(|&a, &b| supply[a].total_cmp(&supply[b])) {
        supply[k] -= residue;
    }
    let sol = net.solve(&supply, 1e-15 * f.l1().max(f64::MIN_POSITIVE))?;
    let flow = sol.flow.chunks_exact(2).map(|p| p[0] - p[1]).collect();
    Ok(GraphTransport {
        cost: sol.cost,
        flow,
        potential: sol.potential.iter().map(|p| -p).collect(),
    })
}

/// Edges with `f > 0` at one end and `f ≤ 0` at the other.
pub fn boundary_size(g: &Graph, f: &VertexFunction) -> usize {
    let v = f.values();
    g.edges()
        .iter()
        .filter(|&&(a, b)| (v[a - 1] > 0.0) != (v[b - 1] > 0.0))
        .count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphProduct {
    pub w1: f64,
    pub boundary: usize,
    /// `W₁ · |∂{f > 0}|`.
    pub product: f64,
    pub l1: f64,
    /// `W₁/‖f‖₁`.
    pub w1_normalized: f64,
    /// `W₁ · |∂{f > 0}| / ‖f‖₁`.
    pub product_normalized: f64,
}

pub fn uncertainty_product_graph(g: &Graph, f: &VertexFunction) -> Result<GraphProduct> {
    let l1 = f.l1();
    if l1 == 0.0 {
        return Err(Error::EmptySupport);
    }
    let w1 = graph_w1(g, f)?.cost;
    let boundary = boundary_size(g, f);
    let product = w1 * boundary as f64;
    Ok(GraphProduct {
        w1,
        boundary,
        product,
        l1,
        w1_normalized: w1 / l1,
        product_normalized: product / l1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vf(v: &[f64]) -> VertexFunction {
        VertexFunction::new(v.to_vec()).unwrap()
    }

    fn certify(g: &Graph, f: &VertexFunction, t: &GraphTransport) {
        assert!(t.divergence_error(g, f) < 1e-9);
        for ((&(u, v), &len), &j) in g.edges().iter().zip(g.lengths()).zip(&t.flow) {
            let d = t.potential[u - 1] - t.potential[v - 1];
            assert!(d.abs() <= len + 1e-9);
            if j > 1e-12 {
                assert!((d - len).abs() < 1e-9);
            } else if j < -1e-12 {
                assert!((d + len).abs() < 1e-9);
            }
        }
        let dual: f64 = f.values().iter().zip(&t.potential).map(|(a, b)| a * b).sum();
        assert!((dual - t.cost).abs() < 1e-9);
    }

    #[test]
    fn path_end_to_end() {
        let g = Graph::path(6).unwrap();
        let f = vf(&[1.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
        let t = graph_w1(&g, &f).unwrap();
        assert!((t.cost - 5.0).abs() < 1e-12);
        certify(&g, &f, &t);
    }

    #[test]
    fn zero_function_costs_nothing() {
        let g = Graph::cycle(5).unwrap();
        let t = graph_w1(&g, &vf(&[0.0; 5])).unwrap();
        assert_eq!(t.cost, 0.0);
    }

    #[test]
    fn opposite_corners_of_a_square() {
        let g = Graph::cycle(4).unwrap();
        let f = vf(&[1.0, 0.0, -1.0, 0.0]);
        let t = graph_w1(&g, &f).unwrap();
        assert!((t.cost - 2.0).abs() < 1e-12);
        certify(&g, &f, &t);
    }

    #[test]
    fn nonzero_mean_is_rejected() {
        let g = Graph::path(3).unwrap();
        assert!(matches!(
            graph_w1(&g, &vf(&[1.0, 0.0, 0.0])),
            Err(Error::NotZeroMean { .. })
        ));
    }

    #[test]
    fn boundary_examples() {
        let p3 = Graph::path(3).unwrap();
        assert_eq!(boundary_size(&p3, &vf(&[1.0, -1.0, -1.0])), 1);
        assert_eq!(boundary_size(&p3, &vf(&[1.0, 2.0, 3.0])), 0);
        let c4 = Graph::cycle(4).unwrap();
        assert_eq!(boundary_size(&c4, &vf(&[1.0, -1.0, 1.0, -1.0])), 4);
    }

    #[test]
    fn product_examples() {
        let p2 = Graph::path(2).unwrap();
        let f = vf(&[1.0, -1.0]);
        let r = uncertainty_product_graph(&p2, &f).unwrap();
        assert!((r.product - 1.0).abs() < 1e-12);
        let s = uncertainty_product_graph(&p2, &f.scaled(3.5)).unwrap();
        assert!((s.product - 3.5).abs() < 1e-12);
        assert!(uncertainty_product_graph(&p2, &vf(&[0.0, 0.0])).is_err());

        let nauru = Graph::nauru();
        let f = VertexFunction::centered_indicator(24, &[7, 10, 14, 17, 21, 24]).unwrap();
        let r = uncertainty_product_graph(&nauru, &f).unwrap();
        assert!(r.product.is_finite() && r.product > 0.0);
        certify(&nauru, &f, &graph_w1(&nauru, &f).unwrap());
    }
}
