use super::{EstimatorKind, SourceEstimate};
use crate::error::Result;
use crate::graph::ContactNetwork;
use crate::spread::InfectionSnapshot;

/// Jordan-center estimator. Each node scores minus its eccentricity in the
/// infected graph (the recorded subtree if present, else the induced
/// subgraph), so the centers are the maximizers.
pub fn estimate_jordan(snap: &InfectionSnapshot, net: &ContactNetwork, seed: u64) -> Result<SourceEstimate> {
    let g = snap.graph(net)?;
    let ecc = g.eccentricities()?;
    let scores = g.nodes().iter().zip(ecc).map(|(&v, e)| (v, -(e as f64))).collect();
    SourceEstimate::select(EstimatorKind::Jordan, scores, None, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::graph::NodeId;
    use crate::spread::{run_flood, ProtocolTag};

    fn snap(nodes: &[u32], edges: Option<&[(u32, u32)]>) -> InfectionSnapshot {
        InfectionSnapshot {
            protocol: ProtocolTag::Flood,
            time: 0,
            infected: nodes.iter().map(|&i| NodeId(i)).collect(),
            subtree_edges: edges.map(|es| es.iter().map(|&(a, b)| (NodeId(a), NodeId(b))).collect()),
            virtual_source: None,
            d0: None,
            exhausted: false,
        }
    }

    #[test]
    fn middle_of_a_path() {
        let net = ContactNetwork::ring(50).unwrap();
        let e = estimate_jordan(&snap(&[10, 11, 12, 13, 14], None), &net, 0).unwrap();
        assert_eq!(e.chosen, NodeId(12));
        assert!(!e.tie_broken);
        assert_eq!(e.score(NodeId(10)), Some(-4.0));
    }

    #[test]
    fn flooding_reveals_the_source() {
        let net = ContactNetwork::regular_tree(3).unwrap();
        for t in 0..6 {
            let s = run_flood(&net, NodeId(0), t).unwrap();
            assert_eq!(estimate_jordan(&s, &net, 3).unwrap().chosen, NodeId(0));
        }
    }

    #[test]
    fn disconnected_without_edges_is_an_error() {
        let net = ContactNetwork::ring(50).unwrap();
        assert!(matches!(estimate_jordan(&snap(&[1, 2, 7], None), &net, 0), Err(Error::Disconnected)));
        let e = estimate_jordan(&snap(&[1, 2, 7], Some(&[(1, 2), (2, 7)])), &net, 0).unwrap();
        assert_eq!(e.chosen, NodeId(2));
    }
}
