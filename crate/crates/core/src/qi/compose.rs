use super::{QiFrame, QiParams, VertexMap};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Composes `inner: F -> G` (an `inner_params` quasi-isometry) with
/// `outer: G -> H` (an `outer_params` one).
///
/// The composite is an `(L1 L2, max(L1 C2 + 2 C1, L2 C1 + C2))`-quasi-isometry
/// where `(L1, C1)` are the outer and `(L2, C2)` the inner parameters. The
/// returned parameters are checked against the composite before returning.
pub fn compose_qi(
    f: &Graph,
    g: &Graph,
    h: &Graph,
    inner: &VertexMap,
    inner_params: QiParams,
    outer: &VertexMap,
    outer_params: QiParams,
) -> Result<(VertexMap, QiParams)> {
    inner.check_total(f, g)?;
    outer.check_total(g, h)?;
    let theta = inner
        .then(outer)
        .ok_or_else(|| Error::Input("inner map leaves the outer domain".into()))?;
    let QiParams { l: l1, c: c1 } = outer_params;
    let QiParams { l: l2, c: c2 } = inner_params;
    let c = (l1 * c2 + 2 * c1).max(l2 * c1 + c2);
    let params = QiParams::new(l1 * l2, c);
    if let Err(v) = QiFrame::new(f, h, None, &theta)?.check(params) {
        return Err(Error::assertion("composite meets the composed parameters", v.to_string()));
    }
    Ok((theta, params))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_compositions() {
        let g = Graph::cycle(6);
        let id = VertexMap::identity(&g);
        let (theta, p) = compose_qi(&g, &g, &g, &id, QiParams::new(1, 0), &id, QiParams::new(1, 0)).unwrap();
        assert_eq!(theta, id);
        assert_eq!(p, QiParams::new(1, 0));

        // P4 -> P2 folding is a (1, 2)-quasi-isometry
        let p4 = Graph::path(4);
        let p2 = Graph::path(2);
        let fold = VertexMap::from_pairs([(0, 0), (1, 0), (2, 1), (3, 1)]);
        let id4 = VertexMap::identity(&p4);
        let id2 = VertexMap::identity(&p2);
        let (_, p) = compose_qi(&p4, &p4, &p2, &id4, QiParams::new(1, 0), &fold, QiParams::new(1, 2)).unwrap();
        assert_eq!(p, QiParams::new(1, 4));
        let (_, p) = compose_qi(&p4, &p2, &p2, &fold, QiParams::new(1, 2), &id2, QiParams::new(1, 0)).unwrap();
        assert_eq!(p, QiParams::new(1, 2));
    }

    #[test]
    fn mismatched_graphs_are_rejected() {
        let g = Graph::path(3);
        let h = Graph::path(2);
        let id = VertexMap::identity(&g);
        assert!(matches!(
            compose_qi(&g, &h, &h, &id, QiParams::new(1, 0), &VertexMap::identity(&h), QiParams::new(1, 0)),
            Err(Error::Input(_))
        ));
    }
}
