use std::collections::{BTreeSet, VecDeque};

use crate::decomposition::PathDecomposition;
use crate::error::{Error, Result};
use crate::graph::{bfs, multi_source_bfs, shortest_path, Dist, Graph, Path, VertexId};
use crate::qi::VertexMap;

fn preimage_indices(g: &Graph, phi: &VertexMap, bag: &BTreeSet<VertexId>) -> Vec<usize> {
    g.vertices()
        .iter()
        .enumerate()
        .filter(|(_, &v)| phi.get(v).is_some_and(|y| bag.contains(&y)))
        .map(|(i, _)| i)
        .collect()
}

/// Geodesic of `g` running from near the first bag to near the last one.
///
/// The ends are the source vertices whose images are nearest (then smallest
/// id) to the smallest vertex of the first nonempty bag and the largest
/// vertex of the last one. Every bag
/// then has a preimage within `C^2` of the geodesic, which is checked.
pub fn find_spanning_geodesic(
    g: &Graph,
    h: &Graph,
    d: &PathDecomposition,
    phi: &VertexMap,
    c: u64,
) -> Result<Path> {
    if !g.is_connected() {
        return Err(Error::Disconnected("source graph"));
    }
    if !h.is_connected() {
        return Err(Error::Disconnected("target graph"));
    }
    let d = d.normalize_nowhere_null();
    let (Some(first), Some(last)) = (d.bags.first(), d.bags.last()) else {
        return Err(Error::Input("decomposition has no nonempty bag".into()));
    };
    let pick = |target: VertexId| -> Result<VertexId> {
        let from = bfs(h, h.idx(target)?);
        let (dist, v) = g
            .vertices()
            .iter()
            .map(|&v| Ok((from[h.idx(phi.get(v).ok_or(Error::UnknownVertex(v))?)?], v)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .min()
            .expect("source graph is nonempty");
        if dist.finite().is_none_or(|x| x > c) {
            return Err(Error::hypothesis(
                "every target vertex is within C of the image",
                format!("{target} is {dist} from the image"),
            ));
        }
        Ok(v)
    };
    let u = pick(*first.first().unwrap())?;
    let v = pick(*last.last().unwrap())?;
    let p = shortest_path(g, u, v)?.ok_or(Error::Disconnected("source graph"))?;

    let sources = p
        .vertices()
        .iter()
        .map(|&x| g.idx(x))
        .collect::<Result<Vec<_>>>()?;
    let near = multi_source_bfs(g, &sources);
    let bound = c.saturating_mul(c);
    for (t, bag) in d.bags.iter().enumerate() {
        let best = preimage_indices(g, phi, bag)
            .into_iter()
            .map(|i| near[i])
            .min()
            .unwrap_or(Dist::Infinite);
        if best.finite().is_none_or(|x| x > bound) {
            return Err(Error::assertion(
                "the geodesic is within C^2 of every bag's preimage",
                format!("bag {t} is {best} away"),
            ));
        }
    }
    Ok(p)
}

/// Given a connected vertex set `k` of `g` meeting the preimages of bags
/// `lo` and `hi`, finds a vertex of `k` whose image is within `C - 1` of bag
/// `mid`, for `lo <= mid <= hi`.
///
/// Walks a path of `g[k]` from a preimage of bag `lo` to one of bag `hi`; if
/// no vertex of the walk maps into bag `mid`, some step of it crosses between
/// components of `h` minus that bag, and one end of that step is the witness.
#[allow(clippy::too_many_arguments)]
pub fn shortjump_check(
    g: &Graph,
    h: &Graph,
    d: &PathDecomposition,
    phi: &VertexMap,
    k: &BTreeSet<VertexId>,
    lo: usize,
    mid: usize,
    hi: usize,
    c: u64,
) -> Result<VertexId> {
    if !(lo <= mid && mid <= hi && hi < d.len()) {
        return Err(Error::Input(format!("bag indices {lo} <= {mid} <= {hi} out of order or range")));
    }
    let sub = g.induced(k);
    if sub.vertex_count() != k.len() || !sub.is_connected() {
        return Err(Error::Input("K must be a connected vertex set of G".into()));
    }
    let starts = preimage_indices(&sub, phi, &d.bags[lo]);
    let goals: BTreeSet<usize> = preimage_indices(&sub, phi, &d.bags[hi]).into_iter().collect();
    if starts.is_empty() || goals.is_empty() {
        return Err(Error::Input("K must meet the preimages of both outer bags".into()));
    }

    let mut parent = vec![usize::MAX; sub.vertex_count()];
    let mut queue = VecDeque::new();
    for &s in &starts {
        parent[s] = s;
        queue.push_back(s);
    }
    let mut end = None;
    while let Some(x) = queue.pop_front() {
        if goals.contains(&x) {
            end = Some(x);
            break;
        }
        for &(y, _) in sub.adjacency(x) {
            if parent[y] == usize::MAX {
                parent[y] = x;
                queue.push_back(y);
            }
        }
    }
    let mut walk = vec![end.expect("K is connected")];
    while parent[*walk.last().unwrap()] != *walk.last().unwrap() {
        walk.push(parent[*walk.last().unwrap()]);
    }
    walk.reverse();
    let img = |i: usize| phi.get(sub.id(i)).expect("map is total");

    let bag = &d.bags[mid];
    if let Some(&x) = walk.iter().find(|&&x| bag.contains(&img(x))) {
        return Ok(sub.id(x));
    }

    let rest: BTreeSet<VertexId> = h.vertices().iter().copied().filter(|v| !bag.contains(v)).collect();
    let outside = h.induced(&rest);
    let mut comp = std::collections::BTreeMap::new();
    for (n, members) in outside.components().into_iter().enumerate() {
        for v in members {
            comp.insert(v, n);
        }
    }
    let bag_idx = bag.iter().map(|&v| h.idx(v)).collect::<Result<Vec<_>>>()?;
    let to_bag = multi_source_bfs(h, &bag_idx);
    let slack = c.saturating_sub(1);
    for pair in walk.windows(2) {
        let (a, b) = (img(pair[0]), img(pair[1]));
        if comp[&a] != comp[&b] {
            for x in [pair[0], pair[1]] {
                if to_bag[h.idx(img(x))?].finite().is_some_and(|t| t <= slack) {
                    return Ok(sub.id(x));
                }
            }
            return Err(Error::hypothesis(
                "phi is a (C-1, C)-quasi-isometry",
                format!("step {}-{} jumps over bag {mid}", sub.id(pair[0]), sub.id(pair[1])),
            ));
        }
    }
    Err(Error::hypothesis(
        "bag separates the outer bags",
        format!("walk from bag {lo} to bag {hi} never meets bag {mid}"),
    ))
}
