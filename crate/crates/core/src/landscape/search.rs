//! Downward and upward searches, the landscape graph and transition pathways.

use std::collections::BTreeSet;
use std::hash::{Hash, Hasher};

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::energy::ModelParams;
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::landscape::classify::{classify_faces, symmetry_group, transform_field, StateLabel};
use crate::saddle::{morse_index, run_hisd, HisdOutcome, RunStatus, SolverConfig};

/// Size of the perturbation `q +- scale * v` used to leave a saddle.
pub const DEFAULT_PERTURBATION: f64 = 0.2;
/// Relative distance below which two stored fields are the same state.
pub const SAME_FIELD_TOL: f64 = 1e-2;

/// Checksum of the raw field data.
pub fn field_checksum(f: &Field) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for v in f.data() {
        v.to_bits().hash(&mut h);
    }
    h.finish()
}

/// Relaxes to a certified minimum, kicking off saddles along their most
/// unstable eigenvector (both signs) up to `retries` times.
pub fn relax_to_minimum(
    q0: &Field,
    p: &ModelParams,
    cfg: &SolverConfig,
    retries: usize,
) -> Result<HisdOutcome> {
    let mut c = cfg.clone();
    c.k = 0;
    c.certify = true;
    let mut out = run_hisd(q0, None, &c, p, &mut |_| {})?;
    for attempt in 0..retries {
        if out.status != RunStatus::NotTargetIndex {
            break;
        }
        let Some(morse) = out.morse.as_ref() else {
            break;
        };
        let Some(v1) = morse.pairs.first() else { break };
        let v = Field::from_data(out.state.q.grid(), v1.vector.clone())?;
        debug!(
            "relax: index {} saddle at E = {:.6}, kick {attempt}",
            morse.index, out.state.energy.total
        );
        let mut best: Option<HisdOutcome> = None;
        for sign in [1.0, -1.0] {
            let q = out.state.q.plus(sign * DEFAULT_PERTURBATION, &v);
            let next = run_hisd(&q, None, &c, p, &mut |_| {})?;
            let better = match &best {
                None => true,
                Some(b) => rank(&next) < rank(b),
            };
            if better {
                best = Some(next);
            }
        }
        out = best.expect("two candidates");
    }
    Ok(out)
}

fn rank(o: &HisdOutcome) -> (usize, usize, i64) {
    let status = match o.status {
        RunStatus::Converged => 0,
        RunStatus::NotTargetIndex => 1,
        _ => 2,
    };
    (
        status,
        o.index().unwrap_or(usize::MAX),
        (o.state.energy.total * 1e9) as i64,
    )
}

/// A critical point in the landscape.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LandscapeNode {
    pub id: usize,
    pub energy: f64,
    pub index: usize,
    pub label: String,
    pub canonical: String,
    pub lambda2: f64,
    pub h: f64,
    pub checksum: u64,
    pub field_file: Option<String>,
    #[serde(skip)]
    pub state_label: Option<StateLabel>,
}

/// Parent to child connection found by perturbing along `direction`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LandscapeEdge {
    pub parent: usize,
    pub child: usize,
    pub direction: usize,
    pub sign: i8,
}

/// Critical points with index-decreasing parent to child edges.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct LandscapeGraph {
    pub nodes: Vec<LandscapeNode>,
    pub edges: Vec<LandscapeEdge>,
    #[serde(skip)]
    pub fields: Vec<Option<Field>>,
    /// Symmetry group used for canonical names.
    #[serde(default)]
    pub cube: bool,
}

impl LandscapeGraph {
    pub fn new(cube: bool) -> Self {
        LandscapeGraph {
            cube,
            ..Default::default()
        }
    }

    /// Node with the same index, literal label and energy within `1e-6 |E|`;
    /// when both fields are stored they must also agree to 1% in norm.
    pub fn find(&self, energy: f64, index: usize, label: &str, q: Option<&Field>) -> Option<usize> {
        self.nodes
            .iter()
            .find(|n| {
                n.index == index
                    && n.label == label
                    && (n.energy - energy).abs() <= 1e-6 * energy.abs().max(1.0)
                    && match (q, self.field(n.id)) {
                        (Some(a), Some(b)) => {
                            a.same_grid(b) && a.plus(-1.0, b).norm() <= SAME_FIELD_TOL * a.norm()
                        }
                        _ => true,
                    }
            })
            .map(|n| n.id)
    }

    /// Inserts a state unless an equivalent node exists; returns its id and
    /// whether it was new.
    pub fn insert(
        &mut self,
        q: &Field,
        energy: f64,
        index: usize,
        p: &ModelParams,
    ) -> (usize, bool) {
        let label = classify_faces(q, p.s_plus());
        let name = label.name();
        if let Some(id) = self.find(energy, index, &name, Some(q)) {
            return (id, false);
        }
        let id = self.nodes.len();
        self.nodes.push(LandscapeNode {
            id,
            energy,
            index,
            canonical: label.canonical(self.cube),
            label: name,
            lambda2: p.lambda2,
            h: q.grid().h,
            checksum: field_checksum(q),
            field_file: None,
            state_label: Some(label),
        });
        self.fields.push(Some(q.clone()));
        (id, true)
    }

    /// Adds every symmetry image of the stored nodes and edges.
    pub fn add_symmetry_images(&mut self, p: &ModelParams) {
        let n0 = self.nodes.len();
        let e0 = self.edges.clone();
        for g in symmetry_group(self.cube) {
            let mut map = vec![usize::MAX; n0];
            for (id, slot) in map.iter_mut().enumerate() {
                let Some(f) = self.field(id) else { continue };
                let Some(t) = transform_field(f, &g) else {
                    continue;
                };
                let (e, k) = (self.nodes[id].energy, self.nodes[id].index);
                *slot = self.insert(&t, e, k, p).0;
            }
            for e in &e0 {
                let (a, b) = (map[e.parent], map[e.child]);
                if a != usize::MAX && b != usize::MAX {
                    let _ = self.add_edge(LandscapeEdge {
                        parent: a,
                        child: b,
                        ..e.clone()
                    });
                }
            }
        }
    }

    pub fn add_edge(&mut self, edge: LandscapeEdge) -> Result<()> {
        let (a, b) = (&self.nodes[edge.parent], &self.nodes[edge.child]);
        if b.index >= a.index {
            return Err(Error::InvalidParams(format!(
                "edge {} -> {} does not decrease the index ({} -> {})",
                edge.parent, edge.child, a.index, b.index
            )));
        }
        if !self.edges.contains(&edge) {
            self.edges.push(edge);
        }
        Ok(())
    }

    pub fn field(&self, id: usize) -> Option<&Field> {
        self.fields.get(id).and_then(|f| f.as_ref())
    }

    /// Minima whose literal or canonical name is `label`.
    pub fn minima_with_label(&self, label: &str) -> Vec<usize> {
        self.nodes
            .iter()
            .filter(|n| n.index == 0 && (n.label == label || n.canonical == label))
            .map(|n| n.id)
            .collect()
    }

    /// Checks node ids and that every edge decreases the Morse index.
    pub fn validate(&self) -> Result<()> {
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id != i {
                return Err(Error::InvalidParams(format!("node {i} has id {}", n.id)));
            }
        }
        for e in &self.edges {
            let (Some(a), Some(b)) = (self.nodes.get(e.parent), self.nodes.get(e.child)) else {
                return Err(Error::InvalidParams(format!(
                    "edge {} -> {} names a missing node",
                    e.parent, e.child
                )));
            };
            if b.index >= a.index {
                return Err(Error::InvalidParams(format!(
                    "edge {} -> {} does not decrease the index ({} -> {})",
                    e.parent, e.child, a.index, b.index
                )));
            }
        }
        Ok(())
    }

    /// Graphviz rendering with nodes ranked by index.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph landscape {\n  rankdir=TB;\n");
        for n in &self.nodes {
            s.push_str(&format!(
                "  n{} [label=\"{}\\nindex {}\\nE = {:.4}\"];\n",
                n.id, n.label, n.index, n.energy
            ));
        }
        for e in &self.edges {
            s.push_str(&format!("  n{} -> n{};\n", e.parent, e.child));
        }
        s.push_str("}\n");
        s
    }

    /// Copy with nodes sorted by energy (ids renumbered) for export.
    pub fn sorted(&self) -> LandscapeGraph {
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by(|&a, &b| {
            self.nodes[a]
                .energy
                .total_cmp(&self.nodes[b].energy)
                .then(a.cmp(&b))
        });
        let mut new_id = vec![0; order.len()];
        for (n, &old) in order.iter().enumerate() {
            new_id[old] = n;
        }
        let nodes = order
            .iter()
            .enumerate()
            .map(|(n, &old)| LandscapeNode {
                id: n,
                ..self.nodes[old].clone()
            })
            .collect();
        let fields = order
            .iter()
            .map(|&old| self.fields.get(old).cloned().flatten())
            .collect();
        let mut edges: Vec<LandscapeEdge> = self
            .edges
            .iter()
            .map(|e| LandscapeEdge {
                parent: new_id[e.parent],
                child: new_id[e.child],
                ..e.clone()
            })
            .collect();
        edges.sort_by_key(|e| (e.parent, e.child, e.direction, e.sign));
        LandscapeGraph {
            nodes,
            edges,
            fields,
            cube: self.cube,
        }
    }
}

/// One state reached from a saddle.
#[derive(Clone, Debug)]
pub struct Child {
    pub outcome: HisdOutcome,
    pub direction: usize,
    pub sign: i8,
    pub label: StateLabel,
}

/// Perturbs a converged index-`m` state along each unstable direction (both
/// signs) and runs saddle dynamics to index `m - 1`, plus a final descent to
/// index 0. Children are deduplicated by energy and label.
pub fn downward_search(
    s: &HisdOutcome,
    p: &ModelParams,
    cfg: &SolverConfig,
    scale: f64,
) -> Result<Vec<Child>> {
    let grid = s.state.q.grid().clone();
    let morse = match &s.morse {
        Some(m) => m.clone(),
        None => morse_index(&s.state.q, p, cfg.max_index, cfg)?,
    };
    let m = morse.index;
    if m == 0 {
        return Ok(Vec::new());
    }
    let dirs: Vec<Field> = morse
        .pairs
        .iter()
        .take(m)
        .map(|e| Field::from_data(&grid, e.vector.clone()))
        .collect::<Result<_>>()?;
    let mut targets = vec![m - 1];
    if m > 1 {
        targets.push(0);
    }
    let mut children: Vec<Child> = Vec::new();
    for (i, v) in dirs.iter().enumerate() {
        for sign in [1i8, -1] {
            let q = s.state.q.plus(sign as f64 * scale, v);
            for &k in &targets {
                let rest: Vec<Field> = dirs
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, d)| d.clone())
                    .collect();
                let c = SolverConfig {
                    k,
                    certify: true,
                    ..cfg.clone()
                };
                let out = match run_hisd(&q, Some(&rest), &c, p, &mut |_| {}) {
                    Ok(o) => o,
                    Err(e) => {
                        debug!("downward search from direction {i} sign {sign}: {e}");
                        continue;
                    }
                };
                if out.status != RunStatus::Converged {
                    debug!("direction {i} sign {sign} target {k}: {:?}", out.status);
                    continue;
                }
                if out.state.energy.total >= s.state.energy.total {
                    continue;
                }
                let label = classify_faces(&out.state.q, p.s_plus());
                let e = out.state.energy.total;
                let dup = children.iter().any(|ch| {
                    ch.outcome.index() == out.index()
                        && ch.label == label
                        && (ch.outcome.state.energy.total - e).abs() <= 1e-6 * e.abs().max(1.0)
                });
                if !dup {
                    info!(
                        "child of index-{m} state: index {:?}, {} E = {e:.6}",
                        out.index(),
                        label.name()
                    );
                    children.push(Child {
                        outcome: out,
                        direction: i,
                        sign,
                        label,
                    });
                }
            }
        }
    }
    Ok(children)
}

/// Ascends from a minimum to an index-`target_k` saddle, starting from the
/// lowest Hessian eigenvectors.
pub fn upward_search(
    minimum: &HisdOutcome,
    target_k: usize,
    p: &ModelParams,
    cfg: &SolverConfig,
) -> Result<HisdOutcome> {
    if target_k == 0 {
        return Ok(minimum.clone());
    }
    let c = SolverConfig {
        k: target_k,
        certify: true,
        ..cfg.clone()
    };
    let out = run_hisd(&minimum.state.q, None, &c, p, &mut |_| {})?;
    match out.status {
        RunStatus::Converged => Ok(out),
        RunStatus::NotTargetIndex => Err(Error::NotTargetIndex {
            expected: target_k,
            found: out.index().unwrap_or(0),
        }),
        RunStatus::MaxStepsExceeded => Err(Error::MaxStepsExceeded(c.max_steps)),
        RunStatus::Stalled => Err(Error::MaxStepsExceeded(out.state.step_count)),
    }
}

/// Ascends from a minimum to an index-1 saddle along one chosen direction:
/// starts from `q + sign * scale * v` with `v` as the tracked direction.
pub fn upward_search_along(
    minimum: &Field,
    v: &Field,
    sign: f64,
    scale: f64,
    p: &ModelParams,
    cfg: &SolverConfig,
) -> Result<HisdOutcome> {
    let c = SolverConfig {
        k: 1,
        certify: true,
        ..cfg.clone()
    };
    let q = minimum.plus(sign * scale, v);
    run_hisd(&q, Some(std::slice::from_ref(v)), &c, p, &mut |_| {})
}

/// Index-1 saddle search between two minima: starts at their midpoint with
/// the normalised difference as the tracked direction.
pub fn saddle_between(
    qa: &Field,
    qb: &Field,
    p: &ModelParams,
    cfg: &SolverConfig,
) -> Result<HisdOutcome> {
    let diff = qb.plus(-1.0, qa);
    let n = diff.norm();
    if n == 0.0 {
        return Err(Error::InvalidParams("the two minima coincide".into()));
    }
    let v = diff.scaled(1.0 / n);
    let mid = qa.plus(0.5, &diff);
    let c = SolverConfig {
        k: 1,
        certify: true,
        ..cfg.clone()
    };
    run_hisd(&mid, Some(std::slice::from_ref(&v)), &c, p, &mut |_| {})
}

/// Adds a saddle and its children to a graph.
pub fn record_children(
    graph: &mut LandscapeGraph,
    parent: &HisdOutcome,
    children: &[Child],
    p: &ModelParams,
) -> Result<usize> {
    let pi = parent.index().unwrap_or(0);
    let (pid, _) = graph.insert(&parent.state.q, parent.state.energy.total, pi, p);
    for ch in children {
        let ci = ch.outcome.index().unwrap_or(0);
        if ci >= pi {
            continue;
        }
        let (cid, _) = graph.insert(&ch.outcome.state.q, ch.outcome.state.energy.total, ci, p);
        graph.add_edge(LandscapeEdge {
            parent: pid,
            child: cid,
            direction: ch.direction,
            sign: ch.sign,
        })?;
    }
    Ok(pid)
}

/// Builds a minima / index-1 saddle graph for pathway queries.
///
/// The minima and all their symmetry images become index-0 nodes. From one
/// representative of each minimum class, index-1 saddles are sought by upward
/// searches along the `directions` lowest Hessian eigenvectors (both signs);
/// each saddle found is descended on both sides, and the saddles with their
/// edges are then copied to every symmetry image.
pub fn build_pathway_graph(
    minima: &[Field],
    p: &ModelParams,
    cfg: &SolverConfig,
    directions: usize,
) -> Result<LandscapeGraph> {
    let Some(first) = minima.first() else {
        return Ok(LandscapeGraph::default());
    };
    let g = first.grid();
    let mut graph = LandscapeGraph::new(g.nx == g.ny && g.ny == g.nz);
    for q in minima {
        let e = crate::energy::energy(q, p)?.total;
        graph.insert(q, e, 0, p);
    }
    graph.add_symmetry_images(p);
    let mut reps: Vec<usize> = Vec::new();
    for id in 0..graph.nodes.len() {
        let node = &graph.nodes[id];
        let seen = reps.iter().any(|&r| {
            let m = &graph.nodes[r];
            m.canonical == node.canonical
                && (m.energy - node.energy).abs() <= 1e-6 * node.energy.abs().max(1.0)
        });
        if !seen {
            reps.push(id);
        }
    }
    let mut saddles: Vec<HisdOutcome> = Vec::new();
    for &r in &reps {
        let q = graph.field(r).expect("minima keep fields").clone();
        let morse = morse_index(
            &q,
            p,
            directions.max(1),
            &SolverConfig {
                max_index: directions.max(1),
                ..cfg.clone()
            },
        )?;
        for (i, pair) in morse.pairs.iter().take(directions).enumerate() {
            let v = Field::from_data(g, pair.vector.clone())?;
            for sign in [1.0, -1.0] {
                let s = match upward_search_along(&q, &v, sign, DEFAULT_PERTURBATION, p, cfg) {
                    Ok(s) if s.status == RunStatus::Converged => s,
                    Ok(s) => {
                        debug!(
                            "upward search from {} along {i} ({sign:+}): {:?}",
                            graph.nodes[r].label, s.status
                        );
                        continue;
                    }
                    Err(e) => {
                        debug!(
                            "upward search from {} along {i} ({sign:+}): {e}",
                            graph.nodes[r].label
                        );
                        continue;
                    }
                };
                let e = s.state.energy.total;
                let seen = saddles.iter().any(|t| {
                    (t.state.energy.total - e).abs() <= 1e-6 * e.abs().max(1.0)
                        && t.state.q.plus(-1.0, &s.state.q).norm()
                            <= SAME_FIELD_TOL * s.state.q.norm()
                });
                if seen {
                    continue;
                }
                let children: Vec<Child> = downward_search(&s, p, cfg, DEFAULT_PERTURBATION)?
                    .into_iter()
                    .filter(|c| c.outcome.index() == Some(0))
                    .collect();
                info!(
                    "index-1 saddle {} E = {e:.6} above {}: minima below {:?}",
                    classify_faces(&s.state.q, p.s_plus()).name(),
                    graph.nodes[r].label,
                    children.iter().map(|c| c.label.name()).collect::<Vec<_>>()
                );
                record_children(&mut graph, &s, &children, p)?;
                saddles.push(s);
            }
        }
    }
    graph.add_symmetry_images(p);
    Ok(graph)
}

/// Alternating minimum / index-1 saddle chain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Pathway {
    pub minima: Vec<usize>,
    pub saddles: Vec<usize>,
    pub barrier: f64,
}

/// Enumerates simple min-saddle-min chains between minima labelled `a` and
/// `b` through index-1 saddles, sorted by barrier.
pub fn transition_pathway(
    a: &str,
    b: &str,
    graph: &LandscapeGraph,
    max_saddles: usize,
) -> Result<Vec<Pathway>> {
    let starts = graph.minima_with_label(a);
    let ends: BTreeSet<usize> = graph.minima_with_label(b).into_iter().collect();
    if starts.is_empty() || ends.is_empty() {
        return Err(Error::NoPathFound {
            from: a.to_string(),
            to: b.to_string(),
        });
    }
    // saddle -> its index-0 children
    let mut saddle_children: Vec<(usize, Vec<usize>)> = Vec::new();
    for n in graph.nodes.iter().filter(|n| n.index == 1) {
        let kids: Vec<usize> = graph
            .edges
            .iter()
            .filter(|e| e.parent == n.id && graph.nodes[e.child].index == 0)
            .map(|e| e.child)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        saddle_children.push((n.id, kids));
    }
    let mut out = Vec::new();
    for &s in &starts {
        if ends.contains(&s) {
            out.push(Pathway {
                minima: vec![s],
                saddles: vec![],
                barrier: 0.0,
            });
            continue;
        }
        let mut minima = vec![s];
        let mut saddles = Vec::new();
        dfs(
            graph,
            &saddle_children,
            &ends,
            &mut minima,
            &mut saddles,
            max_saddles,
            &mut out,
        );
    }
    if out.is_empty() {
        return Err(Error::NoPathFound {
            from: a.to_string(),
            to: b.to_string(),
        });
    }
    out.sort_by(|x, y| {
        x.barrier
            .total_cmp(&y.barrier)
            .then(x.saddles.len().cmp(&y.saddles.len()))
    });
    Ok(out)
}

fn dfs(
    graph: &LandscapeGraph,
    saddle_children: &[(usize, Vec<usize>)],
    ends: &BTreeSet<usize>,
    minima: &mut Vec<usize>,
    saddles: &mut Vec<usize>,
    max_saddles: usize,
    out: &mut Vec<Pathway>,
) {
    if saddles.len() >= max_saddles {
        return;
    }
    let here = *minima.last().expect("nonempty chain");
    for (s, kids) in saddle_children {
        if saddles.contains(s) || !kids.contains(&here) {
            continue;
        }
        for &next in kids {
            if minima.contains(&next) {
                continue;
            }
            minima.push(next);
            saddles.push(*s);
            if ends.contains(&next) {
                let start = graph.nodes[minima[0]].energy;
                let top = saddles
                    .iter()
                    .map(|&i| graph.nodes[i].energy)
                    .fold(f64::MIN, f64::max);
                out.push(Pathway {
                    minima: minima.clone(),
                    saddles: saddles.clone(),
                    barrier: top - start,
                });
            } else {
                dfs(
                    graph,
                    saddle_children,
                    ends,
                    minima,
                    saddles,
                    max_saddles,
                    out,
                );
            }
            minima.pop();
            saddles.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: usize, energy: f64, index: usize, label: &str) -> LandscapeNode {
        LandscapeNode {
            id,
            energy,
            index,
            label: label.into(),
            canonical: label.into(),
            lambda2: 1.0,
            h: 1.0,
            checksum: 0,
            field_file: None,
            state_label: None,
        }
    }

    fn toy() -> LandscapeGraph {
        // minima 0 (A), 1 (M), 2 (B); saddles 3 (A-M), 4 (M-B), 5 (A-B high)
        let mut g = LandscapeGraph::new(false);
        for (i, (e, k, l)) in [
            (0.0, 0, "A"),
            (0.5, 0, "M"),
            (0.0, 0, "B"),
            (1.0, 1, "S"),
            (1.2, 1, "S"),
            (3.0, 1, "S"),
        ]
        .into_iter()
        .enumerate()
        {
            g.nodes.push(node(i, e, k, l));
            g.fields.push(None);
        }
        for (p, c) in [(3, 0), (3, 1), (4, 1), (4, 2), (5, 0), (5, 2)] {
            g.add_edge(LandscapeEdge {
                parent: p,
                child: c,
                direction: 0,
                sign: 1,
            })
            .unwrap();
        }
        g
    }

    #[test]
    fn pathways_sorted_by_barrier() {
        let g = toy();
        let paths = transition_pathway("A", "B", &g, 6).unwrap();
        assert_eq!(paths.len(), 2);
        assert_eq!(paths[0].saddles, vec![3, 4]);
        assert!((paths[0].barrier - 1.2).abs() < 1e-15);
        assert_eq!(paths[1].saddles, vec![5]);
    }

    #[test]
    fn same_label_is_zero_length() {
        let paths = transition_pathway("A", "A", &toy(), 6).unwrap();
        assert_eq!(paths.len(), 1);
        assert!(paths[0].saddles.is_empty() && paths[0].barrier == 0.0);
    }

    #[test]
    fn disconnected_is_no_path() {
        let mut g = toy();
        g.nodes.push(node(6, 0.1, 0, "C"));
        g.fields.push(None);
        assert!(matches!(
            transition_pathway("A", "C", &g, 6),
            Err(Error::NoPathFound { .. })
        ));
        assert!(matches!(
            transition_pathway("A", "Z", &g, 6),
            Err(Error::NoPathFound { .. })
        ));
    }

    #[test]
    fn edges_must_decrease_index() {
        let mut g = toy();
        assert!(g
            .add_edge(LandscapeEdge {
                parent: 0,
                child: 3,
                direction: 0,
                sign: 1
            })
            .is_err());
        assert!(g
            .add_edge(LandscapeEdge {
                parent: 0,
                child: 1,
                direction: 0,
                sign: 1
            })
            .is_err());
    }

    #[test]
    fn sorted_renumbers_edges() {
        let g = toy().sorted();
        for w in g.nodes.windows(2) {
            assert!(w[0].energy <= w[1].energy);
        }
        for e in &g.edges {
            assert!(g.nodes[e.parent].index > g.nodes[e.child].index);
        }
        assert_eq!(g.edges.len(), 6);
    }
}
