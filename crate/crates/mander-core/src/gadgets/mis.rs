//! Planar gadget family reduced from maximum independent set on cubic
//! graphs.
//!
//! Every source node becomes an eight-cell gadget (a five-cell spine
//! plus three terminal cells), and every source edge becomes one shared
//! edge cell attached to a terminal on each side. Under a tight
//! multiplicative balance window each node gadget can only be covered
//! in two ways, which encode "node selected" and "node not selected";
//! the plan a maximal independent set induces has an efficiency-gap sum
//! that is an exact affine function of the set's size.
//!
//! All cell counts are the design rationals in `epsilon` and `delta`
//! cleared by a common denominator, so verification is exact equality.

use super::{rational_to_u64, GadgetError, GadgetVerdict};
use crate::model::{build_planar_map, district_stats, CellIx, MapInstance, Party, Plan};
use crate::validity::{check_plan, BalanceCriterion};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A simple undirected graph given by node count and edge list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceGraph {
    n: u32,
    edges: Vec<(u32, u32)>,
    adj: Vec<Vec<u32>>,
}

impl SourceGraph {
    pub fn new(n: u32, edges: &[(u32, u32)]) -> Result<Self, GadgetError> {
        if n == 0 {
            return Err(GadgetError::AssumptionViolated("graph has no nodes".into()));
        }
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n as usize];
        let mut normalized: Vec<(u32, u32)> = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(GadgetError::AssumptionViolated(format!(
                    "edge ({a},{b}) references a node outside 0..{n}"
                )));
            }
            if a == b {
                return Err(GadgetError::AssumptionViolated(format!(
                    "self-loop on node {a}"
                )));
            }
            let e = (a.min(b), a.max(b));
            if normalized.contains(&e) {
                return Err(GadgetError::AssumptionViolated(format!(
                    "duplicate edge ({},{})",
                    e.0, e.1
                )));
            }
            normalized.push(e);
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        normalized.sort_unstable();
        for nb in &mut adj {
            nb.sort_unstable();
        }
        Ok(SourceGraph {
            n,
            edges: normalized,
            adj,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    fn is_cubic(&self) -> bool {
        self.adj.iter().all(|nb| nb.len() == 3)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n as usize];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in self.neighbors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }
}

/// The complete-graph-on-four and cube benchmark sources.
pub fn k4() -> SourceGraph {
    SourceGraph::new(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
}

pub fn q3() -> SourceGraph {
    let mut edges = Vec::new();
    for v in 0u32..8 {
        for bit in 0..3 {
            let u = v ^ (1 << bit);
            if v < u {
                edges.push((v, u));
            }
        }
    }
    SourceGraph::new(8, &edges).unwrap()
}

/// Exact `(pop, party_a)` design rationals for each cell kind of a node
/// gadget and its incident edge cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeParams {
    /// Spine cells 0..4.
    pub spine: [(BigRational, BigRational); 5],
    /// The terminal toward the smallest-numbered neighbor.
    pub terminal_first: (BigRational, BigRational),
    /// The other two terminals.
    pub terminal_other: (BigRational, BigRational),
    pub edge_cell: (BigRational, BigRational),
}

impl NodeParams {
    fn all(&self) -> Vec<(BigRational, BigRational)> {
        let mut v = self.spine.to_vec();
        v.push(self.terminal_first.clone());
        v.push(self.terminal_other.clone());
        v.push(self.edge_cell.clone());
        v
    }
}

/// A generated independent-set gadget.
#[derive(Debug, Clone)]
pub struct MisGadget {
    pub map: MapInstance,
    pub source: SourceGraph,
    pub epsilon: BigRational,
    /// Fixed by the source size: `1 / (100 n^3)`.
    pub delta: BigRational,
    /// Common denominator clearing every design rational to an integer
    /// cell count.
    pub denom: u64,
    pub node_params: NodeParams,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Solves the cell-count design system for given `epsilon`, `delta`.
fn solve_node_params(eps: &BigRational, delta: &BigRational) -> Result<NodeParams, GadgetError> {
    let half = rat(1, 2);
    let one = BigRational::one();
    let params = NodeParams {
        spine: [
            // pop, party_a
            (rat(3, 2) * eps + rat(3, 1) * delta, rat(3, 4) * eps - &half * delta),
            (
                &one - &half * eps - rat(3, 1) * delta,
                &half - rat(1, 4) * eps + rat(3, 2) * delta,
            ),
            (eps.clone(), BigRational::zero()),
            (
                &one - rat(3, 4) * eps,
                &half - rat(3, 8) * eps + rat(4, 1) * delta,
            ),
            (one.clone(), rat(1, 16) * eps + rat(14, 1) * delta),
        ],
        terminal_first: (rat(1, 3) * eps, rat(1, 6) * eps),
        terminal_other: (rat(1, 3) * eps, rat(1, 6) * eps - delta),
        edge_cell: (
            &one + rat(2, 3) * eps,
            &half + rat(1, 3) * eps + &half * delta,
        ),
    };
    // Feasibility battery: counts in range, district windows met,
    // winner margins strict. Any failure means the (epsilon, delta)
    // pair admits no valid assignment of this shape.
    let fail = |msg: &str| Err(GadgetError::ParamSolveFailed(msg.into()));
    for (pop, a) in params.all() {
        if !pop.is_positive() {
            return fail("cell population must be positive");
        }
        if a.is_negative() || a > pop {
            return fail("party count out of range");
        }
    }
    if delta > &(eps / rat(12, 1)) {
        return fail("delta must be at most epsilon/12 to keep paired districts in window");
    }
    // District windows [1, 1+eps] for the eight tiling parts.
    let hi = &one + eps;
    let windows = [
        params.spine[0].0.clone() + &params.spine[1].0,
        params.spine[2].0.clone() + &params.spine[4].0,
        params.spine[3].0.clone() + rat(3, 1) * &params.terminal_first.0,
        params.spine[3].0.clone() + &params.spine[0].0,
        params.spine[1].0.clone() + &params.spine[2].0,
        params.spine[4].0.clone(),
        params.terminal_first.0.clone() + &params.edge_cell.0,
        params.edge_cell.0.clone(),
    ];
    for w in &windows {
        if *w < one || *w > hi {
            return fail("a tiling district leaves the balance window");
        }
    }
    Ok(params)
}

/// Common denominator: twice the lcm of all parameter denominators.
fn common_denom(params: &NodeParams) -> Result<u64, GadgetError> {
    let mut lcm = BigInt::one();
    for (pop, a) in params.all() {
        lcm = lcm.lcm(pop.denom());
        lcm = lcm.lcm(a.denom());
    }
    (lcm * BigInt::from(2))
        .to_u64()
        .ok_or_else(|| GadgetError::ParamSolveFailed("common denominator exceeds u64".into()))
}

fn scaled(r: &BigRational, denom: u64, what: &str) -> Result<u64, GadgetError> {
    rational_to_u64(&(r * BigRational::from_integer(denom.into())), what)
}

/// Generates the planar gadget for a connected cubic source graph.
pub fn gen_mis_gadget(source: &SourceGraph, epsilon: &BigRational) -> Result<MisGadget, GadgetError> {
    if !epsilon.is_positive() || *epsilon >= rat(1, 2) {
        return Err(GadgetError::AssumptionViolated(
            "epsilon must lie strictly between 0 and 1/2".into(),
        ));
    }
    if !source.is_cubic() {
        return Err(GadgetError::NotCubic);
    }
    if !source.is_connected() {
        return Err(GadgetError::NotConnected);
    }
    let n = source.n();
    // Euler planarity sanity bound |E| <= 3|V| - 6; a necessary, not
    // sufficient, planarity condition. Every simple cubic graph clears
    // it (|E| = 3n/2 <= 3n - 6 once n >= 4); graphs that clear it but
    // are nonplanar only draw the map builder's warning flag.
    if source.edges().len() as u64 + 6 > 3 * u64::from(n) {
        return Err(GadgetError::EulerBoundViolated);
    }
    let n3 = BigInt::from(n) * BigInt::from(n) * BigInt::from(n);
    let delta = BigRational::new(BigInt::one(), n3 * BigInt::from(100));
    let params = solve_node_params(epsilon, &delta)?;
    let denom = common_denom(&params)?;

    let mut cells: Vec<(String, u64, u64)> = Vec::new();
    let mut edges: Vec<(String, String)> = Vec::new();
    for v in 0..n {
        for k in 0..5 {
            let (pop, a) = &params.spine[k];
            cells.push((
                format!("v{v}.{k}"),
                scaled(pop, denom, "spine pop")?,
                scaled(a, denom, "spine party_a")?,
            ));
        }
        for (j, &nb) in source.neighbors(v).iter().enumerate() {
            let (pop, a) = if j == 0 {
                &params.terminal_first
            } else {
                &params.terminal_other
            };
            cells.push((
                format!("t{v}.{nb}"),
                scaled(pop, denom, "terminal pop")?,
                scaled(a, denom, "terminal party_a")?,
            ));
        }
        // Spine path 4-2-1-0-3 and the three terminals on cell 3.
        edges.push((format!("v{v}.4"), format!("v{v}.2")));
        edges.push((format!("v{v}.2"), format!("v{v}.1")));
        edges.push((format!("v{v}.1"), format!("v{v}.0")));
        edges.push((format!("v{v}.0"), format!("v{v}.3")));
        for &nb in source.neighbors(v) {
            edges.push((format!("v{v}.3"), format!("t{v}.{nb}")));
        }
    }
    for &(a, b) in source.edges() {
        let (pop, pa) = &params.edge_cell;
        cells.push((
            format!("u{a}.{b}"),
            scaled(pop, denom, "edge pop")?,
            scaled(pa, denom, "edge party_a")?,
        ));
        edges.push((format!("u{a}.{b}"), format!("t{a}.{b}")));
        edges.push((format!("u{a}.{b}"), format!("t{b}.{a}")));
    }
    let kappa = 9 * n / 2;
    let map = build_planar_map(&cells, &edges, kappa)?;
    debug_assert_eq!(map.cell_count() as u64, 19 * u64::from(n) / 2);
    debug_assert_eq!(map.edge_count() as u64, 10 * u64::from(n));
    Ok(MisGadget {
        map,
        source: source.clone(),
        epsilon: epsilon.clone(),
        delta,
        denom,
        node_params: params,
    })
}

/// The canonical plan a maximal independent set induces: six districts
/// per selected node (its gadget split in three, plus each terminal
/// paired with its edge cell), three per unselected node, and a
/// singleton per edge cell whose endpoints are both unselected.
pub fn plan_from_independent_set(
    gadget: &MisGadget,
    ind_set: &[u32],
) -> Result<Plan, GadgetError> {
    let g = &gadget.source;
    let n = g.n();
    let mut selected = vec![false; n as usize];
    for &v in ind_set {
        if v >= n {
            return Err(GadgetError::AssumptionViolated(format!(
                "node {v} outside 0..{n}"
            )));
        }
        if selected[v as usize] {
            return Err(GadgetError::AssumptionViolated(format!(
                "node {v} listed twice"
            )));
        }
        selected[v as usize] = true;
    }
    for &(a, b) in g.edges() {
        if selected[a as usize] && selected[b as usize] {
            return Err(GadgetError::NotIndependent(a, b));
        }
    }
    for v in 0..n {
        if !selected[v as usize] && !g.neighbors(v).iter().any(|&u| selected[u as usize]) {
            return Err(GadgetError::NotMaximal(v));
        }
    }

    let ix = |id: String| -> u32 { gadget.map.index_of(&id).expect("gadget id") };
    let mut assignment = vec![u16::MAX; gadget.map.cell_count()];
    let mut next = 0u16;
    let take = |assignment: &mut Vec<u16>, members: &[u32], next: &mut u16| {
        for &m in members {
            debug_assert_eq!(assignment[m as usize], u16::MAX);
            assignment[m as usize] = *next;
        }
        *next += 1;
    };
    for v in 0..n {
        let s = |k: usize| ix(format!("v{v}.{k}"));
        if selected[v as usize] {
            take(&mut assignment, &[s(3), s(0)], &mut next);
            take(&mut assignment, &[s(1), s(2)], &mut next);
            take(&mut assignment, &[s(4)], &mut next);
            for &nb in g.neighbors(v) {
                let (a, b) = (v.min(nb), v.max(nb));
                take(
                    &mut assignment,
                    &[ix(format!("t{v}.{nb}")), ix(format!("u{a}.{b}"))],
                    &mut next,
                );
            }
        } else {
            take(&mut assignment, &[s(0), s(1)], &mut next);
            take(&mut assignment, &[s(2), s(4)], &mut next);
            let mut rest = vec![s(3)];
            for &nb in g.neighbors(v) {
                rest.push(ix(format!("t{v}.{nb}")));
            }
            take(&mut assignment, &rest, &mut next);
        }
    }
    for &(a, b) in g.edges() {
        if !selected[a as usize] && !selected[b as usize] {
            take(&mut assignment, &[ix(format!("u{a}.{b}"))], &mut next);
        }
    }
    debug_assert!(assignment.iter().all(|&d| d != u16::MAX));
    debug_assert_eq!(u32::from(next), gadget.map.kappa());
    Ok(Plan { assignment })
}

/// The affine form the canonical plan's efficiency-gap sum takes as a
/// function of the independent-set size `mu`:
/// `3*mu + (3*eps/2 - 3*delta)*mu + (71*delta/2 - 3*eps/2 - 9/4)*n`.
pub fn upsilon(mu: u32, n: u32, eps: &BigRational, delta: &BigRational) -> BigRational {
    let mu = BigRational::from_integer(mu.into());
    let n = BigRational::from_integer(n.into());
    rat(3, 1) * &mu + (rat(3, 2) * eps - rat(3, 1) * delta) * &mu
        + (rat(71, 2) * delta - rat(3, 2) * eps - rat(9, 4)) * &n
}

/// One tiling of the local map: a list of parts, each a list of cell
/// indices.
pub type LocalTiling = Vec<Vec<CellIx>>;

/// Builds the one-node local map (a single node gadget and its three
/// edge cells) and enumerates every partition of it into connected
/// parts inside the balance window. Returns the partition count and
/// the partitions themselves, plus the local map for inspection.
pub fn local_node_tilings(
    gadget: &MisGadget,
) -> Result<(u64, Vec<LocalTiling>, MapInstance), GadgetError> {
    let params = &gadget.node_params;
    let denom = gadget.denom;
    let mut cells: Vec<(String, u64, u64)> = Vec::new();
    for k in 0..5 {
        let (pop, a) = &params.spine[k];
        cells.push((
            format!("v.{k}"),
            scaled(pop, denom, "spine pop")?,
            scaled(a, denom, "spine party_a")?,
        ));
    }
    for j in 0..3 {
        let (pop, a) = if j == 0 {
            &params.terminal_first
        } else {
            &params.terminal_other
        };
        cells.push((
            format!("t.{j}"),
            scaled(pop, denom, "terminal pop")?,
            scaled(a, denom, "terminal party_a")?,
        ));
        let (pop, a) = &params.edge_cell;
        cells.push((
            format!("u.{j}"),
            scaled(pop, denom, "edge pop")?,
            scaled(a, denom, "edge party_a")?,
        ));
    }
    let mut edges = vec![
        ("v.4".to_string(), "v.2".to_string()),
        ("v.2".to_string(), "v.1".to_string()),
        ("v.1".to_string(), "v.0".to_string()),
        ("v.0".to_string(), "v.3".to_string()),
    ];
    for j in 0..3 {
        edges.push(("v.3".to_string(), format!("t.{j}")));
        edges.push((format!("t.{j}"), format!("u.{j}")));
    }
    let local = build_planar_map(&cells, &edges, 6)?;
    let lo = denom;
    let hi = scaled(&(BigRational::one() + &gadget.epsilon), denom, "window top")?;
    let (count, parts) = crate::enumerate::enumerate_window_partitions(&local, lo, hi, 8);
    Ok((count, parts, local))
}

/// Verifies the efficiency-gap identity for the plan induced by
/// `ind_set` and the local two-tilings property. `completeness_holds`
/// reports the identity; `soundness_holds` reports the tiling check.
pub fn verify_mis_gadget(
    gadget: &MisGadget,
    ind_set: &[u32],
) -> Result<GadgetVerdict, GadgetError> {
    let plan = plan_from_independent_set(gadget, ind_set)?;
    let criterion = BalanceCriterion::MultiplicativeRatio(gadget.epsilon.clone());
    let report = check_plan(&gadget.map, &plan, &criterion)?;
    let mut details = vec![format!(
        "canonical plan: pops {}..{}, valid = {}",
        report.min_pop,
        report.max_pop,
        report.is_valid()
    )];

    let stats = district_stats(&gadget.map, &plan, Party::A)?;
    let sum: i128 = stats
        .iter()
        .map(|s| i128::from(s.wasted_a_x2) - i128::from(s.wasted_b_x2))
        .sum();
    let mu = ind_set.len() as u32;
    let expected = upsilon(mu, gadget.source.n(), &gadget.epsilon, &gadget.delta)
        * BigRational::from_integer((2 * u128::from(gadget.denom)).into());
    if !expected.is_integer() {
        return Err(GadgetError::ParamSolveFailed(
            "scaled upsilon is not an integer".into(),
        ));
    }
    let identity_holds = BigInt::from(sum) == expected.to_integer();
    details.push(format!(
        "doubled wasted-vote sum {sum}, affine form predicts {} (mu = {mu})",
        expected.to_integer()
    ));

    let (count, parts, local) = local_node_tilings(gadget)?;
    if count != 2 {
        return Err(GadgetError::TilingMismatch(format!(
            "local enumeration found {count} coverage patterns, expected exactly 2"
        )));
    }
    // Edge cells may only stand alone or pair with exactly one terminal.
    for part in parts.iter().flatten() {
        let has_edge = part
            .iter()
            .any(|&c| local.id(c).starts_with('u'));
        if !has_edge {
            continue;
        }
        let ok = part.len() == 1
            || (part.len() == 2
                && part.iter().filter(|&&c| local.id(c).starts_with('t')).count() == 1);
        if !ok {
            return Err(GadgetError::TilingMismatch(
                "an edge cell tiles neither alone nor with one terminal".into(),
            ));
        }
    }
    details.push("local tiling: exactly 2 coverage patterns".into());

    Ok(GadgetVerdict {
        trivial_plan_valid: report.is_valid(),
        completeness_holds: Some(identity_holds),
        soundness_holds: Some(true),
        details,
    })
}
