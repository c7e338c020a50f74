//! JSON document formats and command-line spec strings.
//!
//! Maps and plans travel as version-tagged JSON documents in which every
//! numeric field is an integer or an exact rational literal such as
//! `"7/3"`; floating point never appears on disk. Documents written by a
//! gadget generator carry a `gadget` provenance block recording the
//! generator inputs, so verification can rebuild the map and refuse a
//! tampered file. Loading funnels through the model constructors: a
//! document that deserializes cleanly still fails fast when its content
//! is inconsistent.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enumerate::Objective;
use crate::exact::{format_rational, parse_rational, ExactError};
use crate::gadgets::mis::{gen_mis_gadget, MisGadget, SourceGraph};
use crate::gadgets::seatvote::{build_seatvote, SeatVoteGadget, SeatVoteVariant};
use crate::gadgets::GadgetError;
use crate::metrics::ShiftModel;
use crate::model::{
    build_grid_map, build_planar_map, CellIx, MapInstance, ModelError, Party, Plan, Topology,
};
use crate::validity::{BalanceCriterion, ValidityError};

/// The only document revision this build reads or writes.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("unsupported format_version {0} (this build reads {FORMAT_VERSION})")]
    UnsupportedVersion(u32),
    #[error("map document: {0}")]
    MalformedMap(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Validity(#[from] ValidityError),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("assignment references unknown cell `{0}`")]
    UnknownCell(String),
    #[error("cell `{0}` missing from assignment")]
    UnassignedCell(String),
    #[error("district {1} for cell `{0}` outside 1..={2}")]
    DistrictOutOfRange(String, u32, u32),
    #[error("bad {what} spec `{input}`: expected {expected}")]
    BadSpec {
        what: &'static str,
        input: String,
        expected: &'static str,
    },
    #[error("gadget metadata does not match its generator: {0}")]
    MetadataMismatch(String),
}

fn bad(what: &'static str, input: &str, expected: &'static str) -> IoError {
    IoError::BadSpec {
        what,
        input: input.to_string(),
        expected,
    }
}

/// Topology tag of a map document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Grid,
    Planar,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCell {
    pub row: u32,
    pub col: u32,
    pub pop: u64,
    pub party_a: u64,
}

/// Grid cells in an `rows x cols` frame; absent coordinates are holes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub rows: u32,
    pub cols: u32,
    pub cells: Vec<GridCell>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanarCell {
    pub id: String,
    pub pop: u64,
    pub party_a: u64,
}

/// Planar cells plus an explicit undirected edge list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanarSection {
    pub cells: Vec<PlanarCell>,
    pub edges: Vec<(String, String)>,
}

/// Seat-vote gadget variant tag as stored on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VariantTag {
    #[serde(rename = "a")]
    A,
    #[serde(rename = "b")]
    B,
}

impl From<SeatVoteVariant> for VariantTag {
    fn from(v: SeatVoteVariant) -> Self {
        match v {
            SeatVoteVariant::A => VariantTag::A,
            SeatVoteVariant::B => VariantTag::B,
        }
    }
}

impl From<VariantTag> for SeatVoteVariant {
    fn from(v: VariantTag) -> Self {
        match v {
            VariantTag::A => SeatVoteVariant::A,
            VariantTag::B => SeatVoteVariant::B,
        }
    }
}

/// Generator provenance embedded in a gadget map document: the exact
/// generator inputs plus the derived constants worth cross-checking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum GadgetMeta {
    Seatvote {
        /// Raw instance values, before preprocessing.
        values: Vec<u64>,
        kappa: u32,
        variant: VariantTag,
        /// Balance exponent, an exact rational literal.
        c: String,
        illustration: bool,
        /// Integer multiplier preprocessing applied to every value.
        multiplier: u64,
        /// Whether the heaviness bound on the scaled spread held.
        w_bound_ok: bool,
    },
    Mis {
        /// Source graph order; nodes are `0..n`.
        n: u32,
        edges: Vec<(u32, u32)>,
        epsilon: String,
        delta: String,
        denom: u64,
    },
}

/// A gadget reconstructed from its stored provenance.
pub enum RebuiltGadget {
    SeatVote(Box<SeatVoteGadget>),
    Mis(Box<MisGadget>),
}

impl RebuiltGadget {
    pub fn map(&self) -> &MapInstance {
        match self {
            RebuiltGadget::SeatVote(g) => &g.map,
            RebuiltGadget::Mis(g) => &g.map,
        }
    }
}

impl GadgetMeta {
    pub fn from_seatvote(g: &SeatVoteGadget) -> Self {
        // The stored instance is post-preprocessing; undo the (exact)
        // multiplier to record the raw inputs.
        let values = g.instance.values().iter().map(|&v| v / g.multiplier).collect();
        GadgetMeta::Seatvote {
            values,
            kappa: g.kappa,
            variant: g.variant.into(),
            c: format_rational(&g.c),
            illustration: !g.scale_applied,
            multiplier: g.multiplier,
            w_bound_ok: g.w_bound_ok,
        }
    }

    pub fn from_mis(g: &MisGadget) -> Self {
        GadgetMeta::Mis {
            n: g.source.n(),
            edges: g.source.edges().to_vec(),
            epsilon: format_rational(&g.epsilon),
            delta: format_rational(&g.delta),
            denom: g.denom,
        }
    }

    /// Re-runs the recorded generator and cross-checks the stored
    /// derived constants. The caller still owns comparing the rebuilt
    /// map against the document's cells via [`same_structure`].
    pub fn rebuild(&self) -> Result<RebuiltGadget, IoError> {
        match self {
            GadgetMeta::Seatvote {
                values,
                kappa,
                variant,
                c,
                illustration,
                multiplier,
                w_bound_ok,
            } => {
                let c = parse_rational(c)?;
                let g = build_seatvote(values, *kappa, (*variant).into(), &c, *illustration)?;
                if g.multiplier != *multiplier {
                    return Err(IoError::MetadataMismatch(format!(
                        "stored multiplier {multiplier}, generator produced {}",
                        g.multiplier
                    )));
                }
                if g.w_bound_ok != *w_bound_ok {
                    return Err(IoError::MetadataMismatch(
                        "w_bound_ok flag disagrees with the generator".into(),
                    ));
                }
                Ok(RebuiltGadget::SeatVote(Box::new(g)))
            }
            GadgetMeta::Mis {
                n,
                edges,
                epsilon,
                delta,
                denom,
            } => {
                let source = SourceGraph::new(*n, edges)?;
                let g = gen_mis_gadget(&source, &parse_rational(epsilon)?)?;
                if format_rational(&g.delta) != *delta {
                    return Err(IoError::MetadataMismatch(format!(
                        "stored delta {delta}, generator produced {}",
                        format_rational(&g.delta)
                    )));
                }
                if g.denom != *denom {
                    return Err(IoError::MetadataMismatch(format!(
                        "stored denom {denom}, generator produced {}",
                        g.denom
                    )));
                }
                Ok(RebuiltGadget::Mis(Box::new(g)))
            }
        }
    }
}

/// On-disk map document. Exactly one of `grid`/`planar` is present,
/// matching `type`; `gadget` carries generator provenance for maps
/// produced by a gadget generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub format_version: u32,
    #[serde(rename = "type")]
    pub kind: MapKind,
    pub kappa: u32,
    pub scale: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planar: Option<PlanarSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gadget: Option<GadgetMeta>,
}

/// On-disk plan document: cell id to 1-based district index, total.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub format_version: u32,
    pub assignment: BTreeMap<String, u32>,
}

/// Renders a map (optionally with gadget provenance) as a document.
pub fn map_to_file(map: &MapInstance, gadget: Option<GadgetMeta>) -> MapFile {
    let (kind, grid, planar) = match map.topology() {
        Topology::Grid { rows, cols, coords } => {
            let cells = coords
                .iter()
                .zip(map.cells())
                .map(|(&(row, col), cell)| GridCell {
                    row,
                    col,
                    pop: cell.pop,
                    party_a: cell.party_a,
                })
                .collect();
            (
                MapKind::Grid,
                Some(GridSection {
                    rows: *rows,
                    cols: *cols,
                    cells,
                }),
                None,
            )
        }
        Topology::Planar => {
            let cells = (0..map.cell_count() as CellIx)
                .map(|ix| PlanarCell {
                    id: map.id(ix).to_string(),
                    pop: map.cell(ix).pop,
                    party_a: map.cell(ix).party_a,
                })
                .collect();
            let mut edges = Vec::with_capacity(map.edge_count());
            for u in 0..map.cell_count() as CellIx {
                for &v in map.neighbors(u) {
                    if u < v {
                        edges.push((map.id(u).to_string(), map.id(v).to_string()));
                    }
                }
            }
            (MapKind::Planar, None, Some(PlanarSection { cells, edges }))
        }
    };
    MapFile {
        format_version: FORMAT_VERSION,
        kind,
        kappa: map.kappa(),
        scale: map.scale(),
        grid,
        planar,
        gadget,
    }
}

/// Builds the map a document describes. The returned metadata is not
/// cross-checked against the map here; see [`GadgetMeta::rebuild`].
pub fn map_from_file(file: &MapFile) -> Result<(MapInstance, Option<GadgetMeta>), IoError> {
    if file.format_version != FORMAT_VERSION {
        return Err(IoError::UnsupportedVersion(file.format_version));
    }
    if file.scale == 0 {
        return Err(IoError::MalformedMap("scale must be positive".into()));
    }
    let map = match (file.kind, &file.grid, &file.planar) {
        (MapKind::Grid, Some(g), None) => {
            let cells: Vec<(u32, u32, u64, u64)> = g
                .cells
                .iter()
                .map(|c| (c.row, c.col, c.pop, c.party_a))
                .collect();
            build_grid_map(g.rows, g.cols, &cells, file.kappa)?
        }
        (MapKind::Planar, None, Some(p)) => {
            let cells: Vec<(String, u64, u64)> = p
                .cells
                .iter()
                .map(|c| (c.id.clone(), c.pop, c.party_a))
                .collect();
            build_planar_map(&cells, &p.edges, file.kappa)?
        }
        _ => {
            return Err(IoError::MalformedMap(
                "exactly one of `grid`/`planar` must be present and match `type`".into(),
            ))
        }
    };
    Ok((map.with_scale(file.scale), file.gadget.clone()))
}

/// Renders a total plan as a document with 1-based district indices.
pub fn plan_to_file(map: &MapInstance, plan: &Plan) -> Result<PlanFile, IoError> {
    plan.validate_total(map)?;
    let assignment = (0..map.cell_count())
        .map(|i| (map.id(i as CellIx).to_string(), u32::from(plan.assignment[i]) + 1))
        .collect();
    Ok(PlanFile {
        format_version: FORMAT_VERSION,
        assignment,
    })
}

/// Builds the plan a document describes against a concrete map. Every
/// map cell must be assigned exactly one district in `1..=kappa`.
pub fn plan_from_file(map: &MapInstance, file: &PlanFile) -> Result<Plan, IoError> {
    if file.format_version != FORMAT_VERSION {
        return Err(IoError::UnsupportedVersion(file.format_version));
    }
    let mut assignment: Vec<Option<u16>> = vec![None; map.cell_count()];
    for (id, &district) in &file.assignment {
        let ix = map
            .index_of(id)
            .ok_or_else(|| IoError::UnknownCell(id.clone()))?;
        if district < 1 || district > map.kappa() {
            return Err(IoError::DistrictOutOfRange(id.clone(), district, map.kappa()));
        }
        assignment[ix as usize] = Some((district - 1) as u16);
    }
    let assignment = assignment
        .into_iter()
        .enumerate()
        .map(|(i, d)| d.ok_or_else(|| IoError::UnassignedCell(map.id(i as CellIx).to_string())))
        .collect::<Result<Vec<u16>, IoError>>()?;
    Ok(Plan { assignment })
}

pub fn map_to_json(map: &MapInstance, gadget: Option<GadgetMeta>) -> String {
    let mut s = serde_json::to_string_pretty(&map_to_file(map, gadget))
        .expect("map documents serialize");
    s.push('\n');
    s
}

pub fn map_from_json(s: &str) -> Result<(MapInstance, Option<GadgetMeta>), IoError> {
    let file: MapFile = serde_json::from_str(s)?;
    map_from_file(&file)
}

pub fn plan_to_json(map: &MapInstance, plan: &Plan) -> Result<String, IoError> {
    let mut s =
        serde_json::to_string_pretty(&plan_to_file(map, plan)?).expect("plan documents serialize");
    s.push('\n');
    Ok(s)
}

pub fn plan_from_json(map: &MapInstance, s: &str) -> Result<Plan, IoError> {
    plan_from_file(map, &serde_json::from_str(s)?)
}

/// Structural equality of two maps: kappa, per-index ids and counts,
/// and the edge set. Scale and grid framing are ignored.
pub fn same_structure(a: &MapInstance, b: &MapInstance) -> bool {
    if a.kappa() != b.kappa() || a.cell_count() != b.cell_count() {
        return false;
    }
    let n = a.cell_count() as CellIx;
    for ix in 0..n {
        if a.id(ix) != b.id(ix)
            || a.cell(ix).pop != b.cell(ix).pop
            || a.cell(ix).party_a != b.cell(ix).party_a
        {
            return false;
        }
    }
    for ix in 0..n {
        let mut na: Vec<&str> = a.neighbors(ix).iter().map(|&v| a.id(v)).collect();
        let mut nb: Vec<&str> = b.neighbors(ix).iter().map(|&v| b.id(v)).collect();
        na.sort_unstable();
        nb.sort_unstable();
        if na != nb {
            return false;
        }
    }
    true
}

/// Parses a tie preference: `A` or `B`, case-insensitive.
pub fn parse_party(s: &str) -> Result<Party, IoError> {
    match s.trim() {
        "A" | "a" => Ok(Party::A),
        "B" | "b" => Ok(Party::B),
        other => Err(bad("tie-pref", other, "`A` or `B`")),
    }
}

/// Parses a balance spec: `strict`, `mult:EPS`, `add:DELTA`, or
/// `poly:C`, with `EPS`/`C` exact rational literals.
pub fn parse_balance_spec(s: &str) -> Result<BalanceCriterion, IoError> {
    const EXPECTED: &str = "`strict`, `mult:EPS`, `add:DELTA`, or `poly:C`";
    let s = s.trim();
    if s == "strict" {
        return Ok(BalanceCriterion::Strict);
    }
    let Some((head, arg)) = s.split_once(':') else {
        return Err(bad("balance", s, EXPECTED));
    };
    let criterion = match head {
        "mult" => BalanceCriterion::MultiplicativeRatio(parse_rational(arg)?),
        "add" => BalanceCriterion::AdditiveSlack(
            arg.trim()
                .parse()
                .map_err(|_| bad("balance", s, "a nonnegative integer delta"))?,
        ),
        "poly" => BalanceCriterion::AdditivePolynomial(parse_rational(arg)?),
        _ => return Err(bad("balance", s, EXPECTED)),
    };
    criterion.validate()?;
    Ok(criterion)
}

fn parse_shift(s: &str, what: &'static str) -> Result<ShiftModel, IoError> {
    if s.trim() == "uniform" {
        return Ok(ShiftModel::Uniform);
    }
    let betas = s
        .split([',', ';'])
        .map(parse_rational)
        .collect::<Result<Vec<BigRational>, ExactError>>()
        .map_err(|_| bad(what, s, "`uniform` or a separated list of rational betas"))?;
    Ok(ShiftModel::Explicit(betas))
}

/// Parses an objective spec: `effgap-min`, `effgap-max`, `seats-a-min`,
/// `seats-a-max`, `seatvote-min:RHO`, `bias-min:uniform`, or
/// `bias-min:B1,B2,...`.
pub fn parse_objective_spec(s: &str) -> Result<Objective, IoError> {
    const EXPECTED: &str = "`effgap-min`, `effgap-max`, `seats-a-min`, `seats-a-max`, \
                            `seatvote-min:RHO`, or `bias-min:SHIFT`";
    let s = s.trim();
    match s {
        "effgap-min" => return Ok(Objective::MinimizeEffGap),
        "effgap-max" => return Ok(Objective::MaximizeEffGap),
        "seats-a-max" => return Ok(Objective::MaximizeSeatsA),
        "seats-a-min" => return Ok(Objective::MinimizeSeatsA),
        _ => {}
    }
    let Some((head, arg)) = s.split_once(':') else {
        return Err(bad("objective", s, EXPECTED));
    };
    match head {
        "seatvote-min" => {
            let rho = parse_rational(arg)?;
            if !rho.is_positive() {
                return Err(bad("objective", s, "a positive rational rho"));
            }
            Ok(Objective::MinimizeSeatVoteFactor { rho })
        }
        "bias-min" => Ok(Objective::MinimizeBias {
            shift: parse_shift(arg, "objective")?,
        }),
        _ => Err(bad("objective", s, EXPECTED)),
    }
}

/// One entry of a `score --metrics` list.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpec {
    EffGap,
    Bias(ShiftModel),
    SeatVote(BigRational),
    /// Per-district Polsby-Popper band check; bounds are coefficients
    /// of pi.
    Compactness {
        l1_pi: BigRational,
        l2_pi: BigRational,
    },
}

/// Parses a comma-separated metric list: `effgap`, `bias:uniform` or
/// `bias:B1;B2;...` (betas semicolon-separated inside a list),
/// `seatvote:RHO`, `compactness:L1:L2`.
pub fn parse_metric_list(s: &str) -> Result<Vec<MetricSpec>, IoError> {
    s.split(',').map(|item| parse_metric(item.trim())).collect()
}

fn parse_metric(item: &str) -> Result<MetricSpec, IoError> {
    const EXPECTED: &str = "`effgap`, `bias:SHIFT`, `seatvote:RHO`, or `compactness:L1:L2`";
    if item == "effgap" {
        return Ok(MetricSpec::EffGap);
    }
    let Some((head, arg)) = item.split_once(':') else {
        return Err(bad("metrics", item, EXPECTED));
    };
    match head {
        "bias" => Ok(MetricSpec::Bias(parse_shift(arg, "metrics")?)),
        "seatvote" => {
            let rho = parse_rational(arg)?;
            if !rho.is_positive() {
                return Err(bad("metrics", item, "a positive rational rho"));
            }
            Ok(MetricSpec::SeatVote(rho))
        }
        "compactness" => {
            let Some((l1, l2)) = arg.split_once(':') else {
                return Err(bad("metrics", item, "`compactness:L1:L2`"));
            };
            let l1_pi = parse_rational(l1)?;
            let l2_pi = parse_rational(l2)?;
            if l1_pi > l2_pi {
                return Err(bad("metrics", item, "bounds with L1 <= L2"));
            }
            Ok(MetricSpec::Compactness { l1_pi, l2_pi })
        }
        _ => Err(bad("metrics", item, EXPECTED)),
    }
}

/// Parses an annealing schedule `T0:DECAY` with `T0 > 0` and `DECAY`
/// strictly inside `(0, 1)`.
pub fn parse_anneal_spec(s: &str) -> Result<(BigRational, BigRational), IoError> {
    const EXPECTED: &str = "`T0:DECAY` with T0 > 0 and 0 < DECAY < 1";
    let Some((t0, decay)) = s.split_once(':') else {
        return Err(bad("anneal", s, EXPECTED));
    };
    let t0 = parse_rational(t0)?;
    let decay = parse_rational(decay)?;
    if !t0.is_positive() || !decay.is_positive() || decay >= BigRational::from_integer(1.into()) {
        return Err(bad("anneal", s, EXPECTED));
    }
    Ok((t0, decay))
}

/// A `verify-gadget` request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifyMode {
    /// Seat-vote completeness for a claimed solution subset, given as
    /// raw (pre-preprocessing) values.
    Completeness(Vec<u64>),
    /// Seat-vote soundness by exhaustive enumeration.
    Soundness,
    /// Independence-oracle check of a claimed maximal independent set.
    Upsilon(Vec<u32>),
}

/// Parses a verify mode: `completeness:V1,V2,...`, `soundness`, or
/// `upsilon:I1,I2,...` (node indices; the empty set is `upsilon:`).
pub fn parse_verify_mode(s: &str) -> Result<VerifyMode, IoError> {
    const EXPECTED: &str = "`completeness:V1,V2,...`, `soundness`, or `upsilon:I1,I2,...`";
    let s = s.trim();
    if s == "soundness" {
        return Ok(VerifyMode::Soundness);
    }
    let Some((head, arg)) = s.split_once(':') else {
        return Err(bad("mode", s, EXPECTED));
    };
    match head {
        "completeness" => {
            let values = arg
                .split(',')
                .map(|v| v.trim().parse::<u64>())
                .collect::<Result<Vec<u64>, _>>()
                .map_err(|_| bad("mode", s, "a comma-separated list of integer values"))?;
            Ok(VerifyMode::Completeness(values))
        }
        "upsilon" => {
            if arg.trim().is_empty() {
                return Ok(VerifyMode::Upsilon(Vec::new()));
            }
            let nodes = arg
                .split(',')
                .map(|v| v.trim().parse::<u32>())
                .collect::<Result<Vec<u32>, _>>()
                .map_err(|_| bad("mode", s, "a comma-separated list of node indices"))?;
            Ok(VerifyMode::Upsilon(nodes))
        }
        _ => Err(bad("mode", s, EXPECTED)),
    }
}
