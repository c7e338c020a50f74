//! Python bindings: thin wrappers over the core types plus module
//! functions for validity, metrics, enumeration, search, and the two
//! gadget families. Exact values cross the boundary as "P/Q" strings
//! (with `_approx` float companions); structured results arrive as
//! plain dicts and lists, so no numeric meaning is lost to floats.

use mander_core::enumerate::{
    enumerate_plans, EnumerateOptions, Objective, ObjectiveValue,
};
use mander_core::exact::{format_rational, parse_rational, rational_to_f64};
use mander_core::gadgets::{
    build_seatvote, gen_mis_gadget, k4, q3, upsilon as upsilon_form, verify_mis_gadget,
    verify_seatvote_gadget, GadgetVerdict, SeatVoteCheck, SeatVoteVariant, SourceGraph,
};
use mander_core::io::{
    map_from_json, map_to_json, parse_balance_spec, parse_objective_spec, parse_party,
    parse_verify_mode, plan_from_file, plan_to_file, same_structure, GadgetMeta, PlanFile,
    RebuiltGadget, VerifyMode, FORMAT_VERSION,
};
use mander_core::metrics::{
    compactness_check as compactness_check_core, effgap_identity_residual, metrics_report,
    partisan_bias as partisan_bias_core, polsby_popper as polsby_popper_core, seat_vote_factor,
    CompactnessConstant, CompactnessScore, MetricsError, SeatVoteConfig, ShiftModel,
};
use mander_core::model::{
    build_grid_map, build_planar_map, district_stats as district_stats_core, MapInstance,
    Plan as CorePlan,
};
use mander_core::optimize::{optimize as optimize_core, SearchParams};
use mander_core::validity::check_plan;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt::Display;

fn err(e: impl Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Converts a JSON value into the matching Python object through the
/// stdlib json module; integers stay arbitrary-precision.
fn to_py(py: Python<'_>, value: &Value) -> PyResult<Py<PyAny>> {
    let json_mod = py.import("json")?;
    Ok(json_mod
        .call_method1("loads", (value.to_string(),))?
        .unbind())
}

fn objective_value_json(value: &ObjectiveValue) -> Value {
    match value {
        ObjectiveValue::Rational(r) => json!(format_rational(r)),
        ObjectiveValue::Pow { pow_q, q } => json!({
            "pow_q": format_rational(pow_q),
            "q": q,
        }),
    }
}

fn parse_variant(s: &str) -> PyResult<SeatVoteVariant> {
    match s {
        "a" | "A" => Ok(SeatVoteVariant::A),
        "b" | "B" => Ok(SeatVoteVariant::B),
        other => Err(err(format!("unknown variant `{other}`, expected a or b"))),
    }
}

/// A districting map: cells with two-party counts on a grid or planar
/// adjacency, plus the district count kappa and optional gadget
/// provenance.
#[pyclass(frozen, name = "Map", module = "mander")]
pub struct PyMap {
    inner: MapInstance,
    gadget: Option<GadgetMeta>,
}

#[pymethods]
impl PyMap {
    /// Parses a map document (JSON text).
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let (inner, gadget) = map_from_json(text).map_err(err)?;
        Ok(PyMap { inner, gadget })
    }

    /// Builds a grid map from `(row, col, pop, party_a)` cells.
    #[staticmethod]
    #[pyo3(signature = (rows, cols, cells, kappa, scale = 1))]
    fn grid(
        rows: u32,
        cols: u32,
        cells: Vec<(u32, u32, u64, u64)>,
        kappa: u32,
        scale: u64,
    ) -> PyResult<Self> {
        let map = build_grid_map(rows, cols, &cells, kappa).map_err(err)?;
        if scale == 0 {
            return Err(err("scale must be at least 1"));
        }
        Ok(PyMap {
            inner: map.with_scale(scale),
            gadget: None,
        })
    }

    /// Builds a planar map from `(id, pop, party_a)` cells and
    /// `(id, id)` edges.
    #[staticmethod]
    #[pyo3(signature = (cells, edges, kappa, scale = 1))]
    fn planar(
        cells: Vec<(String, u64, u64)>,
        edges: Vec<(String, String)>,
        kappa: u32,
        scale: u64,
    ) -> PyResult<Self> {
        let map = build_planar_map(&cells, &edges, kappa).map_err(err)?;
        if scale == 0 {
            return Err(err("scale must be at least 1"));
        }
        Ok(PyMap {
            inner: map.with_scale(scale),
            gadget: None,
        })
    }

    /// Serializes the map (and any gadget provenance) as a document.
    fn to_json(&self) -> String {
        map_to_json(&self.inner, self.gadget.clone())
    }

    #[getter]
    fn cell_count(&self) -> usize {
        self.inner.cell_count()
    }

    #[getter]
    fn kappa(&self) -> u32 {
        self.inner.kappa()
    }

    #[getter]
    fn scale(&self) -> u64 {
        self.inner.scale()
    }

    #[getter]
    fn total_pop(&self) -> u64 {
        self.inner.total_pop()
    }

    #[getter]
    fn total_party_a(&self) -> u64 {
        self.inner.total_party_a()
    }

    #[getter]
    fn is_grid(&self) -> bool {
        self.inner.is_grid()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    #[getter]
    fn has_gadget(&self) -> bool {
        self.gadget.is_some()
    }

    /// Cell ids in index order.
    fn ids(&self) -> Vec<String> {
        (0..self.inner.cell_count())
            .map(|i| self.inner.id(i as u32).to_string())
            .collect()
    }

    /// `(pop, party_a)` for one cell id.
    fn cell(&self, id: &str) -> PyResult<(u64, u64)> {
        let ix = self
            .inner
            .index_of(id)
            .ok_or_else(|| err(format!("unknown cell id `{id}`")))?;
        let c = self.inner.cell(ix);
        Ok((c.pop, c.party_a))
    }

    /// Adjacent cell ids of one cell id.
    fn neighbors(&self, id: &str) -> PyResult<Vec<String>> {
        let ix = self
            .inner
            .index_of(id)
            .ok_or_else(|| err(format!("unknown cell id `{id}`")))?;
        Ok(self
            .inner
            .neighbors(ix)
            .iter()
            .map(|&n| self.inner.id(n).to_string())
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Map({} cells, {}, kappa {})",
            self.inner.cell_count(),
            if self.inner.is_grid() { "grid" } else { "planar" },
            self.inner.kappa()
        )
    }
}

/// A total assignment of cells to districts 1..kappa.
#[pyclass(frozen, name = "Plan", module = "mander")]
pub struct PyPlan {
    inner: CorePlan,
}

#[pymethods]
impl PyPlan {
    /// Parses a plan document (JSON text) against its map.
    #[staticmethod]
    fn from_json(map: &PyMap, text: &str) -> PyResult<Self> {
        let inner = mander_core::io::plan_from_json(&map.inner, text).map_err(err)?;
        Ok(PyPlan { inner })
    }

    /// Builds a plan from an `{id: district}` dict (districts 1-based).
    #[staticmethod]
    fn from_assignment(map: &PyMap, assignment: BTreeMap<String, u32>) -> PyResult<Self> {
        let file = PlanFile {
            format_version: FORMAT_VERSION,
            assignment,
        };
        let inner = plan_from_file(&map.inner, &file).map_err(err)?;
        Ok(PyPlan { inner })
    }

    /// Serializes the plan as a document.
    fn to_json(&self, map: &PyMap) -> PyResult<String> {
        mander_core::io::plan_to_json(&map.inner, &self.inner).map_err(err)
    }

    /// The `{id: district}` mapping, districts 1-based.
    fn assignment(&self, map: &PyMap) -> PyResult<BTreeMap<String, u32>> {
        Ok(plan_to_file(&map.inner, &self.inner).map_err(err)?.assignment)
    }

    fn __repr__(&self) -> String {
        format!("Plan({} cells)", self.inner.assignment.len())
    }
}

fn plan_assignment_json(map: &MapInstance, plan: &CorePlan) -> PyResult<Value> {
    let file = plan_to_file(map, plan).map_err(err)?;
    Ok(json!(file.assignment))
}

/// Checks a plan's legality: district connectivity plus the balance
/// criterion named by `balance` ("strict", "mult:EPS", "add:DELTA",
/// or "poly:C"). Returns the full verdict as a dict.
#[pyfunction]
fn validate(py: Python<'_>, map: &PyMap, plan: &PyPlan, balance: &str) -> PyResult<Py<PyAny>> {
    let criterion = parse_balance_spec(balance).map_err(err)?;
    let report = check_plan(&map.inner, &plan.inner, &criterion).map_err(err)?;
    to_py(
        py,
        &json!({
            "valid": report.is_valid(),
            "connected_ok": report.connected_ok,
            "balance_ok": report.balance_ok,
            "max_pop": report.max_pop,
            "min_pop": report.min_pop,
            "offending_districts": report
                .offending_districts
                .iter()
                .map(|(d, reason)| json!({"district": d, "reason": reason}))
                .collect::<Vec<Value>>(),
        }),
    )
}

/// Per-district tallies under the doubled wasted-vote convention.
#[pyfunction]
#[pyo3(signature = (map, plan, tie = "A"))]
fn district_stats(py: Python<'_>, map: &PyMap, plan: &PyPlan, tie: &str) -> PyResult<Py<PyAny>> {
    let tie_pref = parse_party(tie).map_err(err)?;
    let stats = district_stats_core(&map.inner, &plan.inner, tie_pref).map_err(err)?;
    let rows: Vec<Value> = stats
        .iter()
        .enumerate()
        .map(|(i, s)| {
            json!({
                "district": i + 1,
                "pop": s.pop,
                "party_a": s.party_a,
                "party_b": s.party_b,
                "winner": s.winner.to_string(),
                "wasted_a_x2": s.wasted_a_x2,
                "wasted_b_x2": s.wasted_b_x2,
            })
        })
        .collect();
    to_py(py, &json!(rows))
}

/// Whole-plan metrics: normalized seat and vote shares, the doubled
/// efficiency gap, and the equal-population identity residual (null
/// when districts have unequal populations).
#[pyfunction]
#[pyo3(signature = (map, plan, tie = "A"))]
fn score(py: Python<'_>, map: &PyMap, plan: &PyPlan, tie: &str) -> PyResult<Py<PyAny>> {
    let tie_pref = parse_party(tie).map_err(err)?;
    let report = metrics_report(&map.inner, &plan.inner, tie_pref).map_err(err)?;
    let residual = match effgap_identity_residual(&map.inner, &plan.inner, tie_pref) {
        Ok(r) => json!(format_rational(&r)),
        Err(MetricsError::PreconditionUnequalDistricts) => Value::Null,
        Err(e) => return Err(err(e)),
    };
    to_py(
        py,
        &json!({
            "n_seat_c_a": format_rational(&report.n_seat_c_a),
            "n_seat_m_a": format_rational(&report.n_seat_m_a),
            "n_vote_c_a": format_rational(&report.n_vote_c_a),
            "n_vote_m_a": format_rational(&report.n_vote_m_a),
            "effgap_x2": report.effgap_x2,
            "effgap_normalized": format_rational(&report.effgap_normalized),
            "effgap_normalized_approx": rational_to_f64(&report.effgap_normalized),
            "raw_seats_a": report.raw_seats_a,
            "identity_residual": residual,
        }),
    )
}

/// Partisan bias under the mirror-shift procedure. `betas = None`
/// uses the uniform model; otherwise pass one "P/Q" beta per district
/// (they must sum to the overall margin alpha).
#[pyfunction]
#[pyo3(signature = (map, plan, betas = None, tie = "A"))]
fn partisan_bias(
    map: &PyMap,
    plan: &PyPlan,
    betas: Option<Vec<String>>,
    tie: &str,
) -> PyResult<String> {
    let tie_pref = parse_party(tie).map_err(err)?;
    let shift = match betas {
        None => ShiftModel::Uniform,
        Some(list) => {
            let parsed = list
                .iter()
                .map(|s| parse_rational(s).map_err(err))
                .collect::<PyResult<Vec<_>>>()?;
            ShiftModel::Explicit(parsed)
        }
    };
    let bias = partisan_bias_core(&map.inner, &plan.inner, &shift, tie_pref).map_err(err)?;
    Ok(format_rational(&bias))
}

/// Seat-vote approximation factor for exponent `rho` ("P/Q"). Returns
/// the exact q-th power and, when available, the factor itself.
#[pyfunction]
#[pyo3(signature = (map, plan, rho, tie = "A"))]
fn seat_vote(py: Python<'_>, map: &PyMap, plan: &PyPlan, rho: &str, tie: &str) -> PyResult<Py<PyAny>> {
    let tie_pref = parse_party(tie).map_err(err)?;
    let cfg = SeatVoteConfig {
        rho: parse_rational(rho).map_err(err)?,
        tie_pref,
    };
    let factor = seat_vote_factor(&map.inner, &plan.inner, &cfg).map_err(err)?;
    let exact = factor.exact().map(format_rational);
    to_py(
        py,
        &json!({
            "pow_q": format_rational(&factor.pow_q),
            "q": factor.q,
            "exact": exact,
            "approx": factor.approx(),
        }),
    )
}

/// Polsby-Popper compactness of one cell set (ids) on a grid map. With
/// `constant = None` the conventional 4*pi applies and the score is a
/// rational multiple of pi; otherwise pass a rational "P/Q" constant.
#[pyfunction]
#[pyo3(signature = (map, cells, constant = None))]
fn polsby_popper(
    py: Python<'_>,
    map: &PyMap,
    cells: Vec<String>,
    constant: Option<&str>,
) -> PyResult<Py<PyAny>> {
    let district = cells
        .iter()
        .map(|id| {
            map.inner
                .index_of(id)
                .ok_or_else(|| err(format!("unknown cell id `{id}`")))
        })
        .collect::<PyResult<Vec<_>>>()?;
    let c = match constant {
        None => CompactnessConstant::FourPi,
        Some(s) => CompactnessConstant::Rational(parse_rational(s).map_err(err)?),
    };
    let score = polsby_popper_core(&map.inner, &district, &c).map_err(err)?;
    let doc = match &score {
        CompactnessScore::PiMultiple(r) => json!({
            "pi_multiple": format_rational(r),
            "approx": score.approx(),
        }),
        CompactnessScore::Plain(r) => json!({
            "value": format_rational(r),
            "approx": score.approx(),
        }),
    };
    to_py(py, &doc)
}

/// Per-district check `L1*pi <= score <= L2*pi` under the conventional
/// constant; bounds are rational "P/Q" coefficients of pi.
#[pyfunction]
fn compactness_check(map: &PyMap, plan: &PyPlan, l1: &str, l2: &str) -> PyResult<Vec<bool>> {
    let l1 = parse_rational(l1).map_err(err)?;
    let l2 = parse_rational(l2).map_err(err)?;
    compactness_check_core(&map.inner, &plan.inner, &l1, &l2).map_err(err)
}

/// Exhaustively enumerates valid plans, optionally tracking an
/// objective ("effgap-min", "effgap-max", "seats-a-min", "seats-a-max",
/// "seatvote-min:RHO", "bias-min:uniform", "bias-min:B1,B2,..").
#[pyfunction]
#[pyo3(signature = (map, balance, objective = None, tie = "A", node_budget = None, max_best = 16))]
fn enumerate(
    py: Python<'_>,
    map: &PyMap,
    balance: &str,
    objective: Option<&str>,
    tie: &str,
    node_budget: Option<u64>,
    max_best: usize,
) -> PyResult<Py<PyAny>> {
    let criterion = parse_balance_spec(balance).map_err(err)?;
    let objective = objective
        .map(|s| parse_objective_spec(s).map_err(err))
        .transpose()?;
    let opts = EnumerateOptions {
        objective,
        tie_pref: parse_party(tie).map_err(err)?,
        node_budget,
        max_best_plans: max_best,
    };
    let res = enumerate_plans(&map.inner, &criterion, &opts).map_err(err)?;
    let best_plans = res
        .best_plans
        .iter()
        .map(|p| plan_assignment_json(&map.inner, p))
        .collect::<PyResult<Vec<_>>>()?;
    to_py(
        py,
        &json!({
            "count": res.count,
            "exhausted": res.exhausted,
            "nodes_visited": res.nodes_visited,
            "truncated": res.truncated,
            "best_value": res.best_value.as_ref().map(objective_value_json),
            "best_value_approx": res.best_value.as_ref().map(|v| v.approx()),
            "best_plans": best_plans,
        }),
    )
}

/// Boundary-flip local search (hill climbing, or simulated annealing
/// when `anneal = (t0, decay)` rationals are given).
#[pyfunction]
#[pyo3(signature = (map, balance, objective, seed = 0, restarts = 1, iters = 1000, anneal = None, tie = "A"))]
#[allow(clippy::too_many_arguments)]
fn optimize(
    py: Python<'_>,
    map: &PyMap,
    balance: &str,
    objective: &str,
    seed: u64,
    restarts: u32,
    iters: u64,
    anneal: Option<(String, String)>,
    tie: &str,
) -> PyResult<Py<PyAny>> {
    let criterion = parse_balance_spec(balance).map_err(err)?;
    let objective: Objective = parse_objective_spec(objective).map_err(err)?;
    let temperature_schedule = anneal
        .map(|(t0, decay)| -> PyResult<_> {
            Ok((
                parse_rational(&t0).map_err(err)?,
                parse_rational(&decay).map_err(err)?,
            ))
        })
        .transpose()?;
    let params = SearchParams {
        seed,
        restarts,
        max_iters: iters,
        temperature_schedule,
    };
    let tie_pref = parse_party(tie).map_err(err)?;
    let out = optimize_core(&map.inner, &criterion, &objective, &params, tie_pref).map_err(err)?;
    let trace: Vec<Value> = out
        .trace
        .iter()
        .map(|p| {
            json!({
                "restart": p.restart,
                "iter": p.iter,
                "value": objective_value_json(&p.value),
                "value_approx": p.value.approx(),
                "accepted": p.accepted,
            })
        })
        .collect();
    to_py(
        py,
        &json!({
            "value": objective_value_json(&out.value),
            "value_approx": out.value.approx(),
            "restarts_succeeded": out.restarts_succeeded,
            "plan": plan_assignment_json(&map.inner, &out.plan)?,
            "trace": trace,
        }),
    )
}

/// Generates the number-partitioning grid gadget. Values are the raw
/// even instance values; `illustration = True` skips the preprocessing
/// scale-up (soundness checks are refused on such maps).
#[pyfunction]
#[pyo3(signature = (values, kappa, variant = "a", c = "11/10", illustration = false))]
fn gen_seatvote(
    values: Vec<u64>,
    kappa: u32,
    variant: &str,
    c: &str,
    illustration: bool,
) -> PyResult<PyMap> {
    let variant = parse_variant(variant)?;
    let c = parse_rational(c).map_err(err)?;
    let gadget = build_seatvote(&values, kappa, variant, &c, illustration).map_err(err)?;
    let meta = GadgetMeta::from_seatvote(&gadget);
    Ok(PyMap {
        inner: gadget.map,
        gadget: Some(meta),
    })
}

/// Generates the independent-set planar gadget from a connected cubic
/// graph: a builtin name ("k4" or "q3"), or explicit `n` and `edges`.
#[pyfunction]
#[pyo3(signature = (epsilon = "1/4", builtin = None, n = None, edges = None))]
fn gen_mis(
    epsilon: &str,
    builtin: Option<&str>,
    n: Option<u32>,
    edges: Option<Vec<(u32, u32)>>,
) -> PyResult<PyMap> {
    let source = match (builtin, n, edges) {
        (Some(name), None, None) => match name {
            "k4" => k4(),
            "q3" => q3(),
            other => return Err(err(format!("unknown builtin graph `{other}`"))),
        },
        (None, Some(n), Some(edges)) => SourceGraph::new(n, &edges).map_err(err)?,
        _ => {
            return Err(err(
                "give either builtin=\"k4\"/\"q3\" or both n and edges",
            ))
        }
    };
    let epsilon = parse_rational(epsilon).map_err(err)?;
    let gadget = gen_mis_gadget(&source, &epsilon).map_err(err)?;
    let meta = GadgetMeta::from_mis(&gadget);
    Ok(PyMap {
        inner: gadget.map,
        gadget: Some(meta),
    })
}

/// Verifies a gadget claim against a map that carries gadget
/// provenance. Modes: "completeness:V1,V2,..." (raw seat-vote values),
/// "soundness", or "upsilon:N1,N2,.." (a maximal independent set).
#[pyfunction]
#[pyo3(signature = (map, mode, budget = None))]
fn verify_gadget(py: Python<'_>, map: &PyMap, mode: &str, budget: Option<u64>) -> PyResult<Py<PyAny>> {
    let meta = map
        .gadget
        .as_ref()
        .ok_or_else(|| err("map document carries no gadget metadata to verify"))?;
    let mode = parse_verify_mode(mode).map_err(err)?;
    let rebuilt = meta.rebuild().map_err(err)?;
    if !same_structure(&map.inner, rebuilt.map()) {
        return Err(err("map cells do not match the gadget metadata"));
    }
    let verdict: GadgetVerdict = match (&rebuilt, &mode) {
        (RebuiltGadget::SeatVote(g), VerifyMode::Completeness(raw)) => {
            let solution = raw
                .iter()
                .map(|&v| {
                    v.checked_mul(g.multiplier)
                        .ok_or_else(|| err("claimed value overflows"))
                })
                .collect::<PyResult<Vec<u64>>>()?;
            verify_seatvote_gadget(g, &SeatVoteCheck::Completeness { solution }).map_err(err)?
        }
        (RebuiltGadget::SeatVote(g), VerifyMode::Soundness) => verify_seatvote_gadget(
            g,
            &SeatVoteCheck::SoundnessExhaustive {
                node_budget: budget,
            },
        )
        .map_err(err)?,
        (RebuiltGadget::Mis(g), VerifyMode::Upsilon(ind_set)) => {
            verify_mis_gadget(g, ind_set).map_err(err)?
        }
        _ => return Err(err("mode does not apply to this gadget family")),
    };
    to_py(
        py,
        &json!({
            "trivial_plan_valid": verdict.trivial_plan_valid,
            "completeness_holds": verdict.completeness_holds,
            "soundness_holds": verdict.soundness_holds,
            "details": verdict.details,
            "all_hold": verdict.all_hold(),
        }),
    )
}

/// The affine wasted-vote form `Upsilon(mu)` for an independent set of
/// size `mu` on an n-node source at design parameters epsilon, delta.
#[pyfunction]
fn upsilon(mu: u32, n: u32, epsilon: &str, delta: &str) -> PyResult<String> {
    let eps = parse_rational(epsilon).map_err(err)?;
    let delta = parse_rational(delta).map_err(err)?;
    Ok(format_rational(&upsilon_form(mu, n, &eps, &delta)))
}

#[pymodule]
fn mander(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMap>()?;
    m.add_class::<PyPlan>()?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(district_stats, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(partisan_bias, m)?)?;
    m.add_function(wrap_pyfunction!(seat_vote, m)?)?;
    m.add_function(wrap_pyfunction!(polsby_popper, m)?)?;
    m.add_function(wrap_pyfunction!(compactness_check, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(gen_seatvote, m)?)?;
    m.add_function(wrap_pyfunction!(gen_mis, m)?)?;
    m.add_function(wrap_pyfunction!(verify_gadget, m)?)?;
    m.add_function(wrap_pyfunction!(upsilon, m)?)?;
    Ok(())
}
