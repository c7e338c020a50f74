//! Acceptance battery: twelve end-to-end checks, one test per claim,
//! each with an explicit wall-clock budget. Every numeric comparison is
//! exact; no tolerances appear anywhere in this file.

use mander_core::enumerate::{
    enumerate_plans, enumerate_plans_visit, naive_enumerate_full, EnumerateOptions, Objective,
};
use mander_core::exact::ratio;
use mander_core::gadgets::{
    build_seatvote, gen_mis_gadget, k4, local_node_tilings, plan_from_independent_set, q3,
    seatvote_reference_plans, upsilon, verify_seatvote_gadget, SeatVoteCheck, SeatVoteVariant,
    SourceGraph,
};
use mander_core::io::{
    map_from_json, map_to_json, plan_from_json, plan_to_json, same_structure, GadgetMeta,
};
use mander_core::metrics::{
    effgap_identity_residual, partisan_bias, polsby_popper, CompactnessConstant, CompactnessScore,
    MetricsError, ShiftModel,
};
use mander_core::model::{
    build_grid_map, build_planar_map, district_stats, CellIx, MapInstance, Party, Plan,
};
use mander_core::optimize::{optimize, SearchParams};
use mander_core::validity::{check_plan, BalanceCriterion};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Prints the one-line verdict and enforces the check's time budget.
fn finish(label: &str, start: Instant, budget_secs: u64) {
    let elapsed = start.elapsed();
    println!("acceptance {label}: PASS ({:.2}s)", elapsed.as_secs_f64());
    assert!(
        elapsed.as_secs() < budget_secs,
        "{label} exceeded its {budget_secs}s budget: {elapsed:?}"
    );
}

fn grid(rows: u32, cols: u32, cells: &[(u32, u32, u64, u64)], kappa: u32) -> MapInstance {
    build_grid_map(rows, cols, cells, kappa).expect("test map is well-formed")
}

fn cell_ix(map: &MapInstance, id: &str) -> CellIx {
    map.index_of(id).expect("cell id is occupied")
}

/// A 4x4 map whose strip plan is valid under strict balance and whose
/// strict district population is odd, so no district can ever tie:
/// kappa = 2 makes both halves sum to 23, kappa = 4 makes every row sum
/// to 13.
fn tie_free_map(seed: u64, kappa: u32) -> MapInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = Vec::with_capacity(16);
    let mut push_group = |rng: &mut ChaCha8Rng, coords: &[(u32, u32)], target: u64| {
        let mut sum = 0u64;
        for (i, &(r, c)) in coords.iter().enumerate() {
            let pop = if i + 1 == coords.len() {
                target - sum
            } else {
                rng.random_range(1..=3u64)
            };
            sum += pop;
            let party_a = rng.random_range(0..=pop);
            cells.push((r, c, pop, party_a));
        }
    };
    match kappa {
        2 => {
            for half in 0..2u32 {
                let coords: Vec<(u32, u32)> = (0..8)
                    .map(|i| (half * 2 + i / 4, i % 4))
                    .collect();
                // Seven cells of 1..=3 leave the last in 2..=16.
                push_group(&mut rng, &coords, 23);
            }
        }
        4 => {
            for r in 0..4u32 {
                let coords: Vec<(u32, u32)> = (0..4).map(|c| (r, c)).collect();
                // Three cells of 1..=3 leave the last in 4..=10.
                push_group(&mut rng, &coords, 13);
            }
        }
        _ => unreachable!("tie-free family is built for kappa 2 and 4"),
    }
    grid(4, 4, &cells, kappa)
}

#[test]
fn acceptance_01_effgap_identity() {
    let t = Instant::now();
    for (seed, kappa) in [(0u64, 2u32), (1, 2), (2, 2), (3, 4), (4, 4)] {
        let map = tie_free_map(0xA100 + seed, kappa);
        let total = map.total_pop();
        assert_eq!(total % u64::from(kappa), 0);
        assert_eq!((total / u64::from(kappa)) % 2, 1);
        let mut plans = 0u64;
        let mut visit = |plan: &Plan| {
            let stats = district_stats(&map, plan, Party::A).unwrap();
            assert!(
                stats.iter().all(|s| 2 * s.party_a != s.pop),
                "tie in a family built to exclude ties"
            );
            let residual = effgap_identity_residual(&map, plan, Party::A).unwrap();
            assert!(residual.is_zero(), "nonzero residual: {residual}");
            plans += 1;
        };
        let (count, exhausted) =
            enumerate_plans_visit(&map, &BalanceCriterion::Strict, None, &mut visit).unwrap();
        assert!(exhausted);
        assert_eq!(count, plans);
        assert!(count >= 1, "the strip plan keeps the family non-vacuous");
    }
    finish("01 effgap-identity", t, 60);
}

/// Small maps exercising both topologies, every balance criterion, and
/// several objectives against the label-vector reference enumerator.
fn oracle_corpus() -> Vec<(MapInstance, BalanceCriterion, Objective)> {
    let uniform_3x3 = |kappa: u32| {
        let cells: Vec<(u32, u32, u64, u64)> = (0..9).map(|i| (i / 3, i % 3, 2, 1)).collect();
        grid(3, 3, &cells, kappa)
    };
    let varied_3x3 = {
        let counts = [(3, 1), (2, 2), (4, 0), (5, 3), (1, 1), (2, 0), (3, 2), (4, 2), (6, 1)];
        let cells: Vec<(u32, u32, u64, u64)> = counts
            .iter()
            .enumerate()
            .map(|(i, &(pop, a))| (i as u32 / 3, i as u32 % 3, pop, a))
            .collect();
        grid(3, 3, &cells, 3)
    };
    let varied_2x4 = {
        let counts = [(2, 1), (4, 3), (2, 0), (6, 2), (4, 2), (2, 1), (2, 2), (2, 0)];
        let cells: Vec<(u32, u32, u64, u64)> = counts
            .iter()
            .enumerate()
            .map(|(i, &(pop, a))| (i as u32 / 4, i as u32 % 4, pop, a))
            .collect();
        grid(2, 4, &cells, 2)
    };
    let path_1x6 = {
        let counts = [(2, 1), (3, 0), (2, 2), (5, 2), (2, 1), (2, 0)];
        let cells: Vec<(u32, u32, u64, u64)> = counts
            .iter()
            .enumerate()
            .map(|(i, &(pop, a))| (0, i as u32, pop, a))
            .collect();
        grid(1, 6, &cells, 3)
    };
    let ell_shape = {
        let cells = [
            (0, 0, 3, 1),
            (1, 0, 2, 2),
            (2, 0, 4, 1),
            (3, 0, 2, 0),
            (3, 1, 3, 2),
            (3, 2, 2, 1),
            (3, 3, 4, 3),
        ];
        grid(4, 4, &cells, 2)
    };
    let planar_5 = {
        let cells: Vec<(String, u64, u64)> = [("a", 3, 2), ("b", 2, 0), ("c", 4, 1), ("d", 2, 2), ("e", 3, 1)]
            .iter()
            .map(|&(id, pop, a)| (id.to_string(), pop, a))
            .collect();
        let edges: Vec<(String, String)> = [("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("e", "a"), ("b", "d")]
            .iter()
            .map(|&(u, v)| (u.to_string(), v.to_string()))
            .collect();
        build_planar_map(&cells, &edges, 2).unwrap()
    };
    let planar_prism = {
        let cells: Vec<(String, u64, u64)> = (0..6)
            .map(|i| (format!("p{i}"), 2 + (i as u64 % 3), (i as u64) % 2))
            .collect();
        let pairs = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)];
        let edges: Vec<(String, String)> = pairs
            .iter()
            .map(|&(u, v)| (format!("p{u}"), format!("p{v}")))
            .collect();
        build_planar_map(&cells, &edges, 3).unwrap()
    };
    let uniform_3x3_k4 = {
        let cells: Vec<(u32, u32, u64, u64)> = (0..9).map(|i| (i / 3, i % 3, 2, 1)).collect();
        grid(3, 3, &cells, 4)
    };
    vec![
        (uniform_3x3(2), BalanceCriterion::Strict, Objective::MinimizeEffGap),
        (uniform_3x3(3), BalanceCriterion::AdditiveSlack(2), Objective::MaximizeSeatsA),
        (varied_3x3, BalanceCriterion::MultiplicativeRatio(ratio(1, 2)), Objective::MinimizeEffGap),
        (varied_2x4, BalanceCriterion::AdditivePolynomial(ratio(11, 10)), Objective::MaximizeEffGap),
        (path_1x6, BalanceCriterion::AdditiveSlack(3), Objective::MinimizeSeatsA),
        (ell_shape, BalanceCriterion::AdditiveSlack(2), Objective::MinimizeEffGap),
        (planar_5, BalanceCriterion::MultiplicativeRatio(ratio(1, 3)), Objective::MaximizeSeatsA),
        (planar_prism, BalanceCriterion::AdditiveSlack(4), Objective::MinimizeEffGap),
        (uniform_3x3_k4, BalanceCriterion::AdditiveSlack(2), Objective::MaximizeEffGap),
    ]
}

#[test]
fn acceptance_02_enumerator_oracle() {
    let t = Instant::now();
    let mut nonempty = 0usize;
    for (i, (map, criterion, objective)) in oracle_corpus().into_iter().enumerate() {
        assert!(map.cell_count() <= 9, "oracle corpus stays tiny");
        let opts = EnumerateOptions {
            objective: Some(objective.clone()),
            tie_pref: Party::A,
            node_budget: None,
            max_best_plans: 4,
        };
        let fast = enumerate_plans(&map, &criterion, &opts).unwrap();
        assert!(fast.exhausted);
        let (naive_count, naive_best) =
            naive_enumerate_full(&map, &criterion, Some(&objective), Party::A).unwrap();
        assert_eq!(fast.count, naive_count, "count mismatch on corpus map {i}");
        assert_eq!(fast.best_value, naive_best, "optimum mismatch on corpus map {i}");
        if fast.count > 0 {
            nonempty += 1;
        }
    }
    assert!(nonempty >= 7, "corpus must not be dominated by vacuous cases");
    finish("02 enumerator-oracle", t, 120);
}

#[test]
fn acceptance_03_partition_gadget_completeness() {
    let t = Instant::now();
    let g = build_seatvote(&[2, 4, 6, 8], 2, SeatVoteVariant::A, &ratio(11, 10), false).unwrap();
    assert!(g.scale_applied);
    assert_eq!(g.criterion(), BalanceCriterion::AdditivePolynomial(ratio(11, 10)));
    let solution: Vec<u64> = [2u64, 8].iter().map(|v| v * g.multiplier).collect();
    let (_, completeness) = seatvote_reference_plans(&g, Some(&solution)).unwrap();
    let plan = completeness.expect("solution given");
    let report = check_plan(&g.map, &plan, &g.criterion()).unwrap();
    assert!(report.is_valid(), "completeness plan must be valid");
    let stats = district_stats(&g.map, &plan, Party::A).unwrap();
    assert_eq!(stats.len(), 2);
    let seats_a = stats.iter().filter(|s| s.winner == Party::A).count();
    assert_eq!(seats_a, 1, "the minority party wins exactly one district");
    let w = g.instance.w();
    let n = u64::from(g.n);
    let mut pops: Vec<u64> = stats.iter().map(|s| s.pop).collect();
    pops.sort_unstable();
    assert_eq!(pops, vec![w + 2 * n - 2, w + 2 * n + 2]);
    let verdict = verify_seatvote_gadget(&g, &SeatVoteCheck::Completeness { solution }).unwrap();
    assert!(verdict.all_hold());
    finish("03 partition-completeness", t, 1);
}

#[test]
fn acceptance_04_partition_gadget_soundness() {
    let t = Instant::now();
    // {2, 4, 6, 10} admits no even split, so no valid plan may hand the
    // minority party a seat.
    let g = build_seatvote(&[2, 4, 6, 10], 2, SeatVoteVariant::A, &ratio(11, 10), false).unwrap();
    assert_eq!(g.map.cell_count(), 15);
    let mut max_seats = 0usize;
    let mut visit = |plan: &Plan| {
        let stats = district_stats(&g.map, plan, Party::A).unwrap();
        max_seats = max_seats.max(stats.iter().filter(|s| s.winner == Party::A).count());
    };
    let (count, exhausted) =
        enumerate_plans_visit(&g.map, &g.criterion(), None, &mut visit).unwrap();
    assert!(exhausted, "the walk must finish without a budget");
    assert!(count >= 1, "the gadget always admits its trivial plan");
    assert_eq!(max_seats, 0, "no valid plan gives the minority a seat");
    let verdict =
        verify_seatvote_gadget(&g, &SeatVoteCheck::SoundnessExhaustive { node_budget: None })
            .unwrap();
    assert!(verdict.trivial_plan_valid);
    assert_eq!(verdict.soundness_holds, Some(true));
    finish("04 partition-soundness", t, 600);
}

#[test]
fn acceptance_05_partition_gadget_aggregates() {
    let t = Instant::now();
    for values in [&[2u64, 4, 6, 8][..], &[2, 4, 6, 8, 10][..]] {
        for kappa in [2u32, 3, 5] {
            for variant in [SeatVoteVariant::A, SeatVoteVariant::B] {
                let g = build_seatvote(values, kappa, variant, &ratio(11, 10), false).unwrap();
                let w = u128::from(g.instance.w());
                let n = u128::from(g.n);
                let alpha = u128::from(g.alpha);
                let beta = u128::from(g.beta);
                let expect_pop = alpha * (2 * w + 4 * n) + beta * w;
                let mut expect_a = alpha * (w - 47 * n - 1) + beta * (w / 2 - 50 * n);
                if let Some(q) = g.q {
                    expect_a += u128::from(q) * alpha * alpha * n * n + 100 * n;
                }
                assert_eq!(u128::from(g.map.total_pop()), expect_pop);
                assert_eq!(u128::from(g.map.total_party_a()), expect_a);
                match g.variant {
                    SeatVoteVariant::A => assert!(2 * expect_a < expect_pop),
                    SeatVoteVariant::B => assert!(2 * expect_a >= expect_pop),
                }
            }
        }
    }
    finish("05 partition-aggregates", t, 1);
}

#[test]
fn acceptance_06_independent_set_gadget_structure() {
    let t = Instant::now();
    for (graph, cells, edges, kappa) in [(k4(), 38, 40, 18u32), (q3(), 76, 80, 36)] {
        let g = gen_mis_gadget(&graph, &ratio(1, 4)).unwrap();
        let n = u64::from(graph.n());
        assert_eq!(g.map.cell_count(), cells);
        assert_eq!(g.map.edge_count(), edges);
        assert_eq!(g.map.kappa(), kappa);
        assert_eq!(g.map.cell_count() as u64, 19 * n / 2);
        assert_eq!(g.map.edge_count() as u64, 10 * n);
        assert_eq!(u64::from(g.map.kappa()), 9 * n / 2);
    }
    finish("06 independent-set-structure", t, 1);
}

#[test]
fn acceptance_07_wasted_vote_affine_identity() {
    let t = Instant::now();
    let quarter = ratio(1, 4);
    let cases: [(SourceGraph, i64, Vec<Vec<u32>>); 2] = [
        (k4(), 6_400, vec![vec![0]]),
        (q3(), 51_200, vec![vec![0, 7], vec![0, 3, 5, 6]]),
    ];
    for (graph, delta_denom, sets) in cases {
        let g = gen_mis_gadget(&graph, &quarter).unwrap();
        // delta is pinned to 1 / (100 n^3) by the source size.
        assert_eq!(g.delta, ratio(1, delta_denom));
        for set in sets {
            let plan = plan_from_independent_set(&g, &set).unwrap();
            let stats = district_stats(&g.map, &plan, Party::A).unwrap();
            let sum: i128 = stats
                .iter()
                .map(|s| i128::from(s.wasted_a_x2) - i128::from(s.wasted_b_x2))
                .sum();
            let expected = upsilon(set.len() as u32, graph.n(), &g.epsilon, &g.delta)
                * BigRational::from_integer(BigInt::from(2u128 * u128::from(g.denom)));
            assert!(expected.is_integer(), "scaled affine form must clear to an integer");
            assert_eq!(BigInt::from(sum), expected.to_integer(), "set {set:?}");
        }
    }
    // The one-step difference is a constant independent of mu and n.
    let mut rng = ChaCha8Rng::seed_from_u64(0xD1FF);
    for _ in 0..100 {
        let mu = rng.random_range(1..=60u32);
        let n = rng.random_range(1..=120u32);
        let den = rng.random_range(3..=97i64);
        let num = rng.random_range(1..=((den - 1) / 2).max(1));
        let eps = ratio(num, den);
        let delta = ratio(1, rng.random_range(1_000..=1_000_000i64));
        let lhs = upsilon(mu - 1, n, &eps, &delta) - upsilon(mu, n, &eps, &delta);
        let rhs = ratio(-3, 1) - ratio(3, 2) * &eps + ratio(3, 1) * &delta;
        assert_eq!(lhs, rhs);
    }
    finish("07 wasted-vote-identity", t, 60);
}

#[test]
fn acceptance_08_node_gadget_tiling() {
    let t = Instant::now();
    let g = gen_mis_gadget(&k4(), &ratio(1, 4)).unwrap();
    let (count, parts, local) = local_node_tilings(&g).unwrap();
    assert_eq!(count, 2, "an isolated node gadget tiles in exactly two ways");
    assert_eq!(parts.len(), 2);
    assert_ne!(parts[0], parts[1]);
    assert_eq!(local.cell_count(), 11);
    for tiling in &parts {
        let covered: usize = tiling.iter().map(|p| p.len()).sum();
        assert_eq!(covered, local.cell_count(), "a tiling covers every cell once");
        for part in tiling {
            let edge_cells = part
                .iter()
                .filter(|&&c| local.id(c).starts_with('u'))
                .count();
            if edge_cells == 0 {
                continue;
            }
            assert_eq!(edge_cells, 1, "edge cells never share a district");
            let terminals = part
                .iter()
                .filter(|&&c| local.id(c).starts_with('t'))
                .count();
            assert!(
                part.len() == 1 || (part.len() == 2 && terminals == 1),
                "an edge cell stands alone or pairs with exactly one terminal"
            );
        }
    }
    finish("08 node-tiling", t, 60);
}

#[test]
fn acceptance_09_partisan_bias() {
    let t = Instant::now();
    // Mirrored maps: equal party totals force a zero mirror shift, so
    // the bias must vanish identically.
    let mut rng = ChaCha8Rng::seed_from_u64(0xB1A5);
    for _ in 0..20 {
        let mut cells = Vec::with_capacity(16);
        for r in 0..4u32 {
            for c in 0..2u32 {
                let pop = rng.random_range(1..=6u64);
                let a = rng.random_range(0..=pop);
                cells.push((r, c, pop, a));
                cells.push((r, 3 - c, pop, pop - a));
            }
        }
        let map = grid(4, 4, &cells, 2);
        assert_eq!(2 * map.total_party_a(), map.total_pop());
        let mut assignment = vec![0u16; 16];
        for r in 0..4u32 {
            for c in 0..4u32 {
                let ix = cell_ix(&map, &format!("{r},{c}"));
                assignment[ix as usize] = u16::from(r >= 2);
            }
        }
        let plan = Plan { assignment };
        let bias = partisan_bias(&map, &plan, &ShiftModel::Uniform, Party::A).unwrap();
        assert!(bias.is_zero(), "balanced totals must give zero bias");
    }
    // Beta validation: the sum must equal the overall margin alpha, and
    // the uniform model is exactly the explicit alpha/kappa vector.
    let map = grid(1, 4, &[(0, 0, 5, 4), (0, 1, 5, 3), (0, 2, 5, 2), (0, 3, 5, 2)], 2);
    let plan = Plan { assignment: vec![0, 0, 1, 1] };
    // alpha = (2*11 - 20) / 20 = 1/10.
    let bad = ShiftModel::Explicit(vec![ratio(1, 10), ratio(1, 10)]);
    assert!(matches!(
        partisan_bias(&map, &plan, &bad, Party::A),
        Err(MetricsError::BetaSumMismatch)
    ));
    let good = ShiftModel::Explicit(vec![ratio(1, 20), ratio(1, 20)]);
    let explicit = partisan_bias(&map, &plan, &good, Party::A).unwrap();
    let uniform = partisan_bias(&map, &plan, &ShiftModel::Uniform, Party::A).unwrap();
    assert_eq!(explicit, uniform);
    finish("09 partisan-bias", t, 1);
}

#[test]
fn acceptance_10_polsby_popper_reference_shapes() {
    let t = Instant::now();
    let cells: Vec<(u32, u32, u64, u64)> = (0..49).map(|i| (i / 7, i % 7, 2, 1)).collect();
    let map = grid(7, 7, &cells, 2);
    // Any k x k square scores pi/4: area k^2 against boundary 4k.
    for k in 1..=6u32 {
        let district: Vec<CellIx> = (0..k)
            .flat_map(|r| (0..k).map(move |c| (r, c)))
            .map(|(r, c)| cell_ix(&map, &format!("{r},{c}")))
            .collect();
        let score = polsby_popper(&map, &district, &CompactnessConstant::FourPi).unwrap();
        assert_eq!(score, CompactnessScore::PiMultiple(ratio(1, 4)), "square side {k}");
    }
    let strip: Vec<CellIx> = (0..4).map(|c| cell_ix(&map, &format!("0,{c}"))).collect();
    let score = polsby_popper(&map, &strip, &CompactnessConstant::FourPi).unwrap();
    assert_eq!(score, CompactnessScore::PiMultiple(ratio(4, 25)));
    // Squares beat strips: 1/4 > 4/25 as pi coefficients.
    assert!(ratio(1, 4) > ratio(4, 25));
    finish("10 polsby-popper", t, 1);
}

#[test]
fn acceptance_11_optimizer_attains_optimum() {
    let t = Instant::now();
    let mut attained = 0u32;
    for i in 0..10u64 {
        let kappa = if i % 2 == 0 { 2 } else { 3 };
        let mut rng = ChaCha8Rng::seed_from_u64(0x0B71 + i);
        let mut cells = Vec::with_capacity(16);
        for r in 0..4u32 {
            for c in 0..4u32 {
                let pop = rng.random_range(2..=8u64);
                let a = rng.random_range(0..=pop);
                cells.push((r, c, pop, a));
            }
        }
        let map = grid(4, 4, &cells, kappa);
        let criterion = BalanceCriterion::AdditiveSlack(map.total_pop() / 3);
        let opts = EnumerateOptions {
            objective: Some(Objective::MinimizeEffGap),
            tie_pref: Party::A,
            node_budget: None,
            max_best_plans: 1,
        };
        let res = enumerate_plans(&map, &criterion, &opts).unwrap();
        assert!(res.exhausted);
        let best = res.best_value.expect("instance admits a valid plan");
        let params = SearchParams {
            seed: 7_700 + i,
            restarts: 20,
            max_iters: 600,
            temperature_schedule: None,
        };
        let out = optimize(&map, &criterion, &Objective::MinimizeEffGap, &params, Party::A).unwrap();
        for point in &out.trace {
            let report = check_plan(&map, &point.plan, &criterion).unwrap();
            assert!(report.is_valid(), "trace plans stay valid");
        }
        assert!(out.value >= best, "local search cannot beat the exhaustive optimum");
        if out.value == best {
            attained += 1;
        }
    }
    assert!(attained >= 9, "optimum attained on only {attained}/10 instances");
    finish("11 optimizer-sanity", t, 120);
}

fn random_grid_document(rng: &mut ChaCha8Rng) -> MapInstance {
    let rows = rng.random_range(2..=5u32);
    let cols = rng.random_range(2..=5u32);
    // Random connected occupied set grown cell by cell.
    let target = rng.random_range(3..=(rows * cols) as usize);
    let mut occupied = vec![(0u32, 0u32)];
    let mut frontier: Vec<(u32, u32)> = vec![(0, 1), (1, 0)];
    while occupied.len() < target && !frontier.is_empty() {
        let pick = rng.random_range(0..frontier.len());
        let (r, c) = frontier.swap_remove(pick);
        if r >= rows || c >= cols || occupied.contains(&(r, c)) {
            continue;
        }
        occupied.push((r, c));
        frontier.push((r + 1, c));
        frontier.push((r, c + 1));
        if r > 0 {
            frontier.push((r - 1, c));
        }
        if c > 0 {
            frontier.push((r, c - 1));
        }
    }
    let kappa = rng.random_range(2..occupied.len() as u32);
    let cells: Vec<(u32, u32, u64, u64)> = occupied
        .iter()
        .map(|&(r, c)| {
            let pop = rng.random_range(1..=50u64);
            (r, c, pop, rng.random_range(0..=pop))
        })
        .collect();
    let map = grid(rows, cols, &cells, kappa);
    let scale = rng.random_range(1..=1_000u64);
    map.with_scale(scale)
}

fn random_planar_document(rng: &mut ChaCha8Rng) -> MapInstance {
    let n = rng.random_range(4..=9u32);
    let cells: Vec<(String, u64, u64)> = (0..n)
        .map(|i| {
            let pop = rng.random_range(1..=50u64);
            (format!("n{i}"), pop, rng.random_range(0..=pop))
        })
        .collect();
    let mut edges: std::collections::BTreeSet<(u32, u32)> = (1..n)
        .map(|i| (rng.random_range(0..i), i))
        .collect();
    for _ in 0..rng.random_range(0..=3u32) {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let edge_ids: Vec<(String, String)> = edges
        .iter()
        .map(|&(u, v)| (format!("n{u}"), format!("n{v}")))
        .collect();
    let kappa = rng.random_range(2..n);
    build_planar_map(&cells, &edge_ids, kappa).unwrap()
}

fn random_total_plan(rng: &mut ChaCha8Rng, map: &MapInstance) -> Plan {
    // Serialization needs every district nonempty but not connected, so
    // seed district d at cell d and label the rest uniformly.
    let kappa = map.kappa() as u16;
    let assignment = (0..map.cell_count())
        .map(|i| {
            if i < kappa as usize {
                i as u16
            } else {
                rng.random_range(0..kappa)
            }
        })
        .collect();
    Plan { assignment }
}

fn roundtrip_map(map: &MapInstance, meta: Option<GadgetMeta>) {
    let json = map_to_json(map, meta);
    let (back, meta_back) = map_from_json(&json).unwrap();
    assert!(same_structure(map, &back));
    assert_eq!(map.scale(), back.scale());
    assert_eq!(map_to_json(&back, meta_back), json, "serialization is stable");
}

fn roundtrip_plan(map: &MapInstance, plan: &Plan) {
    let json = plan_to_json(map, plan).unwrap();
    let back = plan_from_json(map, &json).unwrap();
    assert_eq!(back.assignment, plan.assignment);
    assert_eq!(plan_to_json(map, &back).unwrap(), json);
}

#[test]
fn acceptance_12_documents_round_trip() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x12D0);
    let mut documents = 0usize;
    for _ in 0..12 {
        let map = random_grid_document(&mut rng);
        roundtrip_map(&map, None);
        roundtrip_plan(&map, &random_total_plan(&mut rng, &map));
        documents += 2;
    }
    for _ in 0..10 {
        let map = random_planar_document(&mut rng);
        roundtrip_map(&map, None);
        roundtrip_plan(&map, &random_total_plan(&mut rng, &map));
        documents += 2;
    }
    // Gadget-bearing documents carry "P/Q" rational fields.
    for (values, variant) in [
        (&[2u64, 4, 6, 8][..], SeatVoteVariant::A),
        (&[2, 4, 6, 8, 10][..], SeatVoteVariant::B),
    ] {
        let g = build_seatvote(values, 2, variant, &ratio(11, 10), false).unwrap();
        roundtrip_map(&g.map, Some(GadgetMeta::from_seatvote(&g)));
        documents += 1;
    }
    let illustration = build_seatvote(&[200, 400, 600, 800], 2, SeatVoteVariant::A, &ratio(3, 2), true).unwrap();
    roundtrip_map(&illustration.map, Some(GadgetMeta::from_seatvote(&illustration)));
    documents += 1;
    for graph in [k4(), q3()] {
        let g = gen_mis_gadget(&graph, &ratio(1, 4)).unwrap();
        roundtrip_map(&g.map, Some(GadgetMeta::from_mis(&g)));
        documents += 1;
    }
    let fine = gen_mis_gadget(&k4(), &ratio(2, 7)).unwrap();
    roundtrip_map(&fine.map, Some(GadgetMeta::from_mis(&fine)));
    documents += 1;
    assert_eq!(documents, 50);
    finish("12 document-round-trip", t, 1);
}
