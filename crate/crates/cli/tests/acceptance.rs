//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantities. Run with `cargo test -p vopt --test acceptance`.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use vopt_core::backend::{
    BackendOptions, ReferenceBackend, ScalarBackend, ScalarProblem, ScalarSolution, SolveStatus,
    SubproblemKind,
};
use vopt_core::engine::{self, Algorithm, SolveOptions, SolveResult, SolverStatus};
use vopt_core::model::{Constraint, QuadraticFunction};
use vopt_core::polytope::{distance_point_to_polyhedron, Halfspace, Polyhedron};
use vopt_core::scalarize::{ParamKey, Scalarizer};
use vopt_core::{fixtures, VectorProblem};

fn v(data: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(data)
}

fn options(algorithm: Algorithm) -> SolveOptions {
    SolveOptions {
        algorithm,
        ..Default::default()
    }
}

fn solve_timed(problem: &VectorProblem, opts: &SolveOptions) -> (SolveResult, Duration) {
    let started = Instant::now();
    let result = engine::solve(problem, opts).expect("engine error");
    (result, started.elapsed())
}

/// Feasible grid images of the disc problem over [0,1]².
fn disc_grid(resolution: usize) -> Vec<DVector<f64>> {
    let problem = fixtures::disc();
    let mut images = Vec::new();
    for i in 0..=resolution {
        for j in 0..=resolution {
            let x = v(&[i as f64 / resolution as f64, j as f64 / resolution as f64]);
            if problem.max_violation(&x) <= 1e-12 {
                images.push(problem.evaluate_objectives(&x).unwrap());
            }
        }
    }
    images
}

#[test]
fn criterion_01_disc_fixture_all_algorithms() {
    let problem = fixtures::disc();
    for algorithm in [Algorithm::Adena, Algorithm::Movs, Algorithm::Monmo] {
        let (result, elapsed) = solve_timed(&problem, &options(algorithm));
        assert!(
            elapsed <= Duration::from_secs(10),
            "{algorithm} took {elapsed:?}"
        );
        assert_eq!(
            result.status,
            SolverStatus::Solved,
            "{algorithm} not solved"
        );
        assert!(!result.images.is_empty());
        for f in &result.images {
            let residual = ((f[0] - 1.0).powi(2) + (f[1] - 1.0).powi(2) - 1.0).abs();
            assert!(
                residual <= 1e-3,
                "{algorithm}: image {:?} off the arc by {residual:.2e}",
                f.as_slice()
            );
            for i in 0..2 {
                assert!(f[i] >= -1e-6 && f[i] <= 1.0 + 1e-6, "{algorithm}: {f:?}");
            }
        }
        let initial = result.metric_trace[0];
        let last = *result.metric_trace.last().unwrap();
        assert!(engine::check_stopping(last, initial, 1e-2));
        println!(
            "CRITERION 1 PASS ({algorithm}): {} images on the arc, metric {initial:.4} -> {last:.6}, {elapsed:.2?}",
            result.images.len()
        );
    }
}

#[test]
fn criterion_02_skewed_cone_fixture() {
    let problem = fixtures::disc_with_cone_c1();
    let cone = problem.cone.clone();
    let margin = 1e-3;
    let shift = cone.interior_direction() * margin;
    let grid = disc_grid(400);
    let natural = {
        let (result, _) = solve_timed(&fixtures::disc(), &options(Algorithm::Movs));
        result
    };
    for algorithm in [Algorithm::Movs, Algorithm::Monmo] {
        let (result, _) = solve_timed(&problem, &options(algorithm));
        assert_eq!(result.status, SolverStatus::Solved);
        for y in &result.images {
            for g in &grid {
                let dominates = cone.leq(&(g + &shift), y).unwrap();
                assert!(
                    !dominates,
                    "{algorithm}: grid image {:?} C1-dominates {:?} by more than {margin}",
                    g.as_slice(),
                    y.as_slice()
                );
            }
        }
        // The wedge cone orders fewer pairs than the natural one, so the
        // weakly minimal set grows: the returned images sweep a wider range
        // of trade-offs than the natural-ordering front.
        let range = |images: &[DVector<f64>]| {
            let lo = images.iter().map(|f| f[0]).fold(f64::INFINITY, f64::min);
            let hi = images
                .iter()
                .map(|f| f[0])
                .fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        };
        let (nat_lo, nat_hi) = range(&natural.images);
        let (lo, hi) = range(&result.images);
        println!(
            "CRITERION 2 PASS ({algorithm}): {} images C1-nondominated vs {} grid samples; f1 range [{lo:.3}, {hi:.3}] vs natural [{nat_lo:.3}, {nat_hi:.3}]",
            result.images.len(),
            grid.len()
        );
    }
}

#[test]
fn criterion_03_epsilon_infimizer_certificate() {
    let backend = ReferenceBackend;
    let backend_opts = BackendOptions::default();
    for problem in [fixtures::disc(), fixtures::tri_objective()] {
        // MOVS: rebuild the final outer approximation and measure every
        // vertex against the inner approximation.
        let (result, _) = solve_timed(&problem, &options(Algorithm::Movs));
        assert_eq!(result.status, SolverStatus::Solved);
        let threshold = 1e-2 * result.metric_trace[0].max(1.0);
        let halfspaces: Vec<Halfspace> = result
            .outer_halfspaces
            .iter()
            .map(|(n, c)| Halfspace::new(n.clone(), *c).unwrap())
            .collect();
        let mut outer = Polyhedron::from_halfspaces(halfspaces);
        outer.enumerate_vertices().unwrap();
        let inner = Polyhedron::from_generators(
            result.images.clone(),
            problem.cone.generator_rays().to_vec(),
        );
        let cap = 1e3
            * result
                .images
                .iter()
                .map(|y| y.amax())
                .fold(1.0_f64, f64::max);
        let mut worst = 0.0_f64;
        for vertex in outer.vertices().iter().filter(|v| v.amax() <= cap) {
            let (d, _) =
                distance_point_to_polyhedron(vertex, &inner, &backend, &backend_opts).unwrap();
            worst = worst.max(d);
        }
        assert!(
            worst <= threshold,
            "{}: MOVS vertex distance {worst:.6} > {threshold:.6}",
            problem.name
        );
        println!(
            "CRITERION 3 PASS ({} movs): max vertex distance {worst:.6} <= {threshold:.6}",
            problem.name
        );

        // MONMO: the norm-min value of every final vertex.
        let (result, _) = solve_timed(&problem, &options(Algorithm::Monmo));
        assert_eq!(result.status, SolverStatus::Solved);
        let threshold = 1e-2 * result.metric_trace[0].max(1.0);
        let halfspaces: Vec<Halfspace> = result
            .outer_halfspaces
            .iter()
            .map(|(n, c)| Halfspace::new(n.clone(), *c).unwrap())
            .collect();
        let mut outer = Polyhedron::from_halfspaces(halfspaces);
        outer.enumerate_vertices().unwrap();
        let scalarizer = Scalarizer::new(&problem);
        let mut worst = 0.0_f64;
        for vertex in outer.vertices().iter().filter(|v| v.amax() <= cap) {
            let sp = scalarizer.nm(vertex).unwrap();
            let sol = backend.solve(&sp, &backend_opts);
            assert_eq!(sol.status, SolveStatus::Optimal);
            worst = worst.max(sol.objective_value.max(0.0));
        }
        assert!(
            worst <= threshold,
            "{}: MONMO vertex value {worst:.6} > {threshold:.6}",
            problem.name
        );
        println!(
            "CRITERION 3 PASS ({} monmo): max norm-min value {worst:.6} <= {threshold:.6}",
            problem.name
        );
    }
}

#[test]
fn criterion_04_tri_objective_fixture() {
    let problem = fixtures::tri_objective();
    // Feasible grid images over the box with the diagonal cut.
    let mut grid = Vec::new();
    let res = 150;
    for i in 0..=res {
        for j in 0..=res {
            let x = v(&[10.0 * i as f64 / res as f64, 4.0 * j as f64 / res as f64]);
            if problem.max_violation(&x) <= 1e-12 {
                grid.push(problem.evaluate_objectives(&x).unwrap());
            }
        }
    }

    let mut counts: HashMap<&str, usize> = HashMap::new();
    for algorithm in [Algorithm::Movs, Algorithm::Monmo, Algorithm::Adena] {
        let (result, elapsed) = solve_timed(&problem, &options(algorithm));
        assert!(
            elapsed <= Duration::from_secs(120),
            "{algorithm} took {elapsed:?}"
        );
        assert!(
            matches!(
                result.status,
                SolverStatus::Solved | SolverStatus::MaxIterReached
            ),
            "{algorithm}: {:?}",
            result.status
        );
        for y in &result.images {
            let strictly_dominated = grid.iter().any(|g| (0..3).all(|i| g[i] < y[i] - 1e-3));
            assert!(
                !strictly_dominated,
                "{algorithm}: image {:?} dominated beyond slack",
                y.as_slice()
            );
        }
        counts.insert(algorithm.name(), result.solutions.len());
        println!(
            "CRITERION 4 PASS ({algorithm}): {} weakly nondominated images vs {} grid samples in {elapsed:.2?} ({})",
            result.images.len(),
            grid.len(),
            result.status
        );
    }
    let movs = counts["movs"];
    let monmo = counts["monmo"];
    if movs <= monmo {
        println!("CRITERION 4 NOTE: solution set sizes movs={movs} <= monmo={monmo}, matching the qualitative expectation");
    } else {
        println!("CRITERION 4 NOTE: qualitative size expectation violated (movs={movs} > monmo={monmo}); reported, not failed");
    }
}

#[test]
fn criterion_05_enclosure_width_law() {
    let problem = fixtures::disc();
    let (result, _) = solve_timed(&problem, &options(Algorithm::Adena));
    assert_eq!(result.status, SolverStatus::Solved);
    for pair in result.metric_trace.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-12, "width trace grew");
    }
    let initial = result.metric_trace[0];
    let final_width = *result.metric_trace.last().unwrap();
    let eps = 1e-2 * initial.max(1.0);
    assert!(final_width < eps, "final width {final_width} >= {eps}");

    // Sampled feasible images inside the enclosure are ε-nondominated.
    let enclosure = result.enclosure.as_ref().expect("enclosure");
    let grid = disc_grid(200);
    let inside = |z: &DVector<f64>| {
        enclosure.lower.iter().any(|l| {
            enclosure
                .upper
                .iter()
                .any(|u| (0..2).all(|i| l[i] <= z[i] && z[i] <= u[i]))
        })
    };
    let mut checked = 0;
    for z in &grid {
        if !inside(z) {
            continue;
        }
        checked += 1;
        let eps_dominated = grid
            .iter()
            .any(|g| (0..2).all(|i| g[i] <= z[i] - eps) && (0..2).any(|i| g[i] < z[i] - eps));
        assert!(
            !eps_dominated,
            "enclosure point {:?} is ε-dominated",
            z.as_slice()
        );
    }
    assert!(checked > 0, "no grid image fell inside the enclosure");
    println!(
        "CRITERION 5 PASS: width {initial:.4} -> {final_width:.6} nonincreasing; {checked} enclosed samples ε-nondominated"
    );
}

#[test]
fn criterion_06_vertex_enumeration_oracle() {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(2024);
    let mut total_vertices = 0usize;
    for case in 0..200 {
        let q = if case % 2 == 0 { 2 } else { 3 };
        // Bounding box plus random supporting halfspaces keeps the set
        // bounded and nonempty (the origin stays feasible).
        let mut halfspaces: Vec<Halfspace> = Vec::new();
        for i in 0..q {
            let mut lo = DVector::zeros(q);
            lo[i] = 1.0;
            halfspaces.push(Halfspace::new(lo, -(1.0 + rng.random_range(0.0..2.0))).unwrap());
            let mut hi = DVector::zeros(q);
            hi[i] = -1.0;
            halfspaces.push(Halfspace::new(hi, -(1.0 + rng.random_range(0.0..2.0))).unwrap());
        }
        let extra = rng.random_range(0..=(12 - 2 * q).min(6));
        for _ in 0..extra {
            let normal = DVector::from_fn(q, |_, _| rng.random_range(-1.0..1.0f64));
            if normal.norm() < 0.3 {
                continue;
            }
            let offset = -rng.random_range(0.4..2.5);
            halfspaces.push(Halfspace::new(normal, offset).unwrap());
        }

        let mut p = Polyhedron::from_halfspaces(halfspaces.clone());
        let (vertices, rays) = p.enumerate_vertices().expect("nonempty by construction");
        assert!(rays.is_empty(), "bounded polyhedron reported rays");

        // Brute-force oracle: intersect all q-subsets of constraint
        // boundaries, keep feasible intersection points.
        let m = halfspaces.len();
        let mut oracle: Vec<DVector<f64>> = Vec::new();
        let mut subset = vec![0usize; q];
        fn visit(
            halfspaces: &[Halfspace],
            subset: &mut Vec<usize>,
            start: usize,
            depth: usize,
            q: usize,
            oracle: &mut Vec<DVector<f64>>,
        ) {
            if depth == q {
                let a = DMatrix::from_fn(q, q, |r, c| halfspaces[subset[r]].normal()[c]);
                let b = DVector::from_fn(q, |r, _| halfspaces[subset[r]].offset());
                if let Some(x) = a.lu().solve(&b) {
                    if x.iter().all(|v| v.is_finite())
                        && halfspaces.iter().all(|h| h.slack(&x) >= -1e-6)
                        && !oracle.iter().any(|o| (o - &x).amax() <= 1e-6)
                    {
                        oracle.push(x);
                    }
                }
                return;
            }
            for i in start..halfspaces.len() {
                subset[depth] = i;
                visit(halfspaces, subset, i + 1, depth + 1, q, oracle);
            }
        }
        visit(&halfspaces, &mut subset, 0, 0, q, &mut oracle);
        let _ = m;

        assert_eq!(
            vertices.len(),
            oracle.len(),
            "case {case}: vertex count {} vs oracle {}",
            vertices.len(),
            oracle.len()
        );
        for o in &oracle {
            assert!(
                vertices.iter().any(|u| (u - o).amax() <= 1e-6),
                "case {case}: oracle vertex {:?} missing",
                o.as_slice()
            );
        }
        total_vertices += vertices.len();
    }
    let elapsed = started.elapsed();
    assert!(elapsed <= Duration::from_secs(30), "took {elapsed:?}");
    println!(
        "CRITERION 6 PASS: 200 random H-reps match the combinatorial oracle ({total_vertices} vertices) in {elapsed:.2?}"
    );
}

#[test]
fn criterion_07_local_bound_sets_oracle() {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use vopt_core::bounds::EnclosureState;

    let mut rng = StdRng::seed_from_u64(99);
    for case in 0..100 {
        let zone_low = v(&[0.0, 0.0]);
        let zone_high = v(&[20.0, 20.0]);
        // Random stable set: draw lattice points and keep the mutually
        // nondominated ones, then insert in draw order.
        let count = rng.random_range(1..=8);
        let mut points: Vec<DVector<f64>> = Vec::new();
        for _ in 0..count {
            let p = v(&[
                rng.random_range(1..19) as f64,
                rng.random_range(1..19) as f64,
            ]);
            if points
                .iter()
                .any(|q| (0..2).all(|i| q[i] <= p[i]) || (0..2).all(|i| p[i] <= q[i]))
            {
                continue;
            }
            points.push(p);
        }
        let mut enc = EnclosureState::new(zone_low.clone(), zone_high.clone()).unwrap();
        for p in &points {
            enc.insert_point(p).unwrap();
        }
        let stable: Vec<DVector<f64>> = enc.stable_set().to_vec();
        assert_eq!(
            stable.len(),
            points.len(),
            "case {case}: set was not stable"
        );

        // Staircase-corner oracle for the stable set.
        let mut sorted = stable.clone();
        sorted.sort_by(|a, b| a[0].total_cmp(&b[0]).then(b[1].total_cmp(&a[1])));
        let mut expected_upper: Vec<DVector<f64>> = Vec::new();
        let mut expected_lower: Vec<DVector<f64>> = Vec::new();
        if sorted.is_empty() {
            expected_upper.push(zone_high.clone());
            expected_lower.push(zone_low.clone());
        } else {
            expected_upper.push(v(&[sorted[0][0], zone_high[1]]));
            for w in sorted.windows(2) {
                expected_upper.push(v(&[w[1][0], w[0][1]]));
            }
            expected_upper.push(v(&[zone_high[0], sorted.last().unwrap()[1]]));
            expected_lower.push(v(&[zone_low[0], sorted[0][1]]));
            for w in sorted.windows(2) {
                expected_lower.push(v(&[w[0][0], w[1][1]]));
            }
            expected_lower.push(v(&[sorted.last().unwrap()[0], zone_low[1]]));
        }
        let matches = |got: &[DVector<f64>], expect: &[DVector<f64>]| {
            got.len() == expect.len() && expect.iter().all(|e| got.contains(e))
        };
        assert!(
            matches(enc.upper_bounds(), &expected_upper),
            "case {case}: U {:?} vs oracle {:?} (N={:?})",
            enc.upper_bounds(),
            expected_upper,
            stable
        );
        assert!(
            matches(enc.lower_bounds(), &expected_lower),
            "case {case}: L mismatch"
        );

        // Covering and antichain conditions on a 60×60 grid of int(B).
        for i in 1..60 {
            for j in 1..60 {
                let z = v(&[20.0 * i as f64 / 60.0, 20.0 * j as f64 / 60.0]);
                let in_search_region = !stable.iter().any(|n| n[0] <= z[0] && n[1] <= z[1]);
                let covered = enc
                    .upper_bounds()
                    .iter()
                    .any(|u| z[0] < u[0] && z[1] < u[1]);
                assert_eq!(in_search_region, covered, "covering fails at {z:?}");
            }
        }
        for a in enc.upper_bounds() {
            for b in enc.upper_bounds() {
                if a != b {
                    assert!(!(a[0] <= b[0] && a[1] <= b[1]), "antichain violated in U");
                }
            }
        }
    }
    println!("CRITERION 7 PASS: 100 random insertion sequences match the staircase oracle with covering and antichain conditions");
}

#[test]
fn criterion_08_backend_active_set_oracle() {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    let mut rng = StdRng::seed_from_u64(7);
    let backend_opts = BackendOptions::default();
    for case in 0..100 {
        let n = rng.random_range(1..=3usize);
        let is_lp = case % 3 == 0;
        let q = if is_lp {
            DMatrix::zeros(n, n)
        } else {
            let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0f64));
            &a * a.transpose() + DMatrix::identity(n, n) * 0.2
        };
        let c = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0f64));
        // Box [-1, 2]^n plus up to two random halfplanes through a point
        // near the box center, so the set stays nonempty.
        let mut constraints: Vec<Constraint> = Vec::new();
        for i in 0..n {
            let mut lo = DVector::zeros(n);
            lo[i] = -1.0;
            constraints.push(Constraint::LinearIneq { a: lo, b: 1.0 });
            let mut hi = DVector::zeros(n);
            hi[i] = 1.0;
            constraints.push(Constraint::LinearIneq { a: hi, b: 2.0 });
        }
        for _ in 0..rng.random_range(0..=2) {
            let a = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0f64));
            if a.norm() < 0.3 {
                continue;
            }
            let center = DVector::from_element(n, 0.5);
            let b = a.dot(&center) + rng.random_range(0.2..1.0);
            constraints.push(Constraint::LinearIneq { a, b });
        }

        let sp = ScalarProblem::new(
            n,
            QuadraticFunction::new(q.clone(), c.clone(), 0.0),
            constraints.clone(),
        );
        let sol = vopt_core::backend::solve_scalar(&sp, &backend_opts);
        assert_eq!(sol.status, SolveStatus::Optimal, "case {case} not optimal");
        assert!(
            sol.kkt_residual <= 1e-7,
            "case {case}: KKT residual {:.2e}",
            sol.kkt_residual
        );

        // Active-set oracle: enumerate subsets of candidate active
        // constraints and solve the KKT system for each.
        let rows: Vec<(&DVector<f64>, f64)> = constraints
            .iter()
            .map(|con| match con {
                Constraint::LinearIneq { a, b } => (a, *b),
                _ => unreachable!(),
            })
            .collect();
        let m = rows.len();
        let mut best = f64::INFINITY;
        for mask in 0..(1u32 << m) {
            let active: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
            if active.len() > n {
                continue;
            }
            let k = active.len();
            let mut kkt = DMatrix::zeros(n + k, n + k);
            kkt.view_mut((0, 0), (n, n)).copy_from(&q);
            for (j, &i) in active.iter().enumerate() {
                for r in 0..n {
                    kkt[(r, n + j)] = rows[i].0[r];
                    kkt[(n + j, r)] = rows[i].0[r];
                }
            }
            let mut rhs = DVector::zeros(n + k);
            rhs.rows_mut(0, n).copy_from(&(-&c));
            for (j, &i) in active.iter().enumerate() {
                rhs[n + j] = rows[i].1;
            }
            let Some(xl) = kkt.lu().solve(&rhs) else {
                continue;
            };
            let x = xl.rows(0, n).into_owned();
            let lambda = xl.rows(n, k);
            if lambda.iter().any(|l| *l < -1e-9) {
                continue;
            }
            if rows.iter().any(|(a, b)| a.dot(&x) > b + 1e-7) {
                continue;
            }
            let value = 0.5 * (&q * &x).dot(&x) + c.dot(&x);
            best = best.min(value);
        }
        assert!(
            (sol.objective_value - best).abs() <= 1e-6,
            "case {case}: barrier {:.9} vs oracle {best:.9}",
            sol.objective_value
        );
    }
    println!("CRITERION 8 PASS: 100 random LPs/QPs match the active-set oracle within 1e-6 with KKT residuals <= 1e-7");
}

#[test]
fn criterion_09_parallel_determinism() {
    let problem = fixtures::ellipsoid();
    let opts = SolveOptions {
        algorithm: Algorithm::Movs,
        batch_size: 4,
        thread_count: 4,
        ..Default::default()
    };
    let (a, _) = solve_timed(&problem, &opts);
    let (b, _) = solve_timed(&problem, &opts);
    let json_a = vopt::export::result_json(&problem, &opts, &a, None);
    let json_b = vopt::export::result_json(&problem, &opts, &b, None);
    let text_a = serde_json::to_string_pretty(&json_a).unwrap();
    let text_b = serde_json::to_string_pretty(&json_b).unwrap();
    assert_eq!(text_a, text_b, "result.json differs between identical runs");
    let csv_a = vopt::export::solutions_csv(&problem, &a);
    let csv_b = vopt::export::solutions_csv(&problem, &b);
    assert_eq!(csv_a, csv_b, "solutions.csv differs between identical runs");

    // batch_size = 1 reproduces the sequential trace.
    let sequential = options(Algorithm::Movs);
    let batch_one = SolveOptions {
        algorithm: Algorithm::Movs,
        batch_size: 1,
        thread_count: 4,
        ..Default::default()
    };
    let (s, _) = solve_timed(&problem, &sequential);
    let (p1, _) = solve_timed(&problem, &batch_one);
    assert_eq!(s.metric_trace, p1.metric_trace, "batch=1 trace differs");
    println!(
        "CRITERION 9 PASS: two batched runs byte-identical ({} bytes of result.json); batch_size=1 trace equals sequential",
        text_a.len()
    );
}

#[test]
fn criterion_10_portfolio_fixture() {
    let problem = fixtures::portfolio();
    let opts = SolveOptions {
        algorithm: Algorithm::Movs,
        batch_size: 6,
        ..Default::default()
    };
    let (result, elapsed) = solve_timed(&problem, &opts);
    assert!(elapsed <= Duration::from_secs(10), "took {elapsed:?}");
    assert_eq!(result.status, SolverStatus::Solved);
    assert!(
        result.solutions.len() >= 20,
        "only {} solutions",
        result.solutions.len()
    );
    for w in &result.weights {
        assert!(w.iter().all(|x| *x >= -1e-9), "weight {w:?} outside R²₊");
    }
    // Sharpe-style ratio (−f1)/sqrt(f2) with zero risk-free rate.
    let mut best: Option<(usize, f64)> = None;
    for (i, f) in result.images.iter().enumerate() {
        assert!(f[1] > 0.0, "nonpositive variance");
        let ratio = -f[0] / f[1].sqrt();
        assert!(ratio.is_finite());
        if best.map_or(true, |(_, r)| ratio > r) {
            best = Some((i, ratio));
        }
    }
    let (idx, ratio) = best.expect("nonempty solution set");
    assert!(idx < result.solutions.len());
    assert!(ratio > 0.0, "Sharpe-style ratio not positive");
    println!(
        "CRITERION 10 PASS: {} solutions in {elapsed:.2?}; max Sharpe-style ratio {ratio:.4} at image {:?}",
        result.solutions.len(),
        result.images[idx].as_slice()
    );
}

/// Backend wrapper that fails deterministically on one chosen scalarization
/// key and counts every scalarization submission.
struct FailingBackend {
    inner: ReferenceBackend,
    target: Mutex<Option<ParamKey>>,
    counts: Mutex<HashMap<ParamKey, usize>>,
}

impl ScalarBackend for FailingBackend {
    fn solve(&self, problem: &ScalarProblem, opts: &BackendOptions) -> ScalarSolution {
        if let Some(tag) = &problem.tag {
            if matches!(
                tag.kind,
                SubproblemKind::WeightedSum
                    | SubproblemKind::PascolettiSerafini
                    | SubproblemKind::NormMin
            ) {
                let key = ParamKey::from_tag(tag);
                let mut counts = self.counts.lock().unwrap();
                *counts.entry(key.clone()).or_insert(0) += 1;
                drop(counts);
                let mut target = self.target.lock().unwrap();
                if tag.kind == SubproblemKind::PascolettiSerafini && target.is_none() {
                    *target = Some(key.clone());
                }
                if target.as_ref() == Some(&key) {
                    return ScalarSolution {
                        status: SolveStatus::NumericalFailure,
                        x: DVector::zeros(problem.n_vars),
                        objective_value: f64::NAN,
                        duals: Vec::new(),
                        kkt_residual: f64::NAN,
                    };
                }
            }
        }
        self.inner.solve(problem, opts)
    }
}

#[test]
fn criterion_11_failure_cache_guarantee() {
    let problem = fixtures::disc();
    let backend = FailingBackend {
        inner: ReferenceBackend,
        target: Mutex::new(None),
        counts: Mutex::new(HashMap::new()),
    };
    let opts = options(Algorithm::Movs);
    let result = engine::solve_with_backend(&problem, &opts, &backend).unwrap();
    assert!(
        matches!(
            result.status,
            SolverStatus::Solved | SolverStatus::PartialFailure
        ),
        "status {:?}",
        result.status
    );
    assert!(result.failed_parameter_count >= 1);
    let counts = backend.counts.lock().unwrap();
    for (key, count) in counts.iter() {
        assert!(*count <= 1, "parameter key {key:?} submitted {count} times");
    }
    let submissions = counts.len();
    println!(
        "CRITERION 11 PASS: deterministic failure injected; {} distinct scalarization keys, none submitted twice; final status {}",
        submissions, result.status
    );
}

#[test]
fn criterion_12_unbounded_and_infeasible_flags() {
    let (result, _) = solve_timed(&fixtures::unbounded_problem(), &options(Algorithm::Movs));
    assert_eq!(result.status, SolverStatus::Unbounded);
    assert!(
        result.metric_trace.is_empty(),
        "unbounded flag raised after the main loop started"
    );
    assert!(result.subproblem_count <= 2);

    let (result, _) = solve_timed(&fixtures::infeasible_problem(), &options(Algorithm::Monmo));
    assert_eq!(result.status, SolverStatus::Infeasible);
    assert!(result.metric_trace.is_empty());
    println!("CRITERION 12 PASS: unbounded and infeasible detected during initialization, before any main-loop iteration");
}
