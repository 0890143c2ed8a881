//! Grid oracles for the scalarization optima on the disc problem.

use nalgebra::DVector;
use vopt_core::backend::{solve_scalar, BackendOptions, SolveStatus};
use vopt_core::fixtures;
use vopt_core::scalarize::Scalarizer;

fn v(data: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(data)
}

fn feasible_grid(resolution: usize) -> Vec<DVector<f64>> {
    let p = fixtures::disc();
    let mut points = Vec::new();
    for i in 0..=resolution {
        for j in 0..=resolution {
            let x = v(&[
                i as f64 / resolution as f64,
                j as f64 / resolution as f64,
            ]);
            if p.max_violation(&x) <= 1e-12 {
                points.push(p.evaluate_objectives(&x).unwrap());
            }
        }
    }
    points
}

#[test]
fn ps_feasibility_transfer_and_weak_minimality() {
    let problem = fixtures::disc();
    let cone = problem.cone.clone();
    let sc = Scalarizer::new(&problem);
    let grid = feasible_grid(250);
    let interior = cone.interior_direction();

    for target in [v(&[0.0, 0.0]), v(&[-0.3, 0.1]), v(&[0.2, -0.2])] {
        let sp = sc.ps(&target, &interior).unwrap();
        let sol = solve_scalar(&sp, &BackendOptions::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        let t_star = sol.objective_value;
        let x = sol.x.rows(0, 2).into_owned();
        let image = problem.evaluate_objectives(&x).unwrap();

        // Feasibility transfer: f(x*) ≤_C v + t*·d within tolerance.
        let reach = &target + &interior * t_star;
        let slackened = &reach + &interior * 1e-7;
        assert!(
            cone.leq(&image, &slackened).unwrap(),
            "feasibility transfer failed at target {:?}",
            target.as_slice()
        );

        // Weak minimality: no grid image interior-dominates f(x*).
        let margin = &interior * 1e-4;
        for g in &grid {
            assert!(
                !cone.leq(&(g + &margin), &image).unwrap(),
                "grid image {:?} interior-dominates PS optimum {:?}",
                g.as_slice(),
                image.as_slice()
            );
        }
    }
}

#[test]
fn nm_contact_point_weak_minimality() {
    let problem = fixtures::disc();
    let cone = problem.cone.clone();
    let sc = Scalarizer::new(&problem);
    let grid = feasible_grid(250);
    let interior = cone.interior_direction();

    for target in [v(&[0.0, 0.0]), v(&[-0.5, 0.3])] {
        let sp = sc.nm(&target).unwrap();
        let sol = solve_scalar(&sp, &BackendOptions::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        let z = sol.x.rows(2, 2).into_owned();
        let contact = &target + &z;
        // The contact point v + z* supports the upper image: nothing on the
        // grid interior-dominates it.
        let margin = &interior * 1e-4;
        for g in &grid {
            assert!(
                !cone.leq(&(g + &margin), &contact).unwrap(),
                "grid image {:?} interior-dominates NM contact {:?}",
                g.as_slice(),
                contact.as_slice()
            );
        }
        // The aggregated dual normal points along z*.
        let w = sc
            .cut_normal(&sol.duals[..sc.cone_rows()])
            .expect("nonzero duals at positive distance");
        let alignment = w.dot(&z) / z.norm();
        assert!(
            alignment > 1.0 - 1e-5,
            "cut normal misaligned with z*: {alignment}"
        );
    }
}
