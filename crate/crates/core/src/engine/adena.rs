//! Enclosure-refinement driver for the natural ordering.
//!
//! The zone of interest is `[ideal − δ·1, u⁰]` with the upper corner taken as
//! the componentwise maximum over the initial images plus δ, where δ is one
//! percent of the initial objective range. Each iteration picks the widest
//! compatible box `[l, u]`, solves a Pascoletti–Serafini subproblem from `l`
//! along the box diagonal with the images capped at `u`, inserts the image
//! point into both staircases and advances the lower staircase past the
//! supporting point `l + t*·d`. An infeasible subproblem certifies that no
//! image lies below `u`, which advances the lower staircase past `u`
//! directly.

use nalgebra::DVector;

use super::outer::lex_cmp;
use super::{
    check_stopping, image_key, initialize, Context, EnclosureSnapshot, EngineError, InitOutcome,
    SolveResult, SolverStatus,
};
use crate::backend::{SolveStatus, SubproblemKind};
use crate::bounds::{BoundsError, EnclosureState};
use crate::scalarize::ParamKey;
use std::collections::HashSet;

pub(super) fn run(ctx: &mut Context<'_>) -> Result<SolveResult, EngineError> {
    if !ctx.problem.cone.is_natural() {
        return Err(EngineError::ConeNotSupported);
    }
    let q = ctx.problem.num_objectives();

    let init = match initialize(ctx)? {
        InitOutcome::Ready(data) => data,
        InitOutcome::Infeasible => return Ok(SolveResult::terminal(SolverStatus::Infeasible)),
        InitOutcome::Unbounded => return Ok(SolveResult::terminal(SolverStatus::Unbounded)),
    };

    // Ideal point from the weighted-sum values; the dual rays of the natural
    // cone are the unit vectors, in the order stored on the cone.
    let mut ideal = DVector::zeros(q);
    for (w, value) in ctx.scalarizer.dual_rays().iter().zip(&init.ws_values) {
        let axis = w.iamax();
        ideal[axis] = *value;
    }
    let mut upper_raw = DVector::from_element(q, f64::NEG_INFINITY);
    for image in &init.images {
        for i in 0..q {
            upper_raw[i] = upper_raw[i].max(image[i]);
        }
    }
    let range = (0..q)
        .map(|i| upper_raw[i] - ideal[i])
        .fold(0.0_f64, f64::max)
        .max(1e-6);
    let delta = 1e-2 * range;
    let zone_low = ideal.map(|v| v - delta);
    let zone_high = upper_raw.map(|v| v + delta);

    let mut enclosure = EnclosureState::new(zone_low, zone_high)
        .map_err(|e| EngineError::Internal(e.to_string()))?;
    let width_initial = enclosure.width();

    let mut solutions: Vec<DVector<f64>> = Vec::new();
    let mut images: Vec<DVector<f64>> = Vec::new();
    let mut weights: Vec<DVector<f64>> = Vec::new();
    let mut seen_images: HashSet<Vec<i64>> = HashSet::new();
    let add_solution = |solutions: &mut Vec<DVector<f64>>,
                        images: &mut Vec<DVector<f64>>,
                        weights: &mut Vec<DVector<f64>>,
                        seen: &mut HashSet<Vec<i64>>,
                        x: DVector<f64>,
                        image: DVector<f64>,
                        w: DVector<f64>| {
        if seen.insert(image_key(&image)) {
            solutions.push(x);
            images.push(image);
            weights.push(w);
        }
    };

    // Seed the staircases with the initial images; weighted-sum optima are
    // weak minimizers, so both splits are sound.
    for ((x, image), w) in init
        .solutions
        .into_iter()
        .zip(init.images)
        .zip(init.weights)
    {
        let _ = enclosure.insert_point(&image);
        add_solution(
            &mut solutions,
            &mut images,
            &mut weights,
            &mut seen_images,
            x,
            image,
            w,
        );
    }

    // The trace starts with the width of the initial singleton enclosure,
    // the reference value of the scaled stopping test.
    let mut trace: Vec<f64> = vec![width_initial];
    let status = loop {
        let width = enclosure.width();
        trace.push(width);
        if check_stopping(width, width_initial, ctx.opts.eps_opt) {
            break SolverStatus::Solved;
        }
        if trace.len() > ctx.opts.max_iter + 1 {
            break SolverStatus::MaxIterReached;
        }

        // Widest compatible pair not yet tried. Boxes that are flat in some
        // coordinate cannot host a refinement direction and are skipped.
        let min_edge = 1e-7 * range;
        let chosen: Option<(DVector<f64>, DVector<f64>)> = enclosure
            .widest_pair_where(|l, u, edge| edge > min_edge && !ctx.seen(&pair_key(l, u)))
            .map(|(l, u, _)| (l.clone(), u.clone()));
        let Some((l, u)) = chosen else {
            break SolverStatus::PartialFailure;
        };
        let key = pair_key(&l, &u);
        ctx.mark_submitted(key.clone());

        let diff = &u - &l;
        let dir = &diff / diff.norm();
        let sp = ctx
            .scalarizer
            .ps_boxed(&l, &dir, &u)
            .map_err(EngineError::Scalarize)?;
        let sol = ctx.backend.solve(&sp, &ctx.opts.scalarization);
        ctx.subproblem_count += 1;

        match sol.status {
            SolveStatus::Optimal => {
                let t_star = sol.objective_value;
                let x = sol.x.rows(0, ctx.problem.n).into_owned();
                let image = ctx.problem.evaluate_objectives(&x)?;
                let w = ctx
                    .scalarizer
                    .cut_normal(&sol.duals[..ctx.scalarizer.cone_rows()])
                    .unwrap_or_else(|| ctx.problem.cone.interior_direction());
                match enclosure.insert_point(&image) {
                    Ok(()) => {}
                    Err(BoundsError::OutOfZone) => {}
                    Err(e) => return Err(EngineError::Internal(e.to_string())),
                }
                let support = &l + &dir * t_star.max(0.0);
                enclosure.insert_lower_support(&support);
                add_solution(
                    &mut solutions,
                    &mut images,
                    &mut weights,
                    &mut seen_images,
                    x,
                    image,
                    w,
                );
            }
            SolveStatus::Infeasible => {
                // No image lies below u; the box is empty.
                enclosure.insert_lower_support(&u);
            }
            SolveStatus::Unbounded => break SolverStatus::Unbounded,
            SolveStatus::NumericalFailure => {
                ctx.cache.record(key);
            }
        }
    };

    // Deterministic ordering of the reported sets for reproducible exports.
    let mut order: Vec<usize> = (0..solutions.len()).collect();
    order.sort_by(|&a, &b| lex_cmp(&images[a], &images[b]));
    let solutions: Vec<_> = order.iter().map(|&i| solutions[i].clone()).collect();
    let images_sorted: Vec<_> = order.iter().map(|&i| images[i].clone()).collect();
    let weights: Vec<_> = order.iter().map(|&i| weights[i].clone()).collect();

    let (zl, zh) = enclosure.zone();
    Ok(SolveResult {
        status,
        solutions,
        images: images_sorted,
        weights,
        metric_trace: trace,
        subproblem_count: ctx.subproblem_count,
        failed_parameter_count: ctx.cache.len(),
        outer_halfspaces: Vec::new(),
        enclosure: Some(EnclosureSnapshot {
            lower: enclosure.lower_bounds().to_vec(),
            upper: enclosure.upper_bounds().to_vec(),
            stable: enclosure.stable_set().to_vec(),
            zone_low: zl.clone(),
            zone_high: zh.clone(),
        }),
    })
}

fn pair_key(l: &DVector<f64>, u: &DVector<f64>) -> ParamKey {
    let params: Vec<f64> = l.iter().chain(u.iter()).copied().collect();
    ParamKey::new(SubproblemKind::PascolettiSerafini, &params)
}
