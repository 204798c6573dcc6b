//! Measurement disturbance: Δ(B;A) = −Σᵢ (I−Pᵢ) B Pᵢ over the spectral
//! projections of A, post-measurement ensembles, outcome distributions, and
//! the strong-convergence sweep over the family index n.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kscons::{make_family, ObstructionFamily};
use crate::lattice::{l2_norm, Basis, Direction, Ensemble, PureState, StateSpec, C64};
use crate::opalg::{expectation, sym_product, LinOp};
use crate::report::{fmt_f64, json_escape};

/// Ensemble members below this weight are dropped after projection.
pub const WEIGHT_FLOOR: f64 = 1e-14;

/// Residual bound for the resolution-of-identity check on projections.
pub const RESOLUTION_TOL: f64 = 1e-10;

fn probe_states(cfg: &Arc<crate::lattice::LatticeConfig>, count: usize) -> Vec<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cafe);
    (0..count)
        .map(|_| {
            let mut v: Vec<C64> = (0..cfg.n())
                .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let nrm = l2_norm(&v);
            for z in v.iter_mut() {
                *z /= nrm;
            }
            v
        })
        .collect()
}

fn validate_resolution(projections: &[LinOp]) -> Result<()> {
    if projections.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one projection required".into(),
        ));
    }
    let cfg = projections[0].lattice();
    for p in projections {
        if !p.lattice().same_grid(cfg) {
            return Err(Error::DimensionMismatch {
                expected: cfg.n(),
                got: p.lattice().n(),
            });
        }
    }
    for probe in probe_states(cfg, 3) {
        // completeness: Σ Pᵢ = I
        let mut sum = vec![C64::new(0.0, 0.0); cfg.n()];
        for p in projections {
            for (s, x) in sum.iter_mut().zip(p.apply(&probe)?) {
                *s += x;
            }
        }
        let defect: f64 = sum
            .iter()
            .zip(&probe)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if defect > RESOLUTION_TOL {
            return Err(Error::ToleranceFailure {
                check: "projections sum to identity".into(),
                residual: defect,
                tolerance: RESOLUTION_TOL,
            });
        }
        // pairwise orthogonality
        for (i, pi) in projections.iter().enumerate() {
            for pj in projections.iter().skip(i + 1) {
                let cross = l2_norm(&pi.apply(&pj.apply(&probe)?)?);
                if cross > RESOLUTION_TOL {
                    return Err(Error::ToleranceFailure {
                        check: "projections pairwise orthogonal".into(),
                        residual: cross,
                        tolerance: RESOLUTION_TOL,
                    });
                }
            }
        }
    }
    Ok(())
}

/// The disturbance operator Δ(B;A) = −Σᵢ (I−Pᵢ) B Pᵢ = Σᵢ Pᵢ B Pᵢ − B,
/// given the spectral projections of A as a resolution of identity.
pub fn disturbance(b: &LinOp, a_projections: &[LinOp]) -> Result<LinOp> {
    validate_resolution(a_projections)?;
    let one = C64::new(1.0, 0.0);
    let mut terms = Vec::with_capacity(a_projections.len() + 1);
    for p in a_projections {
        terms.push((
            one,
            LinOp::product(vec![p.clone(), b.clone(), p.clone()])?,
        ));
    }
    terms.push((-one, b.clone()));
    LinOp::weighted_sum(terms)
}

/// Spectral projections P± = (I ± A)/2 of an involution. For an exact ±1
/// position diagonal the indicators are built entry-wise (exact 0/1 values);
/// otherwise the operator form is returned.
pub fn involution_projections(a: &LinOp) -> Result<(LinOp, LinOp)> {
    if let Some(values) = a.pos_diag_values() {
        let mut plus = Vec::with_capacity(values.len());
        let mut minus = Vec::with_capacity(values.len());
        for (i, z) in values.iter().enumerate() {
            if (z.re - 1.0).abs() < 1e-12 && z.im.abs() < 1e-12 {
                plus.push(C64::new(1.0, 0.0));
                minus.push(C64::new(0.0, 0.0));
            } else if (z.re + 1.0).abs() < 1e-12 && z.im.abs() < 1e-12 {
                plus.push(C64::new(0.0, 0.0));
                minus.push(C64::new(1.0, 0.0));
            } else {
                return Err(Error::InvalidParameter(format!(
                    "diagonal value {z} at site {i} is not ±1; not an involution"
                )));
            }
        }
        let cfg = a.lattice();
        return Ok((LinOp::pos_diag(cfg, plus)?, LinOp::pos_diag(cfg, minus)?));
    }
    let cfg = a.lattice();
    let half = C64::new(0.5, 0.0);
    let id = LinOp::identity(cfg);
    let plus = LinOp::weighted_sum(vec![(half, id.clone()), (half, a.clone())])?;
    let minus = LinOp::weighted_sum(vec![(half, id), (-half, a.clone())])?;
    Ok((plus, minus))
}

/// Ideal projective measurement of A on the ensemble: members become the
/// normalized projected states with Born weights; negligible branches are
/// dropped and weights renormalized.
pub fn post_measurement_ensemble(rho: &Ensemble, a_projections: &[LinOp]) -> Result<Ensemble> {
    validate_resolution(a_projections)?;
    let cfg = rho.config().clone();
    let mut members = Vec::new();
    for (w, psi) in rho.members() {
        for p in a_projections {
            let projected = p.apply_state(psi)?;
            let nsq: f64 = projected.iter().map(|z| z.norm_sqr()).sum();
            let weight = w * nsq;
            if weight < WEIGHT_FLOOR {
                continue;
            }
            let state = PureState::from_unnormalized(Arc::clone(&cfg), projected)?;
            members.push((weight, state));
        }
    }
    Ensemble::from_parts_renormalized(members)
}

/// Expectation shift of B under a prior ideal A-measurement, computed two
/// independent ways: directly from the post-measurement ensemble, and as
/// ⟨Δ(B;A)⟩ on the original ensemble.
pub fn expectation_shift(
    rho: &Ensemble,
    a_projections: &[LinOp],
    b: &LinOp,
) -> Result<(f64, f64)> {
    let after = post_measurement_ensemble(rho, a_projections)?;
    let direct = expectation(&after, b)? - expectation(rho, b)?;
    let delta = disturbance(b, a_projections)?;
    let via_delta = expectation(rho, &delta)?;
    Ok((direct.re, via_delta.re))
}

/// Outcome value distribution of a diagonal observable.
#[derive(Debug, Clone)]
pub struct Histogram {
    /// (eigenvalue representative, probability), sorted by value.
    pub buckets: Vec<(f64, f64)>,
}

impl Histogram {
    pub fn total(&self) -> f64 {
        self.buckets.iter().map(|(_, p)| p).sum()
    }

    /// Total probability of buckets whose representative lies within
    /// `tol` of `value`.
    pub fn probability_near(&self, value: f64, tol: f64) -> f64 {
        self.buckets
            .iter()
            .filter(|(v, _)| (v - value).abs() <= tol)
            .map(|(_, p)| p)
            .sum()
    }

    /// Total probability of |v| ≤ band.
    pub fn probability_within_band(&self, band: f64) -> f64 {
        self.buckets
            .iter()
            .filter(|(v, _)| v.abs() <= band)
            .map(|(_, p)| p)
            .sum()
    }
}

/// Greedy 1-D clustering with a relative tolerance anchored at each cluster's
/// smallest member. Returns cluster representatives (midpoint of the cluster
/// range, ascending) and the cluster index of every input position.
pub(crate) fn cluster_reals(values: &[f64], tol: f64) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut reps = Vec::new();
    let mut index_of = vec![0usize; values.len()];
    let mut lo = f64::NAN;
    let mut hi = f64::NAN;
    for &idx in &order {
        let v = values[idx];
        let in_cluster = !lo.is_nan() && (v - lo) <= tol * lo.abs().max(1.0);
        if !in_cluster {
            if !lo.is_nan() {
                reps.push(0.5 * (lo + hi));
            }
            lo = v;
        }
        hi = v;
        index_of[idx] = reps.len();
        if in_cluster {
            continue;
        }
    }
    if !lo.is_nan() {
        reps.push(0.5 * (lo + hi));
    }
    (reps, index_of)
}

fn diagonal_observable(b: &LinOp) -> Result<(Basis, Vec<f64>)> {
    let (basis, values) = if let Some(v) = b.pos_diag_values() {
        (Basis::Position, v)
    } else if let Some(v) = b.mom_diag_values() {
        (Basis::Momentum, v)
    } else {
        return Err(Error::NotDiagonal(
            "outcome distribution requires a position- or momentum-diagonal observable".into(),
        ));
    };
    let mut reals = Vec::with_capacity(values.len());
    for (i, z) in values.iter().enumerate() {
        if z.im.abs() > 1e-10 {
            return Err(Error::NotDiagonal(format!(
                "observable diagonal has imaginary part {} at index {i}",
                z.im
            )));
        }
        reals.push(z.re);
    }
    Ok((basis, reals))
}

fn basis_probabilities(rho: &Ensemble, basis: Basis) -> Result<Vec<f64>> {
    let n = rho.config().n();
    let mut probs = vec![0.0f64; n];
    for (w, psi) in rho.members() {
        match basis {
            Basis::Position => {
                for (p, a) in probs.iter_mut().zip(psi.amplitudes()) {
                    *p += w * a.norm_sqr();
                }
            }
            Basis::Momentum => {
                let mom = crate::lattice::transform(psi, Direction::ToMomentum)?;
                for (p, a) in probs.iter_mut().zip(mom.amplitudes()) {
                    *p += w * a.norm_sqr();
                }
            }
        }
    }
    Ok(probs)
}

/// Group the diagonal values of B into eigenvalue buckets within
/// `bucket_tol` (relative) and accumulate Born probabilities from the
/// ensemble in B's diagonalizing basis.
pub fn outcome_distribution(rho: &Ensemble, b: &LinOp, bucket_tol: f64) -> Result<Histogram> {
    if !(bucket_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bucket tolerance must be positive, got {bucket_tol}"
        )));
    }
    if !rho.config().same_grid(b.lattice()) {
        return Err(Error::DimensionMismatch {
            expected: b.lattice().n(),
            got: rho.config().n(),
        });
    }
    let (basis, values) = diagonal_observable(b)?;
    let probs = basis_probabilities(rho, basis)?;
    let (reps, index_of) = cluster_reals(&values, bucket_tol);
    let mut bucket_probs = vec![0.0f64; reps.len()];
    for (i, &cluster) in index_of.iter().enumerate() {
        bucket_probs[cluster] += probs[i];
    }
    Ok(Histogram {
        buckets: reps.into_iter().zip(bucket_probs).collect(),
    })
}

/// One measurement row of the convergence sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub n: u32,
    pub k: u32,
    pub state_id: String,
    /// ‖Δ(B̂₁ᵏ; Â₂ₙ)ψ‖
    pub delta_norm: f64,
    /// ‖Δ((Â₂ₙ∘B̂₁)ᵏ; Â₂ₙ)ψ‖ — exactly zero up to roundoff since Â₂ₙ² = I
    pub sym_delta_norm: f64,
    /// ‖Δ((B̂₁B̂₂ₙ)ᵏ; Â₁ₙÂ₂ₙ)ψ‖
    pub product_delta_norm: f64,
}

/// Least-squares line through (ln n, ln max‖Δψ‖).
#[derive(Debug, Clone, Copy)]
pub struct FitLine {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone)]
pub struct DisturbanceReport {
    pub rows: Vec<SweepRow>,
    /// Present when the sweep covers at least two distinct n.
    pub fit: Option<FitLine>,
}

impl DisturbanceReport {
    /// max over states of delta_norm at k = 1, per n (ascending n order).
    pub fn peak_delta_by_n(&self) -> Vec<(u32, f64)> {
        let mut out: Vec<(u32, f64)> = Vec::new();
        for row in self.rows.iter().filter(|r| r.k == 1) {
            match out.iter_mut().find(|(n, _)| *n == row.n) {
                Some((_, v)) => *v = v.max(row.delta_norm),
                None => out.push((row.n, row.delta_norm)),
            }
        }
        out.sort_by_key(|(n, _)| *n);
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,k,state_id,delta_norm,sym_delta_norm,product_delta_norm\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.n,
                r.k,
                r.state_id,
                fmt_f64(r.delta_norm),
                fmt_f64(r.sym_delta_norm),
                fmt_f64(r.product_delta_norm)
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n  \"rows\": [\n");
        for (i, r) in self.rows.iter().enumerate() {
            let _ = write!(
                out,
                "    {{\"n\": {}, \"k\": {}, \"state_id\": \"{}\", \"delta_norm\": {}, \"sym_delta_norm\": {}, \"product_delta_norm\": {}}}",
                r.n,
                r.k,
                json_escape(&r.state_id),
                fmt_f64(r.delta_norm),
                fmt_f64(r.sym_delta_norm),
                fmt_f64(r.product_delta_norm)
            );
            if i + 1 < self.rows.len() {
                out.push(',');
            }
            out.push('\n');
        }
        out.push_str("  ],\n");
        match &self.fit {
            Some(f) => {
                let _ = writeln!(
                    out,
                    "  \"fit\": {{\"slope\": {}, \"intercept\": {}}}",
                    fmt_f64(f.slope),
                    fmt_f64(f.intercept)
                );
            }
            None => out.push_str("  \"fit\": null\n"),
        }
        out.push_str("}\n");
        out
    }
}

fn sweep_one_family(
    family: &ObstructionFamily,
    k_max: u32,
    specs: &[StateSpec],
) -> Result<Vec<SweepRow>> {
    let states = family.instantiate_states(specs)?;
    let e2 = family.e2().as_slice().to_vec();
    let b1 = family.b1_op().clone();
    let a2 = family.a2_op().clone();
    let a1a2 = family.a1_a2_op();
    let b1b2n = family.b1_b2n_op();
    let (p_plus, p_minus) = involution_projections(&a1a2)?;
    let prod_projections = vec![p_plus, p_minus];
    let sym = sym_product(&a2, &b1)?;

    let mut rows = Vec::with_capacity(k_max as usize * specs.len());
    for k in 1..=k_max {
        let delta_b1 = disturbance(&b1.pow(k), &e2)?;
        let delta_sym = disturbance(&sym.pow(k), &e2)?;
        let delta_prod = disturbance(&b1b2n.pow(k), &prod_projections)?;
        for (spec, psi) in specs.iter().zip(&states) {
            rows.push(SweepRow {
                n: family.n(),
                k,
                state_id: spec.id(),
                delta_norm: l2_norm(&delta_b1.apply_state(psi)?),
                sym_delta_norm: l2_norm(&delta_sym.apply_state(psi)?),
                product_delta_norm: l2_norm(&delta_prod.apply_state(psi)?),
            });
        }
    }
    Ok(rows)
}

fn log_log_fit(points: &[(f64, f64)]) -> Option<FitLine> {
    if points.len() < 2 {
        return None;
    }
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(x, _)| x.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, y)| y.ln()).collect();
    let mean_x = xs.iter().sum::<f64>() / m;
    let mean_y = ys.iter().sum::<f64>() / m;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        cov += (x - mean_x) * (y - mean_y);
        var += (x - mean_x) * (x - mean_x);
    }
    if var == 0.0 {
        return None;
    }
    let slope = cov / var;
    Some(FitLine {
        slope,
        intercept: mean_y - slope * mean_x,
    })
}

/// Sweep the family index: for every n in `n_list` (each on its own lattice
/// of `n_rule(n)` sites) compute all disturbance norms up to moment order
/// `k_max` over the state family, plus the log-log fit of the k = 1 peak
/// disturbance against n. Families are evaluated concurrently.
pub fn convergence_sweep(
    n_list: &[u32],
    c: u32,
    a: f64,
    n_rule: impl Fn(u32) -> usize + Sync,
    k_max: u32,
    specs: &[StateSpec],
) -> Result<DisturbanceReport> {
    if n_list.is_empty() {
        return Err(Error::InvalidParameter("empty n list".into()));
    }
    if k_max < 1 {
        return Err(Error::InvalidParameter("k_max must be >= 1".into()));
    }
    let per_n: Vec<Result<Vec<SweepRow>>> = n_list
        .par_iter()
        .map(|&n| {
            let family = make_family(n_rule(n), n, c, a)?;
            sweep_one_family(&family, k_max, specs)
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_n {
        rows.extend(r?);
    }
    let report = DisturbanceReport { rows, fit: None };
    let points: Vec<(f64, f64)> = report
        .peak_delta_by_n()
        .into_iter()
        .map(|(n, d)| (n as f64, d))
        .collect();
    let fit = log_log_fit(&points);
    Ok(DisturbanceReport {
        rows: report.rows,
        fit,
    })
}
